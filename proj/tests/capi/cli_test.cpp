// Copyright 2026 The varclr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdio>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "support/temp_dir.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const testing::TempDir& dir, const std::string& args) {
  const std::string err_path = dir.file("stderr.txt");
  const std::string cmd = std::string(VARCLR_CLI) + " " + args + " 2>" + err_path;
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = testing::slurp(err_path);
  return r;
}

std::string toy_pairs() {
  const char* words[] = {"max", "min", "count", "index", "value", "name", "size", "buffer", "total", "length"};
  std::string out;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      if (i == j) continue;
      std::string b = words[j];
      out += std::string(words[i]) + "_" + b + "\t" + words[i] + static_cast<char>(b[0] - 'a' + 'A') + b.substr(1) +
             "\tc" + std::to_string(i * 10 + j) + "\n";
    }
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with status 2") {
  testing::TempDir dir;
  const Run none = run(dir, "");
  CHECK(none.code == 2);
  CHECK_FALSE(none.err.empty());

  const Run bogus = run(dir, "score --bogus x y");
  CHECK(bogus.code == 2);
  CHECK(bogus.err.find("--bogus") != std::string::npos);

  const Run missing = run(dir, "score a b");
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--ckpt") != std::string::npos);

  const Run version = run(dir, "--version");
  CHECK(version.code == 0);
  CHECK(version.out == "varclr 1.0.0 (checkpoint format 1)\n");
}

TEST_CASE("domain errors exit with status 1") {
  testing::TempDir dir;
  const Run r = run(dir, "score --ckpt " + dir.file("missing.ckpt") + " a b");
  CHECK(r.code == 1);
  CHECK(r.err.rfind("varclr: ", 0) == 0);
}

TEST_CASE("end-to-end pipeline is reproducible") {
  testing::TempDir dir;
  dir.write("diffs/one.diff",
            "commit abc\n--- a/f.c\n+++ b/f.c\n@@ -1,2 +1,2 @@\n"
            "-int cnt = 0;\n-return cnt;\n+int count = 0;\n+return count;\n");
  const std::string pairs = dir.write("pairs.tsv", toy_pairs());
  const std::string pool = dir.write("pool.txt", "maxCount\nmax_count\nminValue\ntotalLength\nsizeBuffer\n");

  Run r = run(dir, "mine --diffs " + dir.file("diffs") + " --out " + dir.file("mined.tsv"));
  REQUIRE(r.code == 0);
  CHECK(testing::slurp(dir.file("mined.tsv")) == "cnt\tcount\tabc\n");

  REQUIRE(run(dir, "train-bpe --corpus " + pairs + " --vocab-size 90 --out " + dir.file("vocab.txt")).code == 0);
  r = run(dir, "tokenize --vocab " + dir.file("vocab.txt") + " maxCount");
  CHECK(r.code == 0);
  std::string rebuilt;
  for (char c : r.out)
    if (c != '#' && c != ' ') rebuilt += c;
  CHECK(rebuilt == "maxcount\n");

  const std::string train_args = "train --pairs " + pairs + " --vocab " + dir.file("vocab.txt") +
                                 " --encoder lstm --dim 8 --hidden 4 --out-dim 6 --epochs 3 --seed 4 --workers 2";
  r = run(dir, train_args + " --out " + dir.file("a.ckpt"));
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("epoch,train_loss,val_loss,seconds\n", 0) == 0);
  REQUIRE(run(dir, train_args + " --out " + dir.file("b.ckpt")).code == 0);
  CHECK(testing::slurp(dir.file("a.ckpt")) == testing::slurp(dir.file("b.ckpt")));

  const auto manifest = nlohmann::json::parse(testing::slurp(dir.file("a.ckpt.manifest.json")));
  CHECK(manifest["command"] == "train");
  CHECK(manifest["seed"] == 4);
  CHECK(manifest["inputs"].contains(pairs));
  CHECK(manifest["checkpoint_format"] == 1);

  const std::string ck = dir.file("a.ckpt");
  r = run(dir, "score --ckpt " + ck + " sameName sameName");
  CHECK(r.code == 0);
  CHECK(r.out == "1.0\n");

  dir.write("bench.csv", "var1,var2,similarity\nmaxCount,max_count,0.9\nminValue,sizeBuffer,0.1\ntotalLength,total,0.5\n");
  r = run(dir, "eval --ckpt " + ck + " --benchmark " + dir.file("bench.csv"));
  CHECK(r.code == 0);
  CHECK(r.out.rfind("benchmark,encoder,pairs,dropped,similarity,relatedness\n", 0) == 0);
  CHECK(run(dir, "eval --baseline levenshtein --benchmark " + dir.file("bench.csv")).code == 0);

  REQUIRE(run(dir, "index --ckpt " + ck + " --pool " + pool + " --out " + dir.file("pool.idx")).code == 0);
  r = run(dir, "search --index " + dir.file("pool.idx") + " --query maxCount --k 2");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("rank,name,score\n1,maxCount,1.0\n2,", 0) == 0);

  REQUIRE(run(dir, "typo-gen --pool " + pool + " --count 3 --seed 1 --out " + dir.file("typos.tsv")).code == 0);
  REQUIRE(run(dir, "hitk --index " + dir.file("pool.idx") + " --pairs " + dir.file("typos.tsv") +
                       " --ks 1,5 --out " + dir.file("curve.csv"))
              .code == 0);
  CHECK(testing::slurp(dir.file("curve.csv")).rfind("k,hit_rate\n1,", 0) == 0);
  CHECK(testing::slurp(dir.file("curve.csv")).find("\n5,1.0\n") != std::string::npos);

  REQUIRE(run(dir, "export-embeddings --ckpt " + ck + " --out " + dir.file("emb.txt")).code == 0);
  const std::string emb = testing::slurp(dir.file("emb.txt"));
  CHECK(emb.substr(emb.find(' '), emb.find('\n') - emb.find(' ')) == " 8");
}
