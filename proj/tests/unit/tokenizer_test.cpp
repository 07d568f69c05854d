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

#include <string>
#include <vector>

#include "doctest.h"
#include "support/oracles.hpp"
#include "varclr/tokenizer.hpp"

using namespace varclr;
using Tokens = std::vector<std::string>;

namespace {

std::string random_identifier(Rng& rng) {
  static const std::string chars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_";
  std::string s;
  const std::size_t len = 1 + rng.below(14);
  for (std::size_t i = 0; i < len; ++i) s += chars[rng.below(chars.size())];
  if (s.find_first_not_of('_') == std::string::npos) s += 'q';
  return s;
}

std::string random_word(Rng& rng, std::size_t alphabet = 26) {
  std::string w(1 + rng.below(7), 'a');
  for (char& c : w) c = static_cast<char>('a' + rng.below(alphabet));
  return w;
}

std::vector<CanonicalTokens> words_corpus(std::initializer_list<const char*> words) {
  std::vector<CanonicalTokens> c;
  for (const char* w : words) c.push_back({w});
  return c;
}

}  // namespace

TEST_CASE("canonicalize splits snake and camel case the same way") {
  CHECK(canonicalize("max_iteration") == Tokens{"max", "iteration"});
  CHECK(canonicalize("maxIteration") == Tokens{"max", "iteration"});
  CHECK(canonicalize("x") == Tokens{"x"});
}

TEST_CASE("canonicalize applies acronym and digit boundaries") {
  const Tokens expected = oracle::trace_split("HTMLParser2");
  CHECK(expected == Tokens{"html", "parser", "2"});
  CHECK(canonicalize("HTMLParser2") == expected);
  CHECK(canonicalize("program6") == Tokens{"program", "6"});
  CHECK(canonicalize("__init__") == Tokens{"init"});
  CHECK(canonicalize("ABC") == Tokens{"abc"});
  CHECK(canonicalize("getHTTP2Response") == Tokens{"get", "http", "2", "response"});
}

TEST_CASE("canonicalize rejects names outside the identifier alphabet") {
  for (const char* bad : {"", "___", "a-b", "foo bar", "caf\xc3\xa9"}) {
    CAPTURE(bad);
    try {
      canonicalize(bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidName);
    }
  }
}

TEST_CASE("canonicalize agrees with the rule trace on random identifiers") {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const std::string id = random_identifier(rng);
    CAPTURE(id);
    const Tokens got = canonicalize(id);
    CHECK(got == oracle::trace_split(id));
    for (const auto& t : got) {
      CHECK_FALSE(t.empty());
      CHECK(t.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789") == std::string::npos);
    }
  }
}

TEST_CASE("canonicalize is invariant to the separator style") {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    Tokens words;
    const std::size_t n = 1 + rng.below(5);
    // Single letters in camel case would join into an acronym.
    for (std::size_t k = 0; k < n; ++k) words.push_back(random_word(rng) + "e");
    std::string snake, camel;
    for (std::size_t k = 0; k < n; ++k) {
      snake += (k ? "_" : "") + words[k];
      std::string w = words[k];
      if (k) w[0] = static_cast<char>(w[0] - 'a' + 'A');
      camel += w;
    }
    CAPTURE(snake);
    CHECK(canonicalize(snake) == words);
    CHECK(canonicalize(camel) == words);
  }
}

TEST_CASE("train_bpe on a single repeated pair merges it") {
  std::vector<CanonicalTokens> corpus(10, CanonicalTokens{"aa"});
  const BpeVocab v = train_bpe(corpus, {1000, 2});
  REQUIRE(v.merges().size() == 1);
  CHECK(v.merges()[0] == MergeRule{"a", "##a"});
  CHECK(v.contains("aa"));
  CHECK(v.encode("aa") == Tokens{"aa"});
}

TEST_CASE("train_bpe with no adjacent pairs keeps only the base alphabet") {
  const BpeVocab v = train_bpe(words_corpus({"x"}), {1000, 1});
  CHECK(v.merges().empty());
  CHECK(v.size() == BpeVocab::kBaseSize);
}

TEST_CASE("train_bpe merge order matches the pair-counting oracle") {
  const auto corpus = words_corpus({"send", "sends", "ending"});
  const BpeVocab v = train_bpe(corpus, {1000, 1});
  const auto expected = oracle::brute_bpe(corpus, 1000, 1);
  CHECK(v.merges() == expected);
  // "##n ##d" is the only pair present in all three words.
  REQUIRE_FALSE(expected.empty());
  CHECK(expected[0] == MergeRule{"##n", "##d"});
}

TEST_CASE("train_bpe agrees with the oracle on random corpora") {
  Rng rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<CanonicalTokens> corpus;
    const std::size_t n = 1 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      CanonicalTokens name;
      const std::size_t words = 1 + rng.below(3);
      for (std::size_t k = 0; k < words; ++k) name.push_back(random_word(rng, 4));
      corpus.push_back(name);
    }
    const std::size_t target = BpeVocab::kBaseSize + 1 + rng.below(40);
    const std::size_t min_freq = 1 + rng.below(3);
    CAPTURE(trial);
    CHECK(train_bpe(corpus, {target, min_freq}).merges() == oracle::brute_bpe(corpus, target, min_freq));
  }
}

TEST_CASE("train_bpe is deterministic and validates its options") {
  const auto corpus = words_corpus({"alpha", "alphabet", "beta", "betamax", "max"});
  CHECK(train_bpe(corpus, {90, 1}).serialize() == train_bpe(corpus, {90, 1}).serialize());
  CHECK_THROWS_AS(train_bpe(corpus, {BpeVocab::kBaseSize, 1}), Error);
  CHECK_THROWS_AS(train_bpe({}, {100, 1}), Error);
}

TEST_CASE("encode falls back to characters and returns whole entries") {
  const BpeVocab empty;
  CHECK(empty.encode("zqzq") == Tokens{"z", "##q", "##z", "##q"});
  const BpeVocab v({{"s", "##e"}, {"se", "##n"}, {"sen", "##d"}, {"##m", "##s"}, {"##ms", "##g"}});
  CHECK(v.encode("send") == Tokens{"send"});
  CHECK(v.encode("sendmsg") == Tokens{"send", "##msg"});
  CHECK(v.encode("msg") == Tokens{"m", "##s", "##g"});
}

TEST_CASE("encode is lossless") {
  Rng rng(4);
  std::vector<CanonicalTokens> corpus;
  for (int i = 0; i < 200; ++i) corpus.push_back({random_word(rng, 6)});
  const BpeVocab v = train_bpe(corpus, {150, 2});
  for (int i = 0; i < 500; ++i) {
    std::string w = random_word(rng, 26) + std::to_string(rng.below(100));
    std::string rebuilt;
    for (const auto& piece : v.encode(w)) rebuilt += piece.rfind("##", 0) == 0 ? piece.substr(2) : piece;
    CHECK(rebuilt == w);
  }
}

TEST_CASE("vocab ids are dense and merge outputs are present") {
  Rng rng(5);
  std::vector<CanonicalTokens> corpus;
  for (int i = 0; i < 100; ++i) corpus.push_back({random_word(rng, 5), random_word(rng, 5)});
  const BpeVocab v = train_bpe(corpus, {120, 2});
  for (std::int32_t id = 0; id < static_cast<std::int32_t>(v.size()); ++id) CHECK(v.id(v.token(id)) == id);
  for (const auto& m : v.merges()) CHECK(v.contains(merge_symbols(m.left, m.right)));
  for (char c : BpeVocab::kAlphabet) {
    CHECK(v.contains(std::string(1, c)));
    CHECK(v.contains("##" + std::string(1, c)));
  }
  CHECK(v.id("nope-not-a-token") == -1);
  CHECK_THROWS_AS(v.token(static_cast<std::int32_t>(v.size())), Error);
}

TEST_CASE("vocab text round-trips and rejects malformed files") {
  const BpeVocab v({{"m", "##a"}, {"ma", "##x"}});
  const std::string text = v.serialize();
  CHECK(text == "72 2\nm ##a\nma ##x\n");
  const BpeVocab back = BpeVocab::parse(text);
  CHECK(back.merges() == v.merges());
  CHECK(back.fingerprint() == v.fingerprint());
  CHECK_THROWS_AS(BpeVocab::parse(""), Error);
  CHECK_THROWS_AS(BpeVocab::parse("72\n"), Error);
  CHECK_THROWS_AS(BpeVocab::parse("50 0\n"), Error);
  CHECK_THROWS_AS(BpeVocab::parse("72 2\nm ##a\n"), Error);
  CHECK_THROWS_AS(BpeVocab::parse("72 1\nm\n"), Error);
  CHECK_THROWS_AS(BpeVocab::parse("72 1\nQ ##a\n"), Error);
}

TEST_CASE("tokenize composes canonicalization and subword encoding") {
  const BpeVocab v({{"m", "##a"}, {"ma", "##x"}, {"s", "##e"}, {"se", "##n"}, {"sen", "##d"}, {"##m", "##s"},
                    {"##ms", "##g"}});
  const TokenSeq seq = tokenize("max_iteration", v);
  REQUIRE(seq.surface.size() == seq.ids.size());
  CHECK(seq.surface.front() == "max");
  CHECK(tokenize("sendmsg", v).surface == Tokens{"send", "##msg"});
  const TokenSeq sm = tokenize("sendmsg", v);
  CHECK(sm.ids == std::vector<std::int32_t>{v.id("send"), v.id("##msg")});
  CHECK_THROWS_AS(tokenize("", v), Error);
}

TEST_CASE("tokenize never fails on valid identifiers") {
  Rng rng(6);
  const BpeVocab v;
  for (int i = 0; i < 1000; ++i) {
    const std::string id = random_identifier(rng);
    const TokenSeq seq = tokenize(id, v);
    CHECK(seq.ids.size() >= 1);
    for (std::size_t k = 0; k < seq.ids.size(); ++k) CHECK(v.token(seq.ids[k]) == seq.surface[k]);
  }
}
