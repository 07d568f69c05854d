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

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/oracles.hpp"
#include "varclr/eval.hpp"

using namespace varclr;

TEST_CASE("spearman extremes and the tied example") {
  const std::vector<double> xs = {1, 2, 3, 4, 5}, rev = {9, 7, 5, 3, 1};
  CHECK(spearman(xs, xs) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spearman(xs, rev) == doctest::Approx(-1.0).epsilon(1e-15));
  const std::vector<double> a = {1, 2, 2, 4}, b = {1, 3, 2, 4};
  const double expected = oracle::brute_spearman(a, b);
  CHECK(std::abs(spearman(a, b) - expected) <= 1e-12);
  // Ranks (1, 2.5, 2.5, 4) against (1, 3, 2, 4).
  CHECK(expected == doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)).epsilon(1e-14));
}

TEST_CASE("average_ranks share tied positions") {
  CHECK(average_ranks(std::vector<double>{10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
  CHECK(average_ranks(std::vector<double>{7, 7, 7}) == std::vector<double>{2, 2, 2});
}

TEST_CASE("spearman properties on random inputs") {
  Rng rng(1);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 3 + rng.below(30);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(8));
      y[i] = rng.uniform(-3, 3);
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) continue;
    const double r = spearman(x, y);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    CHECK(std::abs(r - spearman(y, x)) <= 1e-12);
    CHECK(std::abs(r - oracle::brute_spearman(x, y)) <= 1e-12);
    std::vector<double> tx(n);
    for (std::size_t i = 0; i < n; ++i) tx[i] = std::exp(x[i]) * 3 + 1;  // strictly increasing
    CHECK(std::abs(r - spearman(tx, y)) <= 1e-12);
  }
}

TEST_CASE("spearman errors") {
  auto code_of = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode{};
  };
  CHECK(code_of([] { spearman(std::vector<double>{1, 2}, std::vector<double>{1}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { spearman(std::vector<double>{1}, std::vector<double>{1}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { spearman(std::vector<double>{3, 3, 3}, std::vector<double>{1, 2, 3}); }) ==
        ErrorCode::kUndefined);
}

TEST_CASE("levenshtein distance and score") {
  CHECK(levenshtein("minimum", "maximum") == 2);
  CHECK(levenshtein("minimum", "minimal") == 2);
  CHECK(levenshtein("same", "same") == 0);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein_score("", "") == 1.0);
  CHECK(levenshtein_score("abcd", "abce") == doctest::Approx(0.75));
  CHECK(levenshtein_score("ab", "xyz") == 0.0);
}

TEST_CASE("levenshtein is a metric on random triples") {
  Rng rng(2);
  auto word = [&] {
    std::string s(rng.below(8), 'a');
    for (char& c : s) c = static_cast<char>('a' + rng.below(3));
    return s;
  };
  for (int t = 0; t < 1000; ++t) {
    const std::string a = word(), b = word(), c = word();
    CHECK(levenshtein(a, b) == levenshtein(b, a));
    CHECK((levenshtein(a, b) == 0) == (a == b));
    CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
  }
}

TEST_CASE("benchmark CSV parsing") {
  const auto pairs = parse_benchmark_csv(
      "var1,var2,relatedness,similarity,extra\n"
      "min,max,0.9,0.1,x\n"
      "len,length,,0.95,\n"
      "a,b,0.5,,\n\n");
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].left == "min");
  CHECK(*pairs[0].relatedness == 0.9);
  CHECK(*pairs[0].similarity == 0.1);
  CHECK_FALSE(pairs[1].relatedness);
  CHECK_FALSE(pairs[2].similarity);
  CHECK(parse_benchmark_csv("id1,id2,similarity\nx,y,0.5\n").size() == 1);
  CHECK_THROWS_AS(parse_benchmark_csv(""), Error);
  CHECK_THROWS_AS(parse_benchmark_csv("a,b,similarity\n"), Error);
  CHECK_THROWS_AS(parse_benchmark_csv("var1,var2\n"), Error);
  CHECK_THROWS_AS(parse_benchmark_csv("var1,var2,similarity\nx,y,\n"), Error);
  CHECK_THROWS_AS(parse_benchmark_csv("var1,var2,similarity\nx,y,high\n"), Error);
}

TEST_CASE("evaluate_benchmark with stub scorers") {
  const auto pairs = parse_benchmark_csv(
      "var1,var2,relatedness,similarity\n"
      "a,b,0.1,0.9\nc,d,0.4,0.2\ne,f,0.7,0.5\ng,h,0.2,0.3\n");
  std::map<std::string, double> human;
  for (const auto& p : pairs) human[p.left] = *p.similarity;
  const ScoreReport exact = evaluate_benchmark(
      pairs, [&](std::string_view a, std::string_view) { return human.at(std::string(a)); }, "stub");
  CHECK(*exact.similarity == doctest::Approx(1.0));
  CHECK(exact.pairs == 4);
  CHECK(exact.dropped == 0);
  CHECK(exact.relatedness.has_value());

  CHECK_THROWS_AS(evaluate_benchmark(pairs, [](std::string_view, std::string_view) { return 0.5; }, "const"), Error);

  const ScoreReport dropped = evaluate_benchmark(
      pairs,
      [&](std::string_view a, std::string_view) {
        if (a == "a") throw Error(ErrorCode::kInvalidName, "nope");
        return human.at(std::string(a));
      },
      "stub");
  CHECK(dropped.dropped == 1);
  CHECK(*dropped.similarity == doctest::Approx(1.0));

  const std::string csv = format_report_csv(exact, "small.csv");
  CHECK(csv.rfind("benchmark,encoder,pairs,dropped,similarity,relatedness\nsmall.csv,stub,4,0,1.0,", 0) == 0);
}

TEST_CASE("similarity_score on a checkpoint") {
  Rng rng(3);
  Checkpoint ck{BpeVocab(), init_encoder({EncoderKind::kAvg, BpeVocab::kBaseSize, 4, 0, 0}, rng), {}};
  CHECK(similarity_score("maxCount", "maxCount", ck) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(similarity_score("a", "b", ck) == doctest::Approx(similarity_score("b", "a", ck)).epsilon(1e-15));
  // Orthogonal rows for 'a' and 'b'.
  ck.encoder.embeddings.row(ck.vocab.id("a"))[0] = 1;
  for (std::size_t c = 1; c < 4; ++c) ck.encoder.embeddings.row(ck.vocab.id("a"))[c] = 0;
  ck.encoder.embeddings.row(ck.vocab.id("b"))[0] = 0;
  ck.encoder.embeddings.row(ck.vocab.id("b"))[1] = 2;
  ck.encoder.embeddings.row(ck.vocab.id("b"))[2] = 0;
  ck.encoder.embeddings.row(ck.vocab.id("b"))[3] = 0;
  CHECK(std::abs(similarity_score("a", "b", ck)) < 1e-15);
  CHECK(cosine(Vector{1, 2}, Vector{3, 6}) == doctest::Approx(1.0));
  CHECK(cosine(Vector{1, 2}, Vector{-2, 1}) == doctest::Approx(0.0));
  CHECK(cosine(Vector{1, 2}, Vector{-3, -6}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(similarity_score("a", "not-valid", ck), Error);
}
