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

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varclr/checkpoint.hpp"

namespace varclr {

struct BenchmarkPair {
  std::string left;
  std::string right;
  std::optional<double> relatedness;
  std::optional<double> similarity;
};

// CSV with a header naming the columns; "var1"/"id1", "var2"/"id2",
// "relatedness" and "similarity" are recognized, other columns ignored and
// blank cells allowed. Rows with neither score are rejected.
std::vector<BenchmarkPair> parse_benchmark_csv(std::string_view text);

// Cosine of the two encodings. Throws for a name that does not tokenize or
// an encoding with zero norm.
double similarity_score(std::string_view u, std::string_view v, const Checkpoint& model);

double cosine(std::span<const double> a, std::span<const double> b);

// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

// Pearson correlation of average ranks. Throws kInvalidArgument on a length
// mismatch or fewer than two values and kUndefined when either side is
// constant.
double spearman(std::span<const double> xs, std::span<const double> ys);

std::size_t levenshtein(std::string_view a, std::string_view b);

// 1 - distance / max(|a|, |b|); 1 for two empty strings.
double levenshtein_score(std::string_view a, std::string_view b);

struct ScoreReport {
  std::string encoder;
  std::size_t pairs = 0;    // pairs in the benchmark
  std::size_t dropped = 0;  // pairs whose names the scorer rejected
  std::optional<double> similarity;
  std::optional<double> relatedness;
};

// Scores a pair; throwing Error(kInvalidName) marks the pair as dropped.
using PairScorer = std::function<double(std::string_view, std::string_view)>;

// Spearman of scorer output against each human column that has at least two
// scored values.
ScoreReport evaluate_benchmark(std::span<const BenchmarkPair> pairs, const PairScorer& scorer,
                               std::string encoder_name);

ScoreReport evaluate_benchmark(std::span<const BenchmarkPair> pairs, const Checkpoint& model);

// CSV "benchmark,encoder,pairs,dropped,similarity,relatedness" plus one row.
std::string format_report_csv(const ScoreReport& report, std::string_view benchmark);

}  // namespace varclr
