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

#include "varclr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "varclr/io.hpp"

namespace varclr {
namespace {

std::optional<double> parse_score(std::string_view cell, std::size_t line) {
  cell = io::trim(cell);
  if (cell.empty()) return std::nullopt;
  try {
    return parse_double(cell);
  } catch (const Error&) {
    throw Error(ErrorCode::kParse, "benchmark line " + std::to_string(line) + ": bad score '" +
                                       std::string(cell) + "'");
  }
}

int find_column(const std::vector<std::string_view>& header, std::initializer_list<std::string_view> names) {
  for (std::size_t i = 0; i < header.size(); ++i)
    for (auto n : names)
      if (io::trim(header[i]) == n) return static_cast<int>(i);
  return -1;
}

}  // namespace

std::vector<BenchmarkPair> parse_benchmark_csv(std::string_view text) {
  const auto ls = io::lines(text);
  if (ls.empty()) throw Error(ErrorCode::kParse, "benchmark: missing header");
  const auto header = io::split(ls[0], ',');
  const int c_left = find_column(header, {"var1", "id1"});
  const int c_right = find_column(header, {"var2", "id2"});
  const int c_rel = find_column(header, {"relatedness"});
  const int c_sim = find_column(header, {"similarity"});
  if (c_left < 0 || c_right < 0)
    throw Error(ErrorCode::kParse, "benchmark header lacks var1/var2 columns");
  if (c_rel < 0 && c_sim < 0)
    throw Error(ErrorCode::kParse, "benchmark header lacks relatedness/similarity columns");

  std::vector<BenchmarkPair> out;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    if (io::trim(ls[i]).empty()) continue;
    const auto cells = io::split(ls[i], ',');
    auto cell = [&](int c) -> std::string_view {
      return c >= 0 && static_cast<std::size_t>(c) < cells.size() ? cells[static_cast<std::size_t>(c)]
                                                                  : std::string_view{};
    };
    BenchmarkPair p{std::string(io::trim(cell(c_left))), std::string(io::trim(cell(c_right))),
                    parse_score(cell(c_rel), i + 1), parse_score(cell(c_sim), i + 1)};
    if (p.left.empty() || p.right.empty())
      throw Error(ErrorCode::kParse, "benchmark line " + std::to_string(i + 1) + ": missing variable name");
    if (!p.relatedness && !p.similarity)
      throw Error(ErrorCode::kParse, "benchmark line " + std::to_string(i + 1) + ": no score present");
    out.push_back(std::move(p));
  }
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = norm2(a), nb = norm2(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw Error(ErrorCode::kNumeric, "cosine of a zero vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double similarity_score(std::string_view u, std::string_view v, const Checkpoint& model) {
  return cosine(model.embed(u), model.embed(v));
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::kInvalidArgument, "spearman: length mismatch");
  if (xs.size() < 2) throw Error(ErrorCode::kInvalidArgument, "spearman: need at least two values");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw Error(ErrorCode::kUndefined, "spearman: constant input has no rank correlation");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double levenshtein_score(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

ScoreReport evaluate_benchmark(std::span<const BenchmarkPair> pairs, const PairScorer& scorer,
                               std::string encoder_name) {
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "empty benchmark");
  ScoreReport report;
  report.encoder = std::move(encoder_name);
  report.pairs = pairs.size();
  std::vector<double> model_sim, human_sim, model_rel, human_rel;
  for (const auto& p : pairs) {
    double s;
    try {
      s = scorer(p.left, p.right);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidName) throw;
      ++report.dropped;
      continue;
    }
    if (p.similarity) {
      model_sim.push_back(s);
      human_sim.push_back(*p.similarity);
    }
    if (p.relatedness) {
      model_rel.push_back(s);
      human_rel.push_back(*p.relatedness);
    }
  }
  if (model_sim.size() >= 2) report.similarity = spearman(model_sim, human_sim);
  if (model_rel.size() >= 2) report.relatedness = spearman(model_rel, human_rel);
  if (!report.similarity && !report.relatedness)
    throw Error(ErrorCode::kUndefined, "benchmark has fewer than two scoreable pairs");
  return report;
}

ScoreReport evaluate_benchmark(std::span<const BenchmarkPair> pairs, const Checkpoint& model) {
  return evaluate_benchmark(
      pairs, [&](std::string_view a, std::string_view b) { return similarity_score(a, b, model); },
      std::string(to_string(model.encoder.kind)));
}

std::string format_report_csv(const ScoreReport& report, std::string_view benchmark) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  return "benchmark,encoder,pairs,dropped,similarity,relatedness\n" + std::string(benchmark) + "," +
         report.encoder + "," + std::to_string(report.pairs) + "," + std::to_string(report.dropped) + "," +
         opt(report.similarity) + "," + opt(report.relatedness) + "\n";
}

}  // namespace varclr
