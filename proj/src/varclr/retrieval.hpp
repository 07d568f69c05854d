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

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "varclr/checkpoint.hpp"
#include "varclr/eval.hpp"
#include "varclr/tensor.hpp"

namespace varclr {

// Maps an identifier to an (unnormalized) vector; throws Error(kInvalidName)
// for names it cannot encode.
using Embedder = std::function<Vector(std::string_view)>;

Embedder checkpoint_embedder(const Checkpoint& model);

class SearchIndex {
 public:
  SearchIndex() = default;
  SearchIndex(std::vector<std::string> names, Matrix vectors, std::uint64_t fingerprint);

  const std::vector<std::string>& names() const { return names_; }
  const Matrix& vectors() const { return vectors_; }
  std::uint64_t fingerprint() const { return fingerprint_; }
  std::size_t size() const { return names_.size(); }
  std::size_t dim() const { return vectors_.cols; }

  std::optional<std::size_t> find(std::string_view name) const;

  // Text format: "varclr-index <version> <count> <dim> <fingerprint-hex>",
  // a "checkpoint <path>" line (path may be empty), then
  // "<name>\t<v1> ... <vdim>" per row.
  std::string serialize(std::string_view checkpoint_path) const;
  static SearchIndex parse(std::string_view text, std::string* checkpoint_path = nullptr);

 private:
  std::vector<std::string> names_;
  Matrix vectors_;
  std::uint64_t fingerprint_ = 0;
  std::unordered_map<std::string, std::size_t> lookup_;
};

struct IndexBuild {
  SearchIndex index;
  std::size_t dropped = 0;      // names the embedder rejected
  std::size_t duplicates = 0;   // repeated names collapsed
};

// Deduplicates (first occurrence wins), drops names that fail to embed and
// stores unit-normalized rows.
IndexBuild build_index(std::span<const std::string> names, const Embedder& embed,
                       std::uint64_t fingerprint = 0, std::size_t workers = 1);

struct SearchHit {
  std::string name;
  double score = 0.0;
};

// The k pool entries with the largest dot product against the normalized
// query, descending, ties in pool order. `exclude` (when set) is left out of
// the candidates; k must be within the remaining pool.
std::vector<SearchHit> search(const SearchIndex& index, std::span<const double> query, std::size_t k,
                              std::optional<std::size_t> exclude = std::nullopt);

std::vector<SearchHit> search(const SearchIndex& index, const Embedder& embed, std::string_view query,
                              std::size_t k, bool exclude_query = false);

struct QueryTarget {
  std::string query;
  std::string target;

  friend bool operator==(const QueryTarget&, const QueryTarget&) = default;
};

struct HitCurve {
  std::vector<std::size_t> ks;
  std::vector<double> hits;
  std::size_t queries = 0;
};

// 0-based position of `target` in the ranking for `query` (ties in pool
// order), with `exclude` removed from the candidates.
std::size_t target_rank(const SearchIndex& index, std::span<const double> query, std::size_t target,
                        std::optional<std::size_t> exclude = std::nullopt);

// Fraction of queries whose target is among their top k, for each k.
// Throws kInvalidArgument when a target is not in the index. When
// `exclude_query` is set, a query that is itself in the pool is removed from
// its own candidate list.
HitCurve hit_at_k(const SearchIndex& index, std::span<const QueryTarget> queries, std::span<const std::size_t> ks,
                  const Embedder& embed, bool exclude_query = false);

// Pairs whose human similarity is strictly greater than `threshold`.
std::vector<QueryTarget> filter_similar_pairs(std::span<const BenchmarkPair> pairs, double threshold,
                                              bool both_directions = false);

struct TypoPair {
  std::string misspelled;
  std::string correct;

  friend bool operator==(const TypoPair&, const TypoPair&) = default;
};

enum class TypoEdit { kSubstitute, kInsert, kDelete, kTranspose };

// QWERTY neighbours of a lowercase letter (letters only).
std::string_view keyboard_neighbors(char lower);

// Applies one edit at alphabetic position `pos`, returning nullopt when
// the edit is impossible there or would give the same or an invalid
// identifier.
std::optional<std::string> apply_typo(std::string_view name, TypoEdit edit, std::size_t pos, Rng& rng);

// Samples `count` names without replacement and gives each exactly one
// keyboard edit.
std::vector<TypoPair> make_typos(std::span<const std::string> names, std::size_t count, std::uint64_t seed);

std::vector<std::size_t> parse_ks(std::string_view csv);

// "k,hit_rate" CSV.
std::string format_curve_csv(const HitCurve& curve);

}  // namespace varclr
