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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace varclr {

// Lowercase word tokens of an identifier, e.g. "maxIteration" -> {max, iteration}.
using CanonicalTokens = std::vector<std::string>;

// Splits an identifier on underscores, lower->upper case changes,
// letter<->digit changes and acronym->word boundaries ("HTMLParser" splits
// before the 'P'), then lowercases every piece.
//
// Throws Error(kInvalidName) for an empty name, a character outside
// [A-Za-z0-9_], or a name with no letter or digit.
CanonicalTokens canonicalize(std::string_view name);

inline constexpr std::string_view kContinuation = "##";

struct MergeRule {
  std::string left;
  std::string right;

  friend bool operator==(const MergeRule&, const MergeRule&) = default;
};

// Joins two adjacent subword symbols; the right side's continuation marker
// is dropped ("se" + "##n" -> "sen", "##m" + "##s" -> "##ms").
std::string merge_symbols(std::string_view left, std::string_view right);

// Byte-pair-encoding vocabulary over the canonical alphabet [0-9a-z].
//
// Ids 0..35 are the bare characters, 36..71 their "##" forms, and the
// remaining ids are merge outputs in order of first appearance. The base
// alphabet is always complete, so encoding any canonical word succeeds.
class BpeVocab {
 public:
  static constexpr std::string_view kAlphabet = "0123456789abcdefghijklmnopqrstuvwxyz";
  static constexpr std::size_t kBaseSize = 2 * kAlphabet.size();

  BpeVocab();
  explicit BpeVocab(std::vector<MergeRule> merges);

  const std::vector<MergeRule>& merges() const { return merges_; }
  std::size_t size() const { return id_to_token_.size(); }

  // -1 when absent.
  std::int32_t id(std::string_view token) const;
  const std::string& token(std::int32_t id) const;
  bool contains(std::string_view token) const { return id(token) >= 0; }

  // Subwords of one canonical word; non-initial pieces carry "##". A word
  // that is itself a vocabulary entry is returned whole.
  std::vector<std::string> encode(std::string_view word) const;

  // Vocab text format: "<base_size> <merge_count>" then one "left right"
  // merge per line.
  std::string serialize() const;
  static BpeVocab parse(std::string_view text);

  std::uint64_t fingerprint() const;

 private:
  void add_token(const std::string& token);

  std::vector<MergeRule> merges_;
  std::unordered_map<std::string, std::int32_t> token_to_id_;
  std::vector<std::string> id_to_token_;
  // (left '\x1f' right) -> merge rank
  std::unordered_map<std::string, std::size_t> rank_;
};

struct BpeTrainOptions {
  std::size_t target_vocab_size = 8000;
  std::size_t min_pair_frequency = 2;
};

// Greedy BPE training over word frequencies. Ties between equally frequent
// pairs go to the lexicographically smallest (left, right).
BpeVocab train_bpe(std::span<const CanonicalTokens> corpus, const BpeTrainOptions& options);

inline std::vector<std::string> encode_subwords(std::string_view word, const BpeVocab& vocab) {
  return vocab.encode(word);
}

struct TokenSeq {
  std::vector<std::int32_t> ids;
  std::vector<std::string> surface;
};

TokenSeq tokenize(std::string_view name, const BpeVocab& vocab);

}  // namespace varclr
