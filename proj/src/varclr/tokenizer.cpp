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

#include "varclr/tokenizer.hpp"

#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "varclr/common.hpp"
#include "varclr/io.hpp"

namespace varclr {
namespace {

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_letter(char c) { return is_lower(c) || is_upper(c); }
char to_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

bool in_alphabet(char c) { return is_lower(c) || is_digit(c); }

std::string rank_key(std::string_view left, std::string_view right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left);
  key.push_back('\x1f');
  key.append(right);
  return key;
}

bool valid_symbol(std::string_view s) {
  if (s.starts_with(kContinuation)) s.remove_prefix(kContinuation.size());
  if (s.empty()) return false;
  for (char c : s)
    if (!in_alphabet(c)) return false;
  return true;
}

}  // namespace

CanonicalTokens canonicalize(std::string_view name) {
  if (name.empty()) throw Error(ErrorCode::kInvalidName, "empty identifier");
  CanonicalTokens out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < name.size(); ++i) {
    const char c = name[i];
    if (c == '_') {
      flush();
      continue;
    }
    if (!is_letter(c) && !is_digit(c))
      throw Error(ErrorCode::kInvalidName,
                  "invalid character in identifier '" + std::string(name) + "'");
    if (!current.empty()) {
      const char prev = name[i - 1];
      const bool next_lower = i + 1 < name.size() && is_lower(name[i + 1]);
      const bool boundary = (is_lower(prev) && is_upper(c)) ||
                            (is_digit(prev) != is_digit(c)) ||
                            (is_upper(prev) && is_upper(c) && next_lower);
      if (boundary) flush();
    }
    current.push_back(to_lower(c));
  }
  flush();
  if (out.empty())
    throw Error(ErrorCode::kInvalidName,
                "identifier '" + std::string(name) + "' has no letters or digits");
  return out;
}

std::string merge_symbols(std::string_view left, std::string_view right) {
  std::string out(left);
  if (right.starts_with(kContinuation)) right.remove_prefix(kContinuation.size());
  out.append(right);
  return out;
}

BpeVocab::BpeVocab() {
  for (char c : kAlphabet) add_token(std::string(1, c));
  for (char c : kAlphabet) add_token(std::string(kContinuation) + c);
}

BpeVocab::BpeVocab(std::vector<MergeRule> merges) : BpeVocab() {
  for (std::size_t r = 0; r < merges.size(); ++r) {
    const auto& m = merges[r];
    if (!contains(m.left) || !contains(m.right) || !m.right.starts_with(kContinuation))
      throw Error(ErrorCode::kParse, "merge " + std::to_string(r + 1) + " ('" + m.left +
                                         "', '" + m.right + "') uses unknown symbols");
    add_token(merge_symbols(m.left, m.right));
    rank_.emplace(rank_key(m.left, m.right), r);
  }
  merges_ = std::move(merges);
}

void BpeVocab::add_token(const std::string& token) {
  if (token_to_id_.contains(token)) return;
  token_to_id_.emplace(token, static_cast<std::int32_t>(id_to_token_.size()));
  id_to_token_.push_back(token);
}

std::int32_t BpeVocab::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? -1 : it->second;
}

const std::string& BpeVocab::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
    throw Error(ErrorCode::kInvalidArgument, "token id " + std::to_string(id) + " out of range");
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<std::string> BpeVocab::encode(std::string_view word) const {
  if (word.empty()) throw Error(ErrorCode::kInvalidName, "empty word");
  for (char c : word)
    if (!in_alphabet(c))
      throw Error(ErrorCode::kInvalidName, "word '" + std::string(word) + "' is not canonical");
  if (contains(word)) return {std::string(word)};

  std::vector<std::string> symbols;
  symbols.reserve(word.size());
  symbols.emplace_back(1, word[0]);
  for (std::size_t i = 1; i < word.size(); ++i)
    symbols.push_back(std::string(kContinuation) + word[i]);

  while (symbols.size() > 1) {
    std::size_t best_rank = SIZE_MAX;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = rank_.find(rank_key(symbols[i], symbols[i + 1]));
      if (it != rank_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == SIZE_MAX) break;
    const MergeRule& rule = merges_[best_rank];
    std::vector<std::string> next;
    next.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i + 1 < symbols.size() && symbols[i] == rule.left && symbols[i + 1] == rule.right) {
        next.push_back(merge_symbols(symbols[i], symbols[i + 1]));
        ++i;
      } else {
        next.push_back(std::move(symbols[i]));
      }
    }
    symbols = std::move(next);
  }
  return symbols;
}

std::string BpeVocab::serialize() const {
  std::string out = std::to_string(kBaseSize) + " " + std::to_string(merges_.size()) + "\n";
  for (const auto& m : merges_) out += m.left + " " + m.right + "\n";
  return out;
}

BpeVocab BpeVocab::parse(std::string_view text) {
  auto ls = io::lines(text);
  if (ls.empty()) throw Error(ErrorCode::kParse, "vocab: missing header");
  auto header = io::fields(ls[0]);
  if (header.size() != 2) throw Error(ErrorCode::kParse, "vocab line 1: expected '<base> <merges>'");
  const long long base = parse_int(header[0]);
  const long long count = parse_int(header[1]);
  if (base != static_cast<long long>(kBaseSize))
    throw Error(ErrorCode::kParse, "vocab line 1: base alphabet size " + std::to_string(base) +
                                       ", expected " + std::to_string(kBaseSize));
  if (count < 0 || static_cast<std::size_t>(count) != ls.size() - 1)
    throw Error(ErrorCode::kParse, "vocab line 1: merge count " + std::to_string(count) +
                                       " does not match " + std::to_string(ls.size() - 1) +
                                       " rule lines");
  std::vector<MergeRule> merges;
  merges.reserve(static_cast<std::size_t>(count));
  for (std::size_t i = 1; i < ls.size(); ++i) {
    auto f = io::fields(ls[i]);
    if (f.size() != 2 || !valid_symbol(f[0]) || !valid_symbol(f[1]))
      throw Error(ErrorCode::kParse, "vocab line " + std::to_string(i + 1) + ": malformed merge");
    merges.push_back({std::string(f[0]), std::string(f[1])});
  }
  return BpeVocab(std::move(merges));
}

std::uint64_t BpeVocab::fingerprint() const { return fnv1a(serialize()); }

BpeVocab train_bpe(std::span<const CanonicalTokens> corpus, const BpeTrainOptions& options) {
  if (options.target_vocab_size <= BpeVocab::kBaseSize)
    throw Error(ErrorCode::kInvalidArgument,
                "target vocab size must exceed the base alphabet (" +
                    std::to_string(BpeVocab::kBaseSize) + ")");

  std::map<std::string, long> word_freq;
  for (const auto& tokens : corpus)
    for (const auto& w : tokens) {
      for (char c : w)
        if (!in_alphabet(c))
          throw Error(ErrorCode::kInvalidName, "corpus word '" + w + "' is not canonical");
      if (!w.empty()) ++word_freq[w];
    }
  if (word_freq.empty()) throw Error(ErrorCode::kInvalidArgument, "empty BPE training corpus");

  using Pair = std::pair<std::string, std::string>;
  std::vector<std::vector<std::string>> words;
  std::vector<long> freq;
  for (const auto& [w, f] : word_freq) {
    std::vector<std::string> symbols{std::string(1, w[0])};
    for (std::size_t i = 1; i < w.size(); ++i) symbols.push_back(std::string(kContinuation) + w[i]);
    words.push_back(std::move(symbols));
    freq.push_back(f);
  }

  std::map<Pair, long> counts;
  std::set<std::tuple<long, std::string, std::string>> order;  // (-count, left, right)
  std::map<Pair, std::set<std::size_t>> where;

  auto adjust = [&](const Pair& p, long delta, std::size_t word) {
    long& c = counts[p];
    if (c > 0) order.erase({-c, p.first, p.second});
    c += delta;
    if (c > 0) order.insert({-c, p.first, p.second});
    if (delta > 0) where[p].insert(word);
  };
  auto add_word = [&](std::size_t w, long sign) {
    const auto& s = words[w];
    for (std::size_t i = 0; i + 1 < s.size(); ++i) adjust({s[i], s[i + 1]}, sign * freq[w], w);
  };
  for (std::size_t w = 0; w < words.size(); ++w) add_word(w, +1);

  BpeVocab base;
  std::set<std::string> known;
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(base.size()); ++i) known.insert(base.token(i));

  std::vector<MergeRule> merges;
  while (known.size() < options.target_vocab_size && !order.empty()) {
    const auto& [neg, left, right] = *order.begin();
    if (-neg < static_cast<long>(options.min_pair_frequency)) break;
    const Pair best{left, right};
    const std::string merged = merge_symbols(best.first, best.second);
    const std::set<std::size_t> affected = where[best];
    for (std::size_t w : affected) {
      auto& s = words[w];
      bool present = false;
      for (std::size_t i = 0; i + 1 < s.size(); ++i)
        if (s[i] == best.first && s[i + 1] == best.second) present = true;
      if (!present) continue;
      add_word(w, -1);
      std::vector<std::string> next;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i] == best.first && s[i + 1] == best.second) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(std::move(s[i]));
        }
      }
      s = std::move(next);
      add_word(w, +1);
    }
    where.erase(best);
    merges.push_back({best.first, best.second});
    known.insert(merged);
  }
  return BpeVocab(std::move(merges));
}

TokenSeq tokenize(std::string_view name, const BpeVocab& vocab) {
  TokenSeq seq;
  for (const auto& word : canonicalize(name)) {
    for (auto& piece : vocab.encode(word)) {
      seq.ids.push_back(vocab.id(piece));
      seq.surface.push_back(std::move(piece));
    }
  }
  return seq;
}

}  // namespace varclr
