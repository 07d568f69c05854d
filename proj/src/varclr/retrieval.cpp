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

#include "varclr/retrieval.hpp"

#include <algorithm>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "varclr/encoders.hpp"
#include "varclr/io.hpp"

namespace varclr {
namespace {

constexpr int kIndexVersion = 1;

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool valid_identifier(std::string_view s) {
  if (s.empty() || is_digit(s[0])) return false;
  bool alnum = false;
  for (char c : s) {
    if (!(is_alpha(c) || is_digit(c) || c == '_')) return false;
    alnum |= c != '_';
  }
  return alnum;
}

char match_case(char like, char lower) {
  return (like >= 'A' && like <= 'Z') ? static_cast<char>(lower - 'a' + 'A') : lower;
}

char lower_of(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

Embedder checkpoint_embedder(const Checkpoint& model) {
  return [&model](std::string_view name) { return model.embed(name); };
}

SearchIndex::SearchIndex(std::vector<std::string> names, Matrix vectors, std::uint64_t fingerprint)
    : names_(std::move(names)), vectors_(std::move(vectors)), fingerprint_(fingerprint) {
  if (names_.size() != vectors_.rows) throw Error(ErrorCode::kShape, "index names and vectors differ in count");
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (!lookup_.emplace(names_[i], i).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate name '" + names_[i] + "' in index");
}

std::optional<std::size_t> SearchIndex::find(std::string_view name) const {
  auto it = lookup_.find(std::string(name));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::string SearchIndex::serialize(std::string_view checkpoint_path) const {
  std::string out = "varclr-index " + std::to_string(kIndexVersion) + " " + std::to_string(size()) + " " +
                    std::to_string(dim()) + " " + hex64(fingerprint_) + "\n";
  out += "checkpoint " + std::string(checkpoint_path) + "\n";
  for (std::size_t i = 0; i < size(); ++i) {
    out += names_[i];
    out.push_back('\t');
    const auto row = vectors_.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out.push_back(' ');
      out += format_exact(row[k]);
    }
    out.push_back('\n');
  }
  return out;
}

SearchIndex SearchIndex::parse(std::string_view text, std::string* checkpoint_path) {
  const auto ls = io::lines(text);
  if (ls.size() < 2) throw Error(ErrorCode::kParse, "index: missing header");
  const auto h = io::fields(ls[0]);
  if (h.size() != 5 || h[0] != "varclr-index") throw Error(ErrorCode::kParse, "index line 1: bad header");
  if (parse_int(h[1]) != kIndexVersion) throw Error(ErrorCode::kParse, "index: unsupported version");
  const auto count = static_cast<std::size_t>(parse_int(h[2]));
  const auto dim = static_cast<std::size_t>(parse_int(h[3]));
  std::uint64_t fp = 0;
  try {
    fp = std::stoull(std::string(h[4]), nullptr, 16);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "index line 1: bad fingerprint");
  }
  if (!ls[1].starts_with("checkpoint")) throw Error(ErrorCode::kParse, "index line 2: expected checkpoint");
  if (checkpoint_path) *checkpoint_path = std::string(io::trim(ls[1].substr(std::string_view("checkpoint").size())));
  if (ls.size() - 2 != count) throw Error(ErrorCode::kParse, "index: row count does not match header");

  std::vector<std::string> names;
  Matrix vectors(count, dim);
  for (std::size_t i = 0; i < count; ++i) {
    const auto tab = ls[i + 2].find('\t');
    if (tab == std::string_view::npos) throw Error(ErrorCode::kParse, "index line " + std::to_string(i + 3) + ": no tab");
    names.emplace_back(ls[i + 2].substr(0, tab));
    const auto vals = io::fields(ls[i + 2].substr(tab + 1));
    if (vals.size() != dim)
      throw Error(ErrorCode::kParse, "index line " + std::to_string(i + 3) + ": wrong dimension");
    for (std::size_t k = 0; k < dim; ++k) vectors(i, k) = parse_double(vals[k]);
  }
  return SearchIndex(std::move(names), std::move(vectors), fp);
}

IndexBuild build_index(std::span<const std::string> names, const Embedder& embed, std::uint64_t fingerprint,
                       std::size_t workers) {
  IndexBuild out;
  std::vector<std::string> unique;
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (seen.insert(n).second)
      unique.push_back(n);
    else
      ++out.duplicates;
  }

  std::vector<std::optional<Vector>> encoded(unique.size());
  std::vector<std::exception_ptr> errors;
  auto work = [&](std::size_t begin, std::size_t end, std::exception_ptr& err) {
    try {
      for (std::size_t i = begin; i < end; ++i) {
        try {
          encoded[i] = l2_normalize(embed(unique[i]));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kInvalidName && e.code() != ErrorCode::kNumeric) throw;
        }
      }
    } catch (...) {
      err = std::current_exception();
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, unique.size()));
  errors.resize(workers);
  if (workers == 1) {
    work(0, unique.size(), errors[0]);
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (unique.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = std::min(unique.size(), w * chunk), e = std::min(unique.size(), b + chunk);
      threads.emplace_back(work, b, e, std::ref(errors[w]));
    }
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<std::string> kept;
  std::size_t dim = 0;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (!encoded[i]) {
      ++out.dropped;
      continue;
    }
    dim = encoded[i]->size();
    kept.push_back(unique[i]);
  }
  if (kept.empty()) throw Error(ErrorCode::kInvalidArgument, "no pool names could be encoded");
  Matrix vectors(kept.size(), dim);
  std::size_t r = 0;
  for (auto& v : encoded)
    if (v) {
      if (v->size() != dim) throw Error(ErrorCode::kShape, "embedder returned vectors of differing size");
      std::copy(v->begin(), v->end(), vectors.row(r++).begin());
    }
  out.index = SearchIndex(std::move(kept), std::move(vectors), fingerprint);
  return out;
}

std::vector<SearchHit> search(const SearchIndex& index, std::span<const double> query, std::size_t k,
                              std::optional<std::size_t> exclude) {
  if (query.size() != index.dim()) throw Error(ErrorCode::kShape, "query dimension does not match index");
  const std::size_t pool = index.size() - (exclude ? 1 : 0);
  if (k < 1 || k > pool)
    throw Error(ErrorCode::kInvalidArgument, "k=" + std::to_string(k) + " outside [1, " + std::to_string(pool) + "]");
  const Vector q = l2_normalize(query);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i)
    if (i != exclude) scored.emplace_back(dot(index.vectors().row(i), q), i);
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<SearchHit> hits;
  for (std::size_t i = 0; i < k; ++i) hits.push_back({index.names()[scored[i].second], scored[i].first});
  return hits;
}

std::vector<SearchHit> search(const SearchIndex& index, const Embedder& embed, std::string_view query, std::size_t k,
                              bool exclude_query) {
  return search(index, embed(query), k, exclude_query ? index.find(query) : std::nullopt);
}

std::size_t target_rank(const SearchIndex& index, std::span<const double> query, std::size_t target,
                        std::optional<std::size_t> exclude) {
  const Vector q = l2_normalize(query);
  const double ts = dot(index.vectors().row(target), q);
  std::size_t rank = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (i == target || i == exclude) continue;
    const double s = dot(index.vectors().row(i), q);
    if (s > ts || (s == ts && i < target)) ++rank;
  }
  return rank;
}

HitCurve hit_at_k(const SearchIndex& index, std::span<const QueryTarget> queries, std::span<const std::size_t> ks,
                  const Embedder& embed, bool exclude_query) {
  HitCurve curve;
  curve.ks.assign(ks.begin(), ks.end());
  std::sort(curve.ks.begin(), curve.ks.end());
  curve.ks.erase(std::unique(curve.ks.begin(), curve.ks.end()), curve.ks.end());
  curve.hits.assign(curve.ks.size(), 0.0);
  curve.queries = queries.size();
  if (queries.empty()) return curve;
  std::vector<std::size_t> counts(curve.ks.size(), 0);
  for (const auto& qt : queries) {
    const auto target = index.find(qt.target);
    if (!target) throw Error(ErrorCode::kInvalidArgument, "target '" + qt.target + "' is not in the index");
    std::optional<std::size_t> exclude;
    if (exclude_query) {
      exclude = index.find(qt.query);
      if (exclude == target) exclude.reset();
    }
    const std::size_t rank = target_rank(index, embed(qt.query), *target, exclude);
    for (std::size_t i = 0; i < curve.ks.size(); ++i) counts[i] += rank < curve.ks[i];
  }
  for (std::size_t i = 0; i < counts.size(); ++i)
    curve.hits[i] = static_cast<double>(counts[i]) / static_cast<double>(queries.size());
  return curve;
}

std::vector<QueryTarget> filter_similar_pairs(std::span<const BenchmarkPair> pairs, double threshold,
                                              bool both_directions) {
  std::vector<QueryTarget> out;
  for (const auto& p : pairs) {
    if (!p.similarity || !(*p.similarity > threshold)) continue;
    out.push_back({p.left, p.right});
    if (both_directions) out.push_back({p.right, p.left});
  }
  return out;
}

std::string_view keyboard_neighbors(char lower) {
  switch (lower) {
    case 'q': return "wa";
    case 'w': return "qeas";
    case 'e': return "wrsd";
    case 'r': return "etdf";
    case 't': return "ryfg";
    case 'y': return "tugh";
    case 'u': return "yihj";
    case 'i': return "uojk";
    case 'o': return "ipkl";
    case 'p': return "ol";
    case 'a': return "qwsz";
    case 's': return "weadzx";
    case 'd': return "ersfxc";
    case 'f': return "rtdgcv";
    case 'g': return "tyfhvb";
    case 'h': return "yugjbn";
    case 'j': return "uihknm";
    case 'k': return "iojlm";
    case 'l': return "opk";
    case 'z': return "asx";
    case 'x': return "sdzc";
    case 'c': return "dfxv";
    case 'v': return "fgcb";
    case 'b': return "ghvn";
    case 'n': return "hjbm";
    case 'm': return "jkn";
    default: return "";
  }
}

std::optional<std::string> apply_typo(std::string_view name, TypoEdit edit, std::size_t pos, Rng& rng) {
  if (pos >= name.size() || !is_alpha(name[pos])) return std::nullopt;
  std::string out(name);
  const auto nb = keyboard_neighbors(lower_of(name[pos]));
  switch (edit) {
    case TypoEdit::kSubstitute:
      out[pos] = match_case(name[pos], nb[rng.below(nb.size())]);
      break;
    case TypoEdit::kInsert:
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos) + 1, match_case(name[pos], nb[rng.below(nb.size())]));
      break;
    case TypoEdit::kDelete:
      out.erase(pos, 1);
      break;
    case TypoEdit::kTranspose:
      if (pos + 1 >= name.size() || !is_alpha(name[pos + 1])) return std::nullopt;
      std::swap(out[pos], out[pos + 1]);
      break;
  }
  if (out == name || !valid_identifier(out)) return std::nullopt;
  return out;
}

std::vector<TypoPair> make_typos(std::span<const std::string> names, std::size_t count, std::uint64_t seed) {
  if (count > names.size())
    throw Error(ErrorCode::kInvalidArgument, "cannot sample " + std::to_string(count) + " typos from " +
                                                 std::to_string(names.size()) + " names");
  Rng rng(seed);
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }

  std::vector<TypoPair> out;
  for (std::size_t s = 0; s < count; ++s) {
    const std::string& name = names[order[s]];
    std::vector<std::size_t> alpha;
    for (std::size_t i = 0; i < name.size(); ++i)
      if (is_alpha(name[i])) alpha.push_back(i);
    if (alpha.empty()) throw Error(ErrorCode::kInvalidName, "name '" + name + "' has no letters to misspell");

    std::optional<std::string> typo;
    for (int attempt = 0; attempt < 16 && !typo; ++attempt) {
      const auto edit = static_cast<TypoEdit>(rng.below(4));
      typo = apply_typo(name, edit, alpha[rng.below(alpha.size())], rng);
    }
    // Substituting a letter with a neighbouring letter always yields a new
    // valid identifier.
    if (!typo) typo = apply_typo(name, TypoEdit::kSubstitute, alpha[rng.below(alpha.size())], rng);
    out.push_back({std::move(*typo), name});
  }
  return out;
}

std::vector<std::size_t> parse_ks(std::string_view csv) {
  std::vector<std::size_t> ks;
  for (auto part : io::split(csv, ',')) {
    const long long k = parse_int(io::trim(part));
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "cutoffs must be >= 1");
    ks.push_back(static_cast<std::size_t>(k));
  }
  return ks;
}

std::string format_curve_csv(const HitCurve& curve) {
  std::string out = "k,hit_rate\n";
  for (std::size_t i = 0; i < curve.ks.size(); ++i)
    out += std::to_string(curve.ks[i]) + "," + format_number(curve.hits[i]) + "\n";
  return out;
}

}  // namespace varclr
