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

// Test-only reference implementations. Each one is written independently of
// the library code it checks: plain loops, no shared helpers beyond the
// data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "varclr/common.hpp"
#include "varclr/encoders.hpp"
#include "varclr/mining.hpp"
#include "varclr/retrieval.hpp"
#include "varclr/tokenizer.hpp"

namespace oracle {

// ---- Synthetic corpus ---------------------------------------------------

// Concepts are unordered pairs of distinct stem words, each word shared by
// a handful of concepts. Each concept is
// written twice: "<noise><Stem1><Stem2>" in camelCase and
// "<stem1>_<stem2>_<noise>" in snake_case, with independently drawn noise.
struct SyntheticCorpus {
  std::vector<varclr::RenamePair> pairs;  // one per concept
  std::vector<std::string> pool;          // every surface name
};

inline const std::vector<std::string>& stem_words() {
  static const std::vector<std::string> words = {
      "user", "count", "index", "buffer", "size", "name", "path", "file", "node", "list", "item",
      "value", "key", "total", "start", "end", "offset", "length", "width", "height", "color",
      "time", "date", "price", "order", "query", "result", "error", "message", "token", "parser",
      "stream", "cache", "queue", "score", "level", "limit", "depth", "label", "state", "account",
      "address", "amount", "angle", "answer", "array", "batch", "block", "border", "bound",
      "bucket", "button", "channel", "child", "client", "column", "config", "context", "cursor",
      "data", "delay", "device", "digest", "domain", "draft", "event", "field", "filter", "flag",
      "folder", "format", "frame", "graph", "group", "handle", "hash", "header", "host", "image",
      "input", "job", "kernel", "layer", "line", "lock", "logger", "matrix", "member", "metric",
      "mode", "model", "module", "month", "number", "object", "option", "output", "owner", "packet",
      "page", "parent", "pixel", "point", "policy", "port", "prefix", "profile", "range", "rate",
      "reader", "record", "region", "request", "row", "rule", "sample", "schema", "scope",
      "section", "segment", "sender", "server", "session", "shape", "signal", "slot", "socket",
      "source", "space", "stack", "status", "step", "string", "style", "suffix", "table", "target",
      "task", "text", "thread", "timer", "title", "topic", "track", "type", "unit", "vector",
      "version", "view", "weight", "window", "worker"};
  return words;
}

inline const std::vector<std::string>& noise_words() {
  static const std::vector<std::string> words = {"get", "set", "tmp", "my",  "new", "old",
                                                 "cur", "the", "is",  "num", "val", "ptr"};
  return words;
}

inline std::string capitalize(std::string w) {
  w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

inline SyntheticCorpus synthetic_corpus(std::size_t concepts = 200, std::uint64_t seed = 7) {
  const auto& stems = stem_words();
  const auto& noise = noise_words();
  varclr::Rng rng(seed);
  std::set<std::pair<std::size_t, std::size_t>> used;
  SyntheticCorpus out;
  while (out.pairs.size() < concepts) {
    std::size_t a = rng.below(stems.size()), b = rng.below(stems.size());
    if (a == b) continue;
    if (!used.insert({std::min(a, b), std::max(a, b)}).second) continue;
    const std::string& n1 = noise[rng.below(noise.size())];
    const std::string& n2 = noise[rng.below(noise.size())];
    std::string camel = n1 + capitalize(stems[a]) + capitalize(stems[b]);
    std::string snake = stems[a] + "_" + stems[b] + "_" + n2;
    out.pool.push_back(camel);
    out.pool.push_back(snake);
    out.pairs.push_back({camel, snake, "c" + std::to_string(out.pairs.size())});
  }
  return out;
}

// ---- Identifier splitting --------------------------------------------------

// Marks a boundary before position i when any of the four rules fires on the
// raw characters, then lowercases the pieces.
inline std::vector<std::string> trace_split(const std::string& name) {
  auto lower = [](char c) { return c >= 'a' && c <= 'z'; };
  auto upper = [](char c) { return c >= 'A' && c <= 'Z'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  auto letter = [&](char c) { return lower(c) || upper(c); };
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < name.size(); ++i) {
    const char c = name[i];
    if (c == '_') {  // rule 1
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
      continue;
    }
    bool cut = false;
    if (i > 0 && name[i - 1] != '_') {
      const char p = name[i - 1];
      cut |= lower(p) && upper(c);                                           // rule 2
      cut |= (letter(p) && digit(c)) || (digit(p) && letter(c));            // rule 3
      cut |= upper(p) && upper(c) && i + 1 < name.size() && lower(name[i + 1]);  // rule 4
    }
    if (cut && !cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
    cur += upper(c) ? static_cast<char>(c - 'A' + 'a') : c;
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// ---- Spearman -------------------------------------------------------------

// Rank of x[i] = 1 + #{x < x[i]} + (#{x == x[i]} - 1) / 2.
inline std::vector<double> brute_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double y : x) {
      if (y < x[i]) less += 1;
      if (y == x[i]) equal += 1;
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

inline double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = brute_ranks(x), ry = brute_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// ---- BPE --------------------------------------------------------------------

// Recounts every adjacent pair from scratch after each merge.
inline std::vector<varclr::MergeRule> brute_bpe(const std::vector<varclr::CanonicalTokens>& corpus,
                                                std::size_t target_size, std::size_t min_freq) {
  std::map<std::string, std::size_t> word_freq;
  for (const auto& name : corpus)
    for (const auto& w : name) ++word_freq[w];
  std::vector<std::pair<std::vector<std::string>, std::size_t>> words;
  for (const auto& [w, f] : word_freq) {
    std::vector<std::string> syms;
    for (std::size_t i = 0; i < w.size(); ++i) syms.push_back((i ? "##" : "") + std::string(1, w[i]));
    words.push_back({syms, f});
  }
  std::set<std::string> tokens;
  for (char c : varclr::BpeVocab::kAlphabet) {
    tokens.insert(std::string(1, c));
    tokens.insert("##" + std::string(1, c));
  }
  std::vector<varclr::MergeRule> merges;
  while (tokens.size() < target_size) {
    std::map<std::pair<std::string, std::string>, std::size_t> counts;
    for (const auto& [syms, f] : words)
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) counts[{syms[i], syms[i + 1]}] += f;
    std::pair<std::string, std::string> best;
    std::size_t best_count = 0;
    for (const auto& [p, c] : counts)  // map order = lexicographic, so strict > keeps the smallest
      if (c > best_count) {
        best = p;
        best_count = c;
      }
    if (best_count < min_freq || best_count == 0) break;
    std::string joined = best.first + best.second.substr(best.second.rfind("##", 0) == 0 ? 2 : 0);
    merges.push_back({best.first, best.second});
    tokens.insert(joined);
    for (auto& [syms, f] : words) {
      std::vector<std::string> next;
      for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i + 1 < syms.size() && syms[i] == best.first && syms[i + 1] == best.second) {
          next.push_back(joined);
          ++i;
        } else {
          next.push_back(syms[i]);
        }
      }
      syms = std::move(next);
    }
  }
  return merges;
}

// ---- LSTM -----------------------------------------------------------------

inline double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar bidirectional LSTM: gate order i, f, g, o; per-position states
// [h_fwd; h_bwd] are averaged and projected.
inline std::vector<double> scalar_lstm(const varclr::EncoderParams& p, const std::vector<std::int32_t>& ids) {
  const auto& L = *p.lstm;
  const std::size_t h = L.hidden, d = p.embeddings.cols, n = ids.size();
  auto run = [&](const varclr::LstmDirection& dir, bool reverse) {
    std::vector<std::vector<double>> out(n, std::vector<double>(h));
    std::vector<double> hs(h, 0.0), cs(h, 0.0);
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t t = reverse ? n - 1 - step : step;
      std::vector<double> z(4 * h);
      for (std::size_t r = 0; r < 4 * h; ++r) {
        double acc = dir.bias[r];
        for (std::size_t c = 0; c < d; ++c) acc += dir.w_input(r, c) * p.embeddings(ids[t], c);
        for (std::size_t c = 0; c < h; ++c) acc += dir.w_hidden(r, c) * hs[c];
        z[r] = acc;
      }
      for (std::size_t k = 0; k < h; ++k) {
        const double i = sig(z[k]), f = sig(z[h + k]), g = std::tanh(z[2 * h + k]), o = sig(z[3 * h + k]);
        cs[k] = f * cs[k] + i * g;
        hs[k] = o * std::tanh(cs[k]);
      }
      out[t] = hs;
    }
    return out;
  };
  const auto fw = run(L.forward, false), bw = run(L.backward, true);
  std::vector<double> pooled(2 * h, 0.0);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t k = 0; k < h; ++k) {
      pooled[k] += fw[t][k] / static_cast<double>(n);
      pooled[h + k] += bw[t][k] / static_cast<double>(n);
    }
  std::vector<double> y(L.projection.rows);
  for (std::size_t r = 0; r < y.size(); ++r) {
    double acc = L.projection_bias[r];
    for (std::size_t c = 0; c < 2 * h; ++c) acc += L.projection(r, c) * pooled[c];
    y[r] = acc;
  }
  return y;
}

// ---- Finite differences ------------------------------------------------------

// Central differences of `loss` with respect to every parameter of `params`.
inline std::vector<double> finite_difference(varclr::EncoderParams& params,
                                             const std::function<double()>& loss, double step = 1e-5) {
  std::vector<double> g;
  for (auto buf : params.buffers())
    for (double& x : buf) {
      const double saved = x;
      x = saved + step;
      const double up = loss();
      x = saved - step;
      const double down = loss();
      x = saved;
      g.push_back((up - down) / (2 * step));
    }
  return g;
}

inline std::vector<double> flatten(varclr::EncoderParams& params) {
  std::vector<double> out;
  for (auto buf : params.buffers()) out.insert(out.end(), buf.begin(), buf.end());
  return out;
}

// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  return denom == 0 ? 0.0 : std::sqrt(diff) / denom;
}

// ---- Retrieval -----------------------------------------------------------

// Cosine against every row, stable-sorted descending. Both sides are
// scaled to unit length before the dot product so exact ties (parallel
// vectors) compare equal.
inline std::vector<std::size_t> full_sort_ranking(const std::vector<std::vector<double>>& pool,
                                                  const std::vector<double>& query,
                                                  long long exclude = -1) {
  auto unit = [](std::vector<double> v) {
    double ss = 0;
    for (double x : v) ss += x * x;
    const double n = std::sqrt(ss);
    for (double& x : v) x /= n;
    return v;
  };
  auto cosine = [&](const std::vector<double>& a, const std::vector<double>& b) {
    const auto ua = unit(a), ub = unit(b);
    double s = 0;
    for (std::size_t i = 0; i < ua.size(); ++i) s += ua[i] * ub[i];
    return s;
  };
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (static_cast<long long>(i) != exclude) scored.push_back({cosine(pool[i], query), i});
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> order;
  for (const auto& s : scored) order.push_back(s.second);
  return order;
}

}  // namespace oracle
