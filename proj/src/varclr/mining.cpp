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

#include "varclr/mining.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <utility>

#include "varclr/common.hpp"
#include "varclr/io.hpp"

namespace varclr {
namespace {

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

struct Segment {
  std::string_view text;
  bool identifier;
};

// Identifier = maximal [A-Za-z0-9_] run not starting with a digit. Everything
// else (punctuation runs, numeric literals) is opaque text.
std::vector<Segment> lex(std::string_view text) {
  std::vector<Segment> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i;
    if (is_word_char(text[i])) {
      while (j < text.size() && is_word_char(text[j])) ++j;
      const bool ident = !(text[i] >= '0' && text[i] <= '9');
      out.push_back({text.substr(i, j - i), ident});
    } else {
      while (j < text.size() && !is_word_char(text[j])) ++j;
      out.push_back({text.substr(i, j - i), false});
    }
    i = j;
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& ls) {
  std::string out;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (i) out.push_back('\n');
    out += ls[i];
  }
  return out;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + msg);
}

// "-a,b" or "+c,d"; a missing count means 1.
std::size_t parse_range_count(std::string_view range, char sign, std::size_t line) {
  if (range.empty() || range[0] != sign) parse_error(line, "malformed hunk header");
  range.remove_prefix(1);
  auto comma = range.find(',');
  try {
    if (comma == std::string_view::npos) {
      parse_int(range);
      return 1;
    }
    parse_int(range.substr(0, comma));
    const long long n = parse_int(range.substr(comma + 1));
    if (n < 0) parse_error(line, "negative hunk length");
    return static_cast<std::size_t>(n);
  } catch (const Error&) {
    parse_error(line, "malformed hunk header");
  }
}

std::string_view header_path(std::string_view line) {
  std::string_view p = line.substr(4);
  auto tab = p.find('\t');
  if (tab != std::string_view::npos) p = p.substr(0, tab);
  return io::trim(p);
}

bool has_alnum(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_word_char(c) && c != '_'; });
}

}  // namespace

std::size_t CommitDiff::changed_lines() const {
  std::size_t n = 0;
  for (const auto& h : hunks) n += h.removed.size() + h.added.size();
  return n;
}

std::vector<CommitDiff> parse_unified_diff(std::string_view text, std::string_view default_commit_id) {
  std::vector<CommitDiff> commits;
  auto current = [&]() -> CommitDiff& {
    if (commits.empty()) commits.push_back({std::string(default_commit_id), {}});
    return commits.back();
  };

  bool in_file = false;
  bool pending_old = false;
  std::string old_path;
  std::string path;
  bool in_hunk = false;
  std::size_t old_left = 0, new_left = 0;

  const auto ls = io::lines(text);
  for (std::size_t n = 0; n < ls.size(); ++n) {
    const std::string_view line = ls[n];
    const std::size_t lineno = n + 1;

    if (in_hunk) {
      Hunk& h = current().hunks.back();
      if (line.starts_with('\\')) continue;
      const char tag = line.empty() ? ' ' : line[0];
      if (tag == ' ') {
        if (old_left == 0 || new_left == 0) parse_error(lineno, "hunk longer than its header");
        --old_left;
        --new_left;
      } else if (tag == '-') {
        if (old_left == 0) parse_error(lineno, "hunk longer than its header");
        h.removed.emplace_back(line.substr(1));
        --old_left;
      } else if (tag == '+') {
        if (new_left == 0) parse_error(lineno, "hunk longer than its header");
        h.added.emplace_back(line.substr(1));
        --new_left;
      } else {
        parse_error(lineno, "truncated hunk");
      }
      if (old_left == 0 && new_left == 0) in_hunk = false;
      continue;
    }

    if (pending_old) {
      if (!line.starts_with("+++ ")) parse_error(lineno, "expected '+++' after '---'");
      pending_old = false;
      std::string_view p = header_path(line);
      path = p == "/dev/null" ? old_path : std::string(p);
      in_file = true;
      continue;
    }

    if (line.starts_with("commit ")) {
      auto f = io::fields(line);
      commits.push_back({f.size() > 1 ? std::string(f[1]) : std::string(), {}});
      in_file = false;
      continue;
    }
    if (line.starts_with("diff ")) {
      in_file = false;
      continue;
    }
    if (line.starts_with("--- ")) {
      pending_old = true;
      old_path = std::string(header_path(line));
      continue;
    }
    if (line.starts_with("+++ ")) parse_error(lineno, "'+++' without preceding '---'");
    if (line.starts_with("@@")) {
      if (!in_file) parse_error(lineno, "hunk header outside a file section");
      auto f = io::fields(line);
      if (f.size() < 4 || f[0] != "@@" || f[3] != "@@") parse_error(lineno, "malformed hunk header");
      old_left = parse_range_count(f[1], '-', lineno);
      new_left = parse_range_count(f[2], '+', lineno);
      current().hunks.push_back({path, {}, {}});
      in_hunk = old_left > 0 || new_left > 0;
      continue;
    }
    if (in_file && (line.starts_with('+') || line.starts_with('-') || line.starts_with(' ')))
      parse_error(lineno, "change line without '@@' header");
  }
  if (pending_old) parse_error(ls.size(), "expected '+++' after '---'");
  if (in_hunk) parse_error(ls.size(), "truncated hunk");
  return commits;
}

std::string replace_identifier(std::string_view line, std::string_view from, std::string_view to) {
  std::string out;
  for (const auto& seg : lex(line)) out.append(seg.identifier && seg.text == from ? to : seg.text);
  return out;
}

std::optional<RenamePair> extract_rename(const CommitDiff& diff, std::size_t max_lines) {
  const std::size_t total = diff.changed_lines();
  if (total == 0 || total >= max_lines) return std::nullopt;

  std::string_view from, to;
  std::set<std::string_view> kept;
  std::vector<std::pair<std::string, std::string>> texts;
  for (const auto& h : diff.hunks) texts.emplace_back(join_lines(h.removed), join_lines(h.added));

  for (const auto& [removed, added] : texts) {
    const auto a = lex(removed);
    const auto b = lex(added);
    if (a.size() != b.size()) return std::nullopt;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].identifier != b[i].identifier) return std::nullopt;
      if (a[i].text == b[i].text) {
        if (a[i].identifier) kept.insert(a[i].text);
        continue;
      }
      if (!a[i].identifier) return std::nullopt;
      if (from.empty()) {
        from = a[i].text;
        to = b[i].text;
      } else if (a[i].text != from || b[i].text != to) {
        return std::nullopt;
      }
    }
  }
  if (from.empty() || kept.contains(from)) return std::nullopt;
  if (!has_alnum(from) || !has_alnum(to)) return std::nullopt;

  for (const auto& h : diff.hunks) {
    if (h.removed.size() != h.added.size()) {
      if (replace_identifier(join_lines(h.removed), from, to) != join_lines(h.added)) return std::nullopt;
      continue;
    }
    for (std::size_t i = 0; i < h.removed.size(); ++i)
      if (replace_identifier(h.removed[i], from, to) != h.added[i]) return std::nullopt;
  }
  return RenamePair{std::string(from), std::string(to), diff.commit_id};
}

std::vector<RenamePair> mine_corpus(std::span<const CommitDiff> diffs, std::size_t max_lines) {
  std::vector<RenamePair> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& d : diffs) {
    auto pair = extract_rename(d, max_lines);
    if (!pair) continue;
    if (seen.insert({pair->before, pair->after}).second) out.push_back(std::move(*pair));
  }
  return out;
}

MiningResult mine_directory(const std::string& dir, std::size_t max_lines) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::kIo, "not a directory: '" + dir + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  MiningResult result;
  std::vector<CommitDiff> commits;
  for (const auto& file : files) {
    const std::string rel = fs::relative(file, dir).generic_string();
    try {
      auto parsed = parse_unified_diff(io::read_file(file.string()), rel);
      for (auto& c : parsed) commits.push_back(std::move(c));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParse) throw;
      result.skipped.push_back(rel + ": " + e.what());
    }
  }
  result.commits = commits.size();
  result.pairs = mine_corpus(commits, max_lines);
  return result;
}

std::string write_pairs_tsv(std::span<const RenamePair> pairs) {
  std::string out;
  for (const auto& p : pairs) out += p.before + "\t" + p.after + "\t" + p.source_commit + "\n";
  return out;
}

std::vector<RenamePair> parse_pairs_tsv(std::string_view text) {
  std::vector<RenamePair> out;
  const auto ls = io::lines(text);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (io::trim(ls[i]).empty()) continue;
    auto cols = io::split(ls[i], '\t');
    if (cols.size() < 2 || cols.size() > 3)
      throw Error(ErrorCode::kParse, "pairs line " + std::to_string(i + 1) +
                                         ": expected 2 or 3 tab-separated columns");
    out.push_back({std::string(io::trim(cols[0])), std::string(io::trim(cols[1])),
                   cols.size() == 3 ? std::string(io::trim(cols[2])) : std::string()});
  }
  return out;
}

}  // namespace varclr
