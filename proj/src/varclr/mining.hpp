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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace varclr {

struct Hunk {
  std::string path;
  std::vector<std::string> removed;
  std::vector<std::string> added;
};

struct CommitDiff {
  std::string commit_id;
  std::vector<Hunk> hunks;

  std::size_t changed_lines() const;
};

struct RenamePair {
  std::string before;
  std::string after;
  std::string source_commit;

  friend bool operator==(const RenamePair&, const RenamePair&) = default;
};

// Parses unified diff text. A line "commit <id>" starts a new commit (as in
// `git log -p`); text without such lines is one commit named
// `default_commit_id`. Headers, commit messages and "diff --git"/"index"
// lines are skipped. Hunk bodies are consumed according to the counts in
// their "@@ -a,b +c,d @@" header.
//
// Throws Error(kParse) naming the 1-based line for a "+++" without a
// preceding "---", a "---" not followed by "+++", a malformed "@@" header,
// change lines with no "@@" header, or a truncated hunk body.
std::vector<CommitDiff> parse_unified_diff(std::string_view text,
                                           std::string_view default_commit_id = "");

inline constexpr std::size_t kDefaultMaxChangedLines = 6;

// A rename is reported when the commit changes fewer than `max_lines` lines
// (removed + added, whole commit) and exactly one identifier t_old can be
// replaced everywhere by one identifier t_new to turn every hunk's removed
// text into its added text.
std::optional<RenamePair> extract_rename(const CommitDiff& diff,
                                         std::size_t max_lines = kDefaultMaxChangedLines);

// Replaces every whole-identifier occurrence of `from` in `line` with `to`.
std::string replace_identifier(std::string_view line, std::string_view from, std::string_view to);

struct MiningResult {
  std::vector<RenamePair> pairs;
  std::size_t commits = 0;
  // One "<source>: <message>" entry per input that failed to parse.
  std::vector<std::string> skipped;
};

// Extracts renames and keeps the first occurrence of each (before, after).
std::vector<RenamePair> mine_corpus(std::span<const CommitDiff> diffs,
                                    std::size_t max_lines = kDefaultMaxChangedLines);

// Mines every regular file under `dir` (sorted by path). Files that fail to
// parse are skipped and reported.
MiningResult mine_directory(const std::string& dir, std::size_t max_lines = kDefaultMaxChangedLines);

// TSV: "before<TAB>after<TAB>commit_id" per line.
std::string write_pairs_tsv(std::span<const RenamePair> pairs);

// Accepts two or three tab-separated columns; blank lines are skipped.
std::vector<RenamePair> parse_pairs_tsv(std::string_view text);

}  // namespace varclr
