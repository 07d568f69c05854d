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

#include <string>
#include <string_view>
#include <vector>

namespace varclr::io {

std::string read_file(const std::string& path);

// Writes to "<path>.tmp" then renames over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);

// Splits on '\n', dropping a trailing '\r' from each line. A final empty line
// produced by a terminating newline is not returned.
std::vector<std::string_view> lines(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char delim);

std::string_view trim(std::string_view s);

// Whitespace-delimited fields.
std::vector<std::string_view> fields(std::string_view line);

// One identifier per non-blank line, surrounding whitespace ignored.
std::vector<std::string> read_name_list(const std::string& path);

}  // namespace varclr::io
