// Copyright 2026 The Sonda Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SONDA_CSV_HPP_
#define SONDA_CSV_HPP_

/// \file
/// RFC 4180 reading and writing shared by condition tables, session files,
/// event scripts and reports.
///
/// The reader accepts LF or CRLF record terminators, quoted fields with
/// embedded commas, quotes ("") and line breaks. Whitespace inside fields is
/// preserved. The writer always emits LF and quotes a field only when it
/// contains a comma, a quote, CR or LF.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sonda::csv {

struct Record {
  std::vector<std::string> fields;
  /// 1-based line on which the record starts.
  std::size_t line = 0;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Splits `text` into records. A trailing line terminator does not start an
/// extra record; a completely empty input yields no records.
std::vector<Record> parse(std::string_view text);

std::string escape_field(std::string_view field);

/// One record terminated by '\n'.
std::string format_record(const std::vector<std::string>& fields);

}  // namespace sonda::csv

#endif  // SONDA_CSV_HPP_
