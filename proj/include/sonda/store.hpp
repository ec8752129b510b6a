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

#ifndef SONDA_STORE_HPP_
#define SONDA_STORE_HPP_

/// \file
/// Directory-backed session store.
///
/// Layout under the store root:
///
///     sessions/<session_id>.csv   one row per trial record
///     index.jsonl                 one JSON object per stored session
///     .lock                       flock(2) target serializing writers
///
/// A session file is written to a hidden temporary in `sessions/`, fsynced
/// and renamed into place; only then is its index line appended and
/// fsynced. A crash can therefore leave a session file without an index
/// line (recoverable with rebuild_index) but never an index line without a
/// file. Session files are immutable once renamed, so readers take no lock.

#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sonda/runtime.hpp"
#include "sonda/timestamp.hpp"

namespace sonda::store {

enum class ErrorKind { duplicate_session, not_found, parse_error, io_error, invalid_session_id };

class StoreError : public std::runtime_error {
 public:
  StoreError(ErrorKind kind, const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), kind_(kind), line_(line) {}
  ErrorKind kind() const noexcept { return kind_; }
  /// 1-based line of a malformed session file row, 0 otherwise.
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::size_t line_;
};

struct IndexEntry {
  std::string session_id;
  std::string training_id;
  std::string participant_id;
  Timestamp finished_at{};
  /// Relative to the store root.
  std::string path;
  Timestamp started_at{};

  bool operator==(const IndexEntry&) const = default;
};

struct Filter {
  std::optional<std::string> training_id;
  std::optional<std::string> participant_id;
};

/// Column order of session files.
const std::vector<std::string>& session_columns();

/// Session file contents. Shared by the store and `sonda run` so both emit
/// identical bytes for the same result.
std::string session_csv(const runtime::SessionResult& result);

/// Inverse of session_csv for files with at least one record. Throws
/// StoreError(parse_error) naming the offending line.
runtime::SessionResult parse_session_csv(std::string_view text);

/// Letters, digits, '-', '_' and '.', not starting with '.'.
bool is_valid_session_id(std::string_view id);

class Store {
 public:
  /// Creates `root` and `root/sessions` if needed.
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Durable once this returns. Returns the session file path.
  std::filesystem::path put_session(const runtime::SessionResult& result);

  runtime::SessionResult load_session(std::string_view session_id) const;

  bool contains(std::string_view session_id) const;

  /// Ordered by finished_at, then session_id.
  std::vector<IndexEntry> list_sessions(const Filter& filter = {}) const;

  /// Index entries reconstructed from the files in `sessions/`, same order
  /// as list_sessions. Sessions with no records cannot be reconstructed
  /// beyond their id and are skipped.
  std::vector<IndexEntry> rebuild_index() const;

 private:
  std::vector<IndexEntry> read_index() const;
  std::filesystem::path session_path(std::string_view session_id) const;

  std::filesystem::path root_;
  mutable std::mutex mutex_;
};

}  // namespace sonda::store

#endif  // SONDA_STORE_HPP_
