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

#include "sonda/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sonda/csv.hpp"

namespace sonda::store {

namespace {

[[noreturn]] void io_failure(const std::string& what) {
  throw StoreError(ErrorKind::io_error, what + ": " + std::strerror(errno));
}

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }
  void close_or_throw(const std::string& what) {
    const int fd = fd_;
    fd_ = -1;
    if (::close(fd) != 0) io_failure(what);
  }

 private:
  int fd_;
};

void write_all(int fd, std::string_view data, const std::string& what) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure(what);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void fsync_dir(const std::filesystem::path& dir) {
  Fd fd(::open(dir.c_str(), O_RDONLY | O_DIRECTORY));
  if (fd.get() < 0) io_failure("open " + dir.string());
  if (::fsync(fd.get()) != 0) io_failure("fsync " + dir.string());
}

// Holds an exclusive flock(2) for the lifetime of the object.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path)
      : fd_(::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644)) {
    if (fd_.get() < 0) io_failure("open " + path.string());
    while (::flock(fd_.get(), LOCK_EX) != 0) {
      if (errno != EINTR) io_failure("flock " + path.string());
    }
  }
  ~FileLock() { ::flock(fd_.get(), LOCK_UN); }

 private:
  Fd fd_;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError(ErrorKind::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string index_line(const IndexEntry& e) {
  nlohmann::ordered_json j;
  j["session_id"] = e.session_id;
  j["training_id"] = e.training_id;
  j["participant_id"] = e.participant_id;
  j["finished_at"] = format_timestamp(e.finished_at);
  j["path"] = e.path;
  j["started_at"] = format_timestamp(e.started_at);
  return j.dump() + "\n";
}

std::optional<IndexEntry> parse_index_line(std::string_view line) {
  auto j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  try {
    IndexEntry e;
    e.session_id = j.at("session_id").get<std::string>();
    e.training_id = j.at("training_id").get<std::string>();
    e.participant_id = j.at("participant_id").get<std::string>();
    e.path = j.at("path").get<std::string>();
    auto finished = parse_timestamp(j.at("finished_at").get<std::string>());
    if (!finished) return std::nullopt;
    e.finished_at = *finished;
    e.started_at = *finished;
    if (j.contains("started_at")) {
      if (auto started = parse_timestamp(j["started_at"].get<std::string>())) e.started_at = *started;
    }
    return e;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

void sort_entries(std::vector<IndexEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const IndexEntry& a, const IndexEntry& b) {
    if (a.finished_at != b.finished_at) return a.finished_at < b.finished_at;
    return a.session_id < b.session_id;
  });
}

template <typename Int>
bool parse_uint(const std::string& text, Int& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

const std::vector<std::string>& session_columns() {
  static const std::vector<std::string> kColumns{
      "participant_id", "session_id",     "training_id",    "loop_name",      "rep_index",
      "row_index",      "routine_name",   "stimulus_image", "stimulus_audio", "correct_answer",
      "response",       "outcome",        "rt_ms",          "started_at",     "finished_at"};
  return kColumns;
}

std::string session_csv(const runtime::SessionResult& result) {
  std::string out = csv::format_record(session_columns());
  const auto& cfg = result.config;
  const std::string started = format_timestamp(cfg.started_at);
  const std::string finished = format_timestamp(result.finished_at);
  for (const auto& r : result.records) {
    out += csv::format_record({cfg.participant_id, cfg.session_id, cfg.training_id, r.loop_name,
                               std::to_string(r.rep_index), std::to_string(r.row_index),
                               r.routine_name, r.stimulus_image, r.stimulus_audio,
                               r.correct_answer, r.response, std::string(to_string(r.outcome)),
                               r.rt_ms ? std::to_string(*r.rt_ms) : std::string(), started,
                               finished});
  }
  return out;
}

runtime::SessionResult parse_session_csv(std::string_view text) {
  std::vector<csv::Record> records;
  try {
    records = csv::parse(text);
  } catch (const csv::SyntaxError& e) {
    throw StoreError(ErrorKind::parse_error, e.what(), e.line());
  }
  if (records.empty() || records.front().fields != session_columns()) {
    throw StoreError(ErrorKind::parse_error, "line 1: unexpected header", 1);
  }
  if (records.size() == 1) {
    throw StoreError(ErrorKind::parse_error, "session file has no records", 1);
  }

  runtime::SessionResult result;
  const std::size_t width = session_columns().size();
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& rec = records[k];
    auto fail = [&](const std::string& what) -> void {
      throw StoreError(ErrorKind::parse_error, "line " + std::to_string(rec.line) + ": " + what,
                       rec.line);
    };
    if (rec.fields.size() != width) {
      fail("expected " + std::to_string(width) + " fields, found " +
           std::to_string(rec.fields.size()));
    }
    const auto& f = rec.fields;
    auto started = parse_timestamp(f[13]);
    auto finished = parse_timestamp(f[14]);
    if (!started || !finished) fail("bad timestamp");
    if (k == 1) {
      result.config.participant_id = f[0];
      result.config.session_id = f[1];
      result.config.training_id = f[2];
      result.config.started_at = *started;
      result.finished_at = *finished;
    } else if (f[0] != result.config.participant_id || f[1] != result.config.session_id ||
               f[2] != result.config.training_id || *started != result.config.started_at ||
               *finished != result.finished_at) {
      fail("session columns differ from the first row");
    }

    runtime::TrialRecord r;
    r.loop_name = f[3];
    if (!parse_uint(f[4], r.rep_index)) fail("bad rep_index");
    if (!parse_uint(f[5], r.row_index)) fail("bad row_index");
    r.routine_name = f[6];
    r.stimulus_image = f[7];
    r.stimulus_audio = f[8];
    r.correct_answer = f[9];
    r.response = f[10];
    auto outcome = runtime::parse_outcome(f[11]);
    if (!outcome) fail("bad outcome '" + f[11] + "'");
    r.outcome = *outcome;
    if (!f[12].empty()) {
      std::int64_t rt = 0;
      if (!parse_uint(f[12], rt)) fail("bad rt_ms");
      r.rt_ms = rt;
    }
    result.records.push_back(std::move(r));
  }
  return result;
}

bool is_valid_session_id(std::string_view id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '_' || c == '.';
  });
}

Store::Store(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_ / "sessions", ec);
  if (ec) throw StoreError(ErrorKind::io_error, "cannot create " + root_.string() + ": " + ec.message());
}

std::filesystem::path Store::session_path(std::string_view session_id) const {
  return root_ / "sessions" / (std::string(session_id) + ".csv");
}

std::vector<IndexEntry> Store::read_index() const {
  std::vector<IndexEntry> entries;
  std::ifstream in(root_ / "index.jsonl", std::ios::binary);
  if (!in) return entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // A torn final line from an interrupted append is skipped.
    if (auto e = parse_index_line(line)) entries.push_back(std::move(*e));
  }
  return entries;
}

bool Store::contains(std::string_view session_id) const {
  const auto entries = read_index();
  return std::any_of(entries.begin(), entries.end(),
                     [&](const IndexEntry& e) { return e.session_id == session_id; });
}

std::filesystem::path Store::put_session(const runtime::SessionResult& result) {
  const std::string& id = result.config.session_id;
  if (!is_valid_session_id(id)) {
    throw StoreError(ErrorKind::invalid_session_id, "invalid session id '" + id + "'");
  }
  std::lock_guard<std::mutex> guard(mutex_);
  FileLock lock(root_ / ".lock");

  const std::filesystem::path final_path = session_path(id);
  std::error_code ec;
  if (contains(id) || std::filesystem::exists(final_path, ec)) {
    throw StoreError(ErrorKind::duplicate_session, "session '" + id + "' already stored");
  }

  const std::filesystem::path sessions_dir = root_ / "sessions";
  const std::filesystem::path tmp_path =
      sessions_dir / ("." + id + ".csv.tmp-" + std::to_string(::getpid()));
  {
    Fd fd(::open(tmp_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644));
    if (fd.get() < 0) io_failure("open " + tmp_path.string());
    write_all(fd.get(), session_csv(result), "write " + tmp_path.string());
    if (::fsync(fd.get()) != 0) io_failure("fsync " + tmp_path.string());
    fd.close_or_throw("close " + tmp_path.string());
  }
  if (::rename(tmp_path.c_str(), final_path.c_str()) != 0) {
    const int saved = errno;
    ::unlink(tmp_path.c_str());
    errno = saved;
    io_failure("rename " + tmp_path.string());
  }
  fsync_dir(sessions_dir);

  IndexEntry entry;
  entry.session_id = id;
  entry.training_id = result.config.training_id;
  entry.participant_id = result.config.participant_id;
  entry.finished_at = result.finished_at;
  entry.started_at = result.config.started_at;
  entry.path = "sessions/" + id + ".csv";
  {
    const std::filesystem::path index_path = root_ / "index.jsonl";
    Fd fd(::open(index_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644));
    if (fd.get() < 0) io_failure("open " + index_path.string());
    write_all(fd.get(), index_line(entry), "append " + index_path.string());
    if (::fsync(fd.get()) != 0) io_failure("fsync " + index_path.string());
    fd.close_or_throw("close " + index_path.string());
  }
  fsync_dir(root_);
  return final_path;
}

runtime::SessionResult Store::load_session(std::string_view session_id) const {
  const auto entries = read_index();
  auto it = std::find_if(entries.begin(), entries.end(),
                         [&](const IndexEntry& e) { return e.session_id == session_id; });
  if (it == entries.end()) {
    throw StoreError(ErrorKind::not_found, "session '" + std::string(session_id) + "' not found");
  }
  const std::string text = read_file(root_ / it->path);
  const auto rows = csv::parse(text).size();
  if (rows == 1) {
    // Header only: everything but the records comes from the index.
    runtime::SessionResult result;
    result.config.participant_id = it->participant_id;
    result.config.session_id = it->session_id;
    result.config.training_id = it->training_id;
    result.config.started_at = it->started_at;
    result.finished_at = it->finished_at;
    return result;
  }
  return parse_session_csv(text);
}

std::vector<IndexEntry> Store::list_sessions(const Filter& filter) const {
  std::vector<IndexEntry> out;
  for (auto& e : read_index()) {
    if (filter.training_id && e.training_id != *filter.training_id) continue;
    if (filter.participant_id && e.participant_id != *filter.participant_id) continue;
    out.push_back(std::move(e));
  }
  sort_entries(out);
  return out;
}

std::vector<IndexEntry> Store::rebuild_index() const {
  std::vector<IndexEntry> out;
  std::error_code ec;
  for (const auto& item : std::filesystem::directory_iterator(root_ / "sessions", ec)) {
    const auto name = item.path().filename().string();
    if (name.empty() || name.front() == '.' || item.path().extension() != ".csv") continue;
    runtime::SessionResult r;
    try {
      r = parse_session_csv(read_file(item.path()));
    } catch (const StoreError&) {
      continue;
    }
    IndexEntry e;
    e.session_id = r.config.session_id;
    e.training_id = r.config.training_id;
    e.participant_id = r.config.participant_id;
    e.finished_at = r.finished_at;
    e.started_at = r.config.started_at;
    e.path = "sessions/" + name;
    out.push_back(std::move(e));
  }
  sort_entries(out);
  return out;
}

}  // namespace sonda::store
