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

#include <algorithm>
#include <random>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "sonda/store.hpp"
#include "support.hpp"
#include "workshop_scores.hpp"

using namespace sonda;
using namespace sonda::store;

namespace {

runtime::SessionResult awkward_session(const std::string& id) {
  auto s = testing::workshop_session(0);
  s.config.session_id = id;
  s.records[0].stimulus_audio = "dir with space/a,b.wav";
  s.records[1].stimulus_image = "quote\"d.svg";
  s.records[2].response.clear();
  s.records[2].rt_ms.reset();
  s.records[2].outcome = runtime::Outcome::no_answer;
  s.records[3].rep_index = 2;
  return s;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("session ids") {
  CHECK(is_valid_session_id("p1-prototype"));
  CHECK(is_valid_session_id("a.b_c-9"));
  CHECK_FALSE(is_valid_session_id(""));
  CHECK_FALSE(is_valid_session_id(".hidden"));
  CHECK_FALSE(is_valid_session_id("../x"));
  CHECK_FALSE(is_valid_session_id("a/b"));
  CHECK_FALSE(is_valid_session_id("a b"));
}

TEST_CASE("session csv round trip") {
  const auto s = awkward_session("rt");
  const std::string text = session_csv(s);
  CHECK(count_lines(text) == s.records.size() + 1);
  CHECK(text.rfind("participant_id,session_id,training_id,loop_name,", 0) == 0);
  CHECK(parse_session_csv(text) == s);
}

TEST_CASE("parse errors name the line") {
  std::string text = session_csv(testing::workshop_session(0));
  const auto second = text.find('\n', text.find('\n') + 1) + 1;  // start of line 3
  const auto hit = text.find(",hit,", second);
  text.replace(hit, 5, ",bogus,");
  try {
    parse_session_csv(text);
    FAIL("expected a parse error");
  } catch (const StoreError& e) {
    CHECK(e.kind() == ErrorKind::parse_error);
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_session_csv("nope\n"), StoreError);
}

TEST_CASE("put, load and duplicates") {
  testing::TempDir dir;
  Store store(dir.path());
  const auto s = awkward_session("one");
  const auto path = store.put_session(s);
  CHECK(path == dir.path() / "sessions" / "one.csv");
  CHECK(count_lines(testing::slurp(path)) == 25);
  CHECK(store.contains("one"));
  CHECK(store.load_session("one") == s);

  try {
    store.put_session(s);
    FAIL("expected duplicate");
  } catch (const StoreError& e) {
    CHECK(e.kind() == ErrorKind::duplicate_session);
  }
  try {
    store.load_session("missing");
    FAIL("expected not found");
  } catch (const StoreError& e) {
    CHECK(e.kind() == ErrorKind::not_found);
  }
  auto bad = s;
  bad.config.session_id = "../escape";
  try {
    store.put_session(bad);
    FAIL("expected invalid id");
  } catch (const StoreError& e) {
    CHECK(e.kind() == ErrorKind::invalid_session_id);
  }

  // A second store over the same root sees the same data.
  Store again(dir.path());
  CHECK(again.load_session("one") == s);
  for (const auto& e : std::filesystem::directory_iterator(dir.path() / "sessions")) {
    CHECK(e.path().filename().string().front() != '.');
  }
}

TEST_CASE("listing is ordered and filterable") {
  testing::TempDir dir;
  Store store(dir.path());
  auto sessions = testing::workshop_sessions();
  sessions[4].config.training_id = "other";
  // Two sessions finishing together are ordered by id.
  sessions[1].finished_at = sessions[2].finished_at;
  std::mt19937 rng(7);
  auto shuffled = sessions;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (const auto& s : shuffled) store.put_session(s);

  const auto all = store.list_sessions();
  REQUIRE(all.size() == 6);
  CHECK(std::is_sorted(all.begin(), all.end(), [](const IndexEntry& a, const IndexEntry& b) {
    return std::tie(a.finished_at, a.session_id) < std::tie(b.finished_at, b.session_id);
  }));
  CHECK(all[0].session_id == "w1-1");
  CHECK(all[1].session_id == "w1-2");
  CHECK(all[2].session_id == "w1-3");
  CHECK(all[0].path == "sessions/w1-1.csv");
  CHECK(all[0].started_at == sessions[0].config.started_at);

  CHECK(store.list_sessions({.training_id = "workshop-1", .participant_id = std::nullopt}).size() == 5);
  const auto p3 = store.list_sessions({.training_id = std::nullopt, .participant_id = "participant-3"});
  REQUIRE(p3.size() == 1);
  CHECK(p3[0].session_id == "w1-3");
  CHECK(store.list_sessions({.training_id = "other", .participant_id = "participant-3"}).empty());

  CHECK(store.rebuild_index() == all);
  CHECK(count_lines(testing::slurp(dir.path() / "index.jsonl")) == 6);
}

TEST_CASE("a session with no records keeps its index entry") {
  testing::TempDir dir;
  Store store(dir.path());
  runtime::SessionResult empty;
  empty.config = {"p", "empty", "t", *parse_timestamp("2024-01-01T00:00:00.000Z"), 10};
  empty.finished_at = empty.config.started_at + std::chrono::seconds(3);
  store.put_session(empty);
  CHECK(store.load_session("empty") == empty);
  CHECK(store.list_sessions().size() == 1);
  CHECK(store.rebuild_index().empty());
}

TEST_CASE("concurrent writers through separate stores") {
  testing::TempDir dir;
  constexpr int kThreads = 6, kEach = 8;
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      Store store(dir.path());
      for (int i = 0; i < kEach; ++i) {
        auto s = testing::workshop_session(static_cast<std::size_t>(t));
        s.config.session_id = "c" + std::to_string(t) + "-" + std::to_string(i);
        s.finished_at += std::chrono::milliseconds(i);
        store.put_session(s);
      }
    });
  }
  for (auto& th : threads) th.join();

  Store store(dir.path());
  CHECK(store.list_sessions().size() == kThreads * kEach);
  const std::string index = testing::slurp(dir.path() / "index.jsonl");
  std::istringstream in(index);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    CHECK(nlohmann::json::accept(line));
    ++n;
  }
  CHECK(n == kThreads * kEach);
  CHECK(store.rebuild_index() == store.list_sessions());
}
