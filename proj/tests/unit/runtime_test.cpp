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

#include <variant>

#include "doctest.h"
#include "fixtures.hpp"
#include "sonda/runtime.hpp"

using namespace sonda;
using namespace sonda::runtime;
using plan::LoadedPlan;

namespace {

std::string same(std::string_view p) { return std::string(p); }

SessionConfig config() {
  SessionConfig c;
  c.participant_id = "p";
  c.session_id = "s";
  c.training_id = "t";
  return c;
}

// One trial: a prompt from 0, a 10 s window opening at 1 s, optional
// feedback lasting 2 s.
LoadedPlan trial_plan(bool with_feedback, std::vector<std::string> answers = {"left"}) {
  plan::TrainingPlan p;
  p.id = "t";
  p.title = "T";
  p.locale = "en";
  p.assets_dir = "assets";
  plan::Routine r;
  r.name = "trial";
  r.components.emplace_back(plan::TextComponent{"Which?", 0.0, std::nullopt, std::nullopt});
  r.components.emplace_back(plan::KeyResponseComponent{{"left", "right"}, "$corrAns", 10.0, 1.0});
  if (with_feedback) {
    r.components.emplace_back(plan::FeedbackComponent{
        "Excellent job!!", "Oops!! This seems to belong to a different glich class", "Incorrecto",
        2.0});
  }
  p.routines.push_back(r);
  plan::Loop l;
  l.name = "block";
  l.table = "t.csv";
  l.body = {"trial"};
  p.flow.emplace_back(l);
  plan::ConditionTable t;
  t.header = {"corrAns"};
  for (auto& a : answers) t.rows.push_back({a});
  return LoadedPlan{p, "/nonexistent", {{"block", t}}};
}

template <typename T>
std::vector<const Directive*> of_type(const std::vector<Directive>& ds) {
  std::vector<const Directive*> out;
  for (const auto& d : ds) {
    if (std::holds_alternative<T>(d.body)) out.push_back(&d);
  }
  return out;
}

std::vector<Directive> drain(Session& s, std::int64_t from, std::int64_t to, std::int64_t step = 10) {
  std::vector<Directive> out;
  for (std::int64_t t = from; t <= to && !s.finished(); t += step) {
    auto batch = s.tick(t);
    out.insert(out.end(), batch.begin(), batch.end());
  }
  return out;
}

}  // namespace

TEST_CASE("correct key 850 ms after the window opens") {
  const LoadedPlan lp = trial_plan(true);
  Session s = start_session(lp, config(), same);
  CHECK(s.pending_trials() == 1);
  auto log = drain(s, 0, 1000);
  const auto awaits = of_type<AwaitKeys>(log);
  REQUIRE(awaits.size() == 1);
  CHECK(awaits[0]->at_ms == 1000);
  CHECK(std::get<AwaitKeys>(awaits[0]->body).window_s == 10.0);

  auto out = s.key_event("left", 1850);
  const auto fb = of_type<ShowFeedback>(out);
  REQUIRE(fb.size() == 1);
  CHECK(fb[0]->at_ms == 1850);
  CHECK(std::get<ShowFeedback>(fb[0]->body) == ShowFeedback{"Excellent job!!", FeedbackKind::correct});
  CHECK(s.pending_trials() == 0);

  auto rest = drain(s, 1860, 10000);
  REQUIRE(s.finished());
  CHECK(std::holds_alternative<SessionEnd>(rest.back().body));
  CHECK(rest.back().at_ms == 3850);

  const SessionResult r = s.finish();
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].outcome == Outcome::hit);
  CHECK(r.records[0].rt_ms == 850);
  CHECK(r.records[0].response == "left");
  CHECK(r.finished_at - r.config.started_at == std::chrono::milliseconds(3850));
  CHECK(check_record(r.records[0], 10000).empty());
}

TEST_CASE("wrong key gives a miss and the incorrect message") {
  const LoadedPlan lp = trial_plan(true);
  Session s = start_session(lp, config(), same);
  s.tick(0);
  CHECK(s.key_event("left", 500).empty());  // window not open yet
  s.tick(1000);
  auto ignored = s.key_event("x", 1500);
  CHECK(of_type<ShowFeedback>(ignored).empty());
  auto out = s.key_event("right", 1600);
  const auto fb = of_type<ShowFeedback>(out);
  REQUIRE(fb.size() == 1);
  CHECK(std::get<ShowFeedback>(fb[0]->body).kind == FeedbackKind::incorrect);
  CHECK(std::get<ShowFeedback>(fb[0]->body).message.find("This seems to belong") !=
        std::string::npos);
  drain(s, 1610, 5000);
  const auto r = s.finish();
  CHECK(r.records[0].outcome == Outcome::miss);
  CHECK(r.records[0].rt_ms == 600);
  // Only the first answer counts.
}

TEST_CASE("no key: timeout gives no_answer and the timeout message") {
  const LoadedPlan lp = trial_plan(true);
  Session s = start_session(lp, config(), same);
  auto log = drain(s, 0, 20000);
  REQUIRE(s.finished());
  const auto fb = of_type<ShowFeedback>(log);
  REQUIRE(fb.size() == 1);
  CHECK(fb[0]->at_ms == 11000);
  CHECK(std::get<ShowFeedback>(fb[0]->body) == ShowFeedback{"Incorrecto", FeedbackKind::timeout});
  const auto r = s.finish();
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].outcome == Outcome::no_answer);
  CHECK(r.records[0].response.empty());
  CHECK_FALSE(r.records[0].rt_ms);
  CHECK(log.back().at_ms == 13000);
}

TEST_CASE("window edges: exact expiry counts, one millisecond later does not") {
  {
    const LoadedPlan lp = trial_plan(false);
    Session s = start_session(lp, config(), same);
    drain(s, 0, 10990);
    s.key_event("left", 11000);
    drain(s, 11000, 12000);
    const auto r = s.finish();
    CHECK(r.records[0].outcome == Outcome::hit);
    CHECK(r.records[0].rt_ms == 10000);
  }
  {
    const LoadedPlan lp = trial_plan(false);
    Session s = start_session(lp, config(), same);
    drain(s, 0, 10990);
    s.key_event("left", 11001);
    const auto r = s.finish();
    CHECK(r.records[0].outcome == Outcome::no_answer);
  }
}

TEST_CASE("fixed duration, hiding and narration") {
  plan::TrainingPlan p;
  p.id = "t";
  p.title = "T";
  p.locale = "en";
  p.assets_dir = "assets";
  plan::Routine r;
  r.name = "show";
  r.duration_s = 3.0;
  r.components.emplace_back(plan::TextComponent{"A", 0.0, 1.0, std::string("a.wav")});
  r.components.emplace_back(plan::ImageComponent{"b.svg", 0.5, std::nullopt});
  r.components.emplace_back(plan::AudioComponent{"c.wav", 0.25});
  p.routines.push_back(r);
  p.flow.emplace_back(plan::RoutineRef{"show"});
  const LoadedPlan lp{p, "/nonexistent", {}};
  auto resolver = [](std::string_view path) { return "X/" + std::string(path); };
  Session s = start_session(lp, config(), resolver);
  CHECK(s.total_trials() == 0);
  const auto log = drain(s, 0, 5000, 250);
  const std::vector<Directive> want{
      {0, ShowText{"A", std::string("X/a.wav")}},
      {250, PlayAudio{"X/c.wav"}},
      {500, ShowImage{"X/b.svg"}},
      {1000, ClearScreen{}},
      {1000, ShowImage{"X/b.svg"}},
      {3000, ClearScreen{}},
      {3000, SessionEnd{}},
  };
  CHECK(log == want);
}

TEST_CASE("event-driven routine ends after its last timed component") {
  plan::TrainingPlan p;
  p.id = "t";
  p.title = "T";
  p.locale = "en";
  p.assets_dir = "assets";
  plan::Routine r;
  r.name = "e";
  r.components.emplace_back(plan::TextComponent{"A", 0.0, 2.5, std::nullopt});
  p.routines.push_back(r);
  p.flow.emplace_back(plan::RoutineRef{"e"});
  p.flow.emplace_back(plan::RoutineRef{"e"});
  const LoadedPlan lp{p, "/nonexistent", {}};
  Session s = start_session(lp, config(), same);
  const auto log = drain(s, 0, 10000, 100);
  CHECK(log.back() == Directive{5000, SessionEnd{}});
}

TEST_CASE("session errors") {
  const LoadedPlan lp = trial_plan(false);
  Session s = start_session(lp, config(), same);
  s.tick(100);
  CHECK_THROWS_AS(s.finish(), RuntimeError);
  try {
    s.tick(50);
    FAIL("expected clock_regression");
  } catch (const RuntimeError& e) {
    CHECK(e.kind() == ErrorKind::clock_regression);
  }
  drain(s, 100, 20000);
  try {
    s.tick(30000);
    FAIL("expected session_finished");
  } catch (const RuntimeError& e) {
    CHECK(e.kind() == ErrorKind::session_finished);
  }

  SessionConfig bad = config();
  bad.participant_id.clear();
  CHECK_THROWS_AS(start_session(lp, bad, same), RuntimeError);

  auto missing = [](std::string_view p) -> std::string {
    throw RuntimeError(ErrorKind::asset_missing, std::string(p));
  };
  plan::LoadedPlan with_asset = lp;
  with_asset.plan.routines[0].components.emplace_back(plan::AudioComponent{"z.wav", 0.0});
  try {
    start_session(with_asset, config(), missing);
    FAIL("expected asset_missing");
  } catch (const RuntimeError& e) {
    CHECK(e.kind() == ErrorKind::asset_missing);
  }
}

TEST_CASE("check_record rules") {
  TrialRecord r;
  r.correct_answer = "left";
  CHECK(check_record(r, 10000).empty());
  r.rt_ms = 5;
  CHECK_FALSE(check_record(r, 10000).empty());
  r = {};
  r.correct_answer = "left";
  r.response = "right";
  r.rt_ms = 100;
  r.outcome = Outcome::hit;
  CHECK_FALSE(check_record(r, 10000).empty());
  r.outcome = Outcome::miss;
  CHECK(check_record(r, 10000).empty());
  r.rt_ms = 10001;
  CHECK_FALSE(check_record(r, 10000).empty());
  r.rt_ms.reset();
  CHECK_FALSE(check_record(r, 10000).empty());
}

TEST_CASE("scripts") {
  const auto ev = parse_script("at_ms,kind,key\n100,key,left\n50,key,right\n");
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].at_ms == 100);
  CHECK(ev[1].key == "right");
  CHECK(parse_script("at_ms,kind,key\n").empty());
  CHECK(parse_script("").empty());
  CHECK_THROWS_AS(parse_script("t,kind,key\n"), ScriptError);
  CHECK_THROWS_AS(parse_script("at_ms,kind,key\n-1,key,a\n"), ScriptError);
  CHECK_THROWS_AS(parse_script("at_ms,kind,key\n1,mouse,a\n"), ScriptError);
  CHECK_THROWS_AS(parse_script("at_ms,kind,key\n1,key\n"), ScriptError);
}

TEST_CASE("prototype: nine pending trials and a 4 s intro") {
  const LoadedPlan lp = testing::load_bundled("prototype");
  Session s = start_session(lp, config(), file_resolver(lp, true));
  CHECK(s.pending_trials() == 9);
  const auto first = s.tick(0);
  REQUIRE_FALSE(first.empty());
  CHECK(std::holds_alternative<ShowText>(first[0].body));
  const auto next = s.tick(4000);
  REQUIRE_FALSE(next.empty());
  CHECK(next[0] == Directive{4000, ClearScreen{}});
  CHECK(trial_slots(lp).size() == 9);
}

TEST_CASE("prototype headless replay is deterministic") {
  const LoadedPlan lp = testing::load_bundled("prototype");
  const std::vector<ScriptedEvent> keys{{8500, "left"}, {16400, "right"}, {999999, "left"}};
  const HeadlessRun a = run_headless(lp, config(), file_resolver(lp, true), keys);
  const HeadlessRun b = run_headless(lp, config(), file_resolver(lp, true), keys);
  CHECK(a.log == b.log);
  CHECK(a.result == b.result);
  REQUIRE(a.result.records.size() == 9);
  CHECK(a.result.records[0].outcome == Outcome::hit);
  CHECK(a.result.records[0].rt_ms == 500);
  CHECK(a.result.records[1].outcome == Outcome::miss);
  for (std::size_t i = 2; i < 9; ++i) CHECK(a.result.records[i].outcome == Outcome::no_answer);
  CHECK(a.result.records[0].stimulus_audio == "tones/tone_260.wav");
  CHECK(std::holds_alternative<SessionEnd>(a.log.back().body));
}

TEST_CASE("directive JSON lines") {
  CHECK(to_json_line({5, ClearScreen{}}) == R"({"at_ms":5,"type":"clear_screen"})");
  CHECK(to_json_line({7, ShowFeedback{"ok", FeedbackKind::timeout}}) ==
        R"({"at_ms":7,"type":"show_feedback","message":"ok","kind":"timeout"})");
  CHECK(to_json_line({0, AwaitKeys{{"a", "b"}, 3.9}}) ==
        R"({"at_ms":0,"type":"await_keys","allowed_keys":["a","b"],"window_s":3.9})");
}
