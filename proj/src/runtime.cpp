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

#include "sonda/runtime.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "sonda/csv.hpp"

namespace sonda::runtime {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::hit: return "hit";
    case Outcome::miss: return "miss";
    case Outcome::no_answer: return "no_answer";
  }
  return "unknown";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
  if (text == "hit") return Outcome::hit;
  if (text == "miss") return Outcome::miss;
  if (text == "no_answer") return Outcome::no_answer;
  return std::nullopt;
}

std::string_view to_string(FeedbackKind kind) {
  switch (kind) {
    case FeedbackKind::correct: return "correct";
    case FeedbackKind::incorrect: return "incorrect";
    case FeedbackKind::timeout: return "timeout";
  }
  return "unknown";
}

std::string check_record(const TrialRecord& record, std::int64_t window_ms) {
  if (record.response.empty()) {
    if (record.outcome != Outcome::no_answer) return "empty response requires outcome no_answer";
    if (record.rt_ms) return "rt_ms must be null when there is no response";
    return {};
  }
  if (record.outcome == Outcome::no_answer) return "outcome no_answer requires an empty response";
  if (!record.rt_ms) return "rt_ms is required when there is a response";
  if (*record.rt_ms < 0 || *record.rt_ms > window_ms) {
    return "rt_ms " + std::to_string(*record.rt_ms) + " outside [0, " +
           std::to_string(window_ms) + "]";
  }
  const bool correct = record.response == record.correct_answer;
  if (correct && record.outcome != Outcome::hit) return "response equals correct_answer but outcome is not hit";
  if (!correct && record.outcome != Outcome::miss) return "response differs from correct_answer but outcome is not miss";
  return {};
}

namespace {

std::int64_t to_ms(double seconds) { return static_cast<std::int64_t>(std::llround(seconds * 1000.0)); }

struct PlannedStep {
  const plan::Routine* routine = nullptr;
  std::optional<plan::TrialBinding> binding;
};

std::vector<PlannedStep> expand_flow(const plan::LoadedPlan& loaded) {
  try {
    plan::check_plan_structure(loaded.plan);
  } catch (const plan::ParseError& e) {
    throw RuntimeError(ErrorKind::invalid_plan, e.what());
  }
  std::vector<PlannedStep> steps;
  for (const auto& item : loaded.plan.flow) {
    if (const auto* ref = std::get_if<plan::RoutineRef>(&item)) {
      steps.push_back({loaded.plan.find_routine(ref->routine), std::nullopt});
      continue;
    }
    const auto& loop = std::get<plan::Loop>(item);
    auto table = loaded.tables.find(loop.name);
    if (table == loaded.tables.end()) {
      throw RuntimeError(ErrorKind::invalid_plan, "no table loaded for loop '" + loop.name + "'");
    }
    std::vector<plan::TrialBinding> trials;
    try {
      trials = plan::expand_trials(loop, table->second);
    } catch (const std::exception& e) {
      throw RuntimeError(ErrorKind::invalid_plan, e.what());
    }
    for (auto& trial : trials) {
      for (const auto& name : loop.body) {
        steps.push_back({loaded.plan.find_routine(name), trial});
      }
    }
  }
  return steps;
}

std::string bind_row(std::string_view text, const PlannedStep& step) {
  static const std::map<std::string, std::string> kNone;
  try {
    return plan::substitute(text, step.binding ? step.binding->bindings : kNone);
  } catch (const std::out_of_range& e) {
    throw RuntimeError(ErrorKind::invalid_plan,
                       "routine '" + step.routine->name + "': " + e.what());
  }
}

enum class WindowPhase { pending, open, resolved };

struct Visual {
  bool is_text = false;
  std::string payload;  // text content or resolved image asset
  std::optional<std::string> narration;
  std::int64_t start_ms = 0;
  std::optional<std::int64_t> stop_ms;
  bool started = false;
  bool stopped = false;
};

struct Sound {
  std::string asset;
  std::int64_t start_ms = 0;
  bool started = false;
};

struct Window {
  std::vector<std::string> allowed_keys;
  double window_s = 0.0;
  std::int64_t start_ms = 0;
  std::int64_t window_ms = 0;
  std::string correct_answer;
  WindowPhase phase = WindowPhase::pending;
  std::int64_t opened_at = 0;
  std::int64_t resolved_at = 0;
};

struct Feedback {
  plan::FeedbackComponent text;
  std::int64_t duration_ms = 0;
};

struct Step {
  std::string routine_name;
  std::int64_t duration_ms = 0;
  std::vector<Visual> visuals;
  std::vector<Sound> sounds;
  std::optional<Window> window;
  std::optional<Feedback> feedback;
  std::string loop_name;
  std::size_t rep_index = 0;
  std::size_t row_index = 0;
  std::string stimulus_image;
  std::string stimulus_audio;

  std::optional<std::int64_t> feedback_end;
  bool feedback_over = false;
};

Step build_step(const PlannedStep& planned, const AssetResolver& resolve) {
  Step step;
  step.routine_name = planned.routine->name;
  step.duration_ms = to_ms(planned.routine->duration_s);
  if (planned.binding) {
    step.loop_name = planned.binding->loop_name;
    step.rep_index = planned.binding->rep_index;
    step.row_index = planned.binding->row_index;
  }
  for (const auto& component : planned.routine->components) {
    if (const auto* t = std::get_if<plan::TextComponent>(&component)) {
      Visual v;
      v.is_text = true;
      v.payload = bind_row(t->content, planned);
      if (t->narration) v.narration = resolve(bind_row(*t->narration, planned));
      v.start_ms = to_ms(t->start_s);
      if (t->stop_s) v.stop_ms = to_ms(*t->stop_s);
      step.visuals.push_back(std::move(v));
    } else if (const auto* i = std::get_if<plan::ImageComponent>(&component)) {
      Visual v;
      const std::string source = bind_row(i->source, planned);
      v.payload = resolve(source);
      v.start_ms = to_ms(i->start_s);
      if (i->stop_s) v.stop_ms = to_ms(*i->stop_s);
      // Records keep the plan's path, not the host's.
      if (step.stimulus_image.empty()) step.stimulus_image = source;
      step.visuals.push_back(std::move(v));
    } else if (const auto* a = std::get_if<plan::AudioComponent>(&component)) {
      Sound s;
      const std::string source = bind_row(a->source, planned);
      s.asset = resolve(source);
      s.start_ms = to_ms(a->start_s);
      if (step.stimulus_audio.empty()) step.stimulus_audio = source;
      step.sounds.push_back(std::move(s));
    } else if (const auto* k = std::get_if<plan::KeyResponseComponent>(&component)) {
      Window w;
      w.allowed_keys = k->allowed_keys;
      w.window_s = k->window_s;
      w.start_ms = to_ms(k->start_s);
      w.window_ms = to_ms(k->window_s);
      w.correct_answer = bind_row(k->correct_from, planned);
      step.window = std::move(w);
    } else if (const auto* f = std::get_if<plan::FeedbackComponent>(&component)) {
      Feedback fb;
      fb.text.correct_message = bind_row(f->correct_message, planned);
      fb.text.incorrect_message = bind_row(f->incorrect_message, planned);
      fb.text.timeout_message = bind_row(f->timeout_message, planned);
      fb.duration_ms = to_ms(f->duration_s);
      step.feedback = std::move(fb);
    }
  }
  return step;
}

}  // namespace

AssetResolver file_resolver(const plan::LoadedPlan& loaded, bool require_existing) {
  const std::filesystem::path root = loaded.root;
  const std::string assets_dir = loaded.plan.assets_dir;
  return [root, assets_dir, require_existing](std::string_view path) -> std::string {
    if (!plan::is_safe_relative_path(path)) {
      throw RuntimeError(ErrorKind::asset_missing, "unsafe asset path '" + std::string(path) + "'");
    }
    const std::string relative =
        assets_dir == "." ? std::string(path) : assets_dir + "/" + std::string(path);
    if (require_existing) {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(root / relative, ec)) {
        throw RuntimeError(ErrorKind::asset_missing, "missing asset '" + relative + "'");
      }
    }
    return relative;
  };
}

std::vector<TrialSlot> trial_slots(const plan::LoadedPlan& loaded) {
  std::vector<TrialSlot> slots;
  for (const auto& planned : expand_flow(loaded)) {
    const auto* key = planned.routine->key_response();
    if (!key) continue;
    TrialSlot slot;
    if (planned.binding) {
      slot.loop_name = planned.binding->loop_name;
      slot.rep_index = planned.binding->rep_index;
      slot.row_index = planned.binding->row_index;
    }
    slot.routine_name = planned.routine->name;
    slot.correct_answer = bind_row(key->correct_from, planned);
    slot.window_ms = to_ms(key->window_s);
    slots.push_back(std::move(slot));
  }
  return slots;
}

// ---------------------------------------------------------------------------
// Session

struct Session::State {
  SessionConfig config;
  std::vector<Step> steps;
  std::size_t current = 0;
  bool begun = false;
  bool ended = false;
  std::int64_t origin_ms = 0;
  std::int64_t last_now = 0;
  std::int64_t routine_start = 0;
  std::int64_t end_ms = 0;
  std::size_t total_trials = 0;
  std::vector<TrialRecord> records;

  Step& step() { return steps[current]; }

  void check_call(std::int64_t now) {
    if (ended) throw RuntimeError(ErrorKind::session_finished, "session already ended");
    if (begun && now < last_now) {
      throw RuntimeError(ErrorKind::clock_regression,
                         "clock went backwards: " + std::to_string(now) + " < " +
                             std::to_string(last_now));
    }
  }

  void begin(std::int64_t now, std::vector<Directive>& out) {
    begun = true;
    origin_ms = now;
    last_now = now;
    routine_start = now;
    if (steps.empty()) end_session(now, out);
  }

  void end_session(std::int64_t t, std::vector<Directive>& out) {
    out.push_back({t, SessionEnd{}});
    ended = true;
    end_ms = t;
  }

  std::optional<std::int64_t> routine_end() {
    Step& s = step();
    const std::int64_t t0 = routine_start;
    if (s.window && s.window->phase != WindowPhase::resolved) return std::nullopt;
    std::int64_t end = t0;
    if (s.duration_ms > 0) {
      end = t0 + s.duration_ms;
    } else {
      for (const auto& v : s.visuals) {
        end = std::max(end, t0 + v.start_ms);
        if (v.stop_ms) end = std::max(end, t0 + *v.stop_ms);
      }
      for (const auto& a : s.sounds) end = std::max(end, t0 + a.start_ms);
    }
    if (s.window) end = std::max(end, s.window->resolved_at);
    if (s.feedback_end) end = std::max(end, *s.feedback_end);
    return end;
  }

  std::optional<std::int64_t> next_event_time() {
    if (ended) return std::nullopt;
    Step& s = step();
    const std::int64_t t0 = routine_start;
    std::optional<std::int64_t> best;
    auto consider = [&](std::int64_t t) {
      if (!best || t < *best) best = t;
    };
    for (const auto& v : s.visuals) {
      if (!v.started) {
        consider(t0 + v.start_ms);
      } else if (v.stop_ms && !v.stopped) {
        consider(t0 + *v.stop_ms);
      }
    }
    for (const auto& a : s.sounds) {
      if (!a.started) consider(t0 + a.start_ms);
    }
    if (s.window) {
      if (s.window->phase == WindowPhase::pending) consider(t0 + s.window->start_ms);
      if (s.window->phase == WindowPhase::open) consider(s.window->opened_at + s.window->window_ms);
    }
    if (s.feedback_end && !s.feedback_over) consider(*s.feedback_end);
    if (auto end = routine_end()) consider(*end);
    return best;
  }

  static Directive show(std::int64_t t, const Visual& v, bool with_narration) {
    if (v.is_text) {
      return {t, ShowText{v.payload, with_narration ? v.narration : std::nullopt}};
    }
    return {t, ShowImage{v.payload}};
  }

  void redraw(std::int64_t t, std::vector<Directive>& out) {
    out.push_back({t, ClearScreen{}});
    for (const auto& v : step().visuals) {
      if (v.started && !v.stopped) out.push_back(show(t, v, false));
    }
  }

  void record(Step& s, std::string response, std::optional<std::int64_t> rt, Outcome outcome) {
    TrialRecord r;
    r.loop_name = s.loop_name;
    r.rep_index = s.rep_index;
    r.row_index = s.row_index;
    r.routine_name = s.routine_name;
    r.stimulus_image = s.stimulus_image;
    r.stimulus_audio = s.stimulus_audio;
    r.correct_answer = s.window->correct_answer;
    r.response = std::move(response);
    r.rt_ms = rt;
    r.outcome = outcome;
    records.push_back(std::move(r));
  }

  void start_feedback(Step& s, std::int64_t t, FeedbackKind kind, std::vector<Directive>& out) {
    if (!s.feedback) return;
    const auto& text = s.feedback->text;
    const std::string& message = kind == FeedbackKind::correct     ? text.correct_message
                                 : kind == FeedbackKind::incorrect ? text.incorrect_message
                                                                   : text.timeout_message;
    out.push_back({t, ShowFeedback{message, kind}});
    s.feedback_end = t + s.feedback->duration_ms;
  }

  // Handles everything due at time `t`, which must be the earliest pending
  // event time. Returns false when nothing could be done.
  bool process_at(std::int64_t t, bool hold_expiry, std::vector<Directive>& out) {
    Step& s = step();
    const std::int64_t t0 = routine_start;
    bool progressed = false;

    bool hidden = false;
    for (auto& v : s.visuals) {
      if (v.started && v.stop_ms && !v.stopped && t0 + *v.stop_ms <= t) {
        v.stopped = true;
        hidden = true;
      }
    }
    std::vector<Directive> shown;
    for (auto& v : s.visuals) {
      if (v.started || t0 + v.start_ms > t) continue;
      v.started = true;
      progressed = true;
      if (v.stop_ms && t0 + *v.stop_ms <= t) {
        v.stopped = true;  // zero-length component
      } else {
        shown.push_back(show(t, v, true));
      }
    }
    if (hidden) {
      progressed = true;
      out.push_back({t, ClearScreen{}});
      for (const auto& v : s.visuals) {
        if (!v.started || v.stopped) continue;
        if (v.start_ms + t0 == t) continue;  // shown just below
        out.push_back(show(t, v, false));
      }
    }
    out.insert(out.end(), shown.begin(), shown.end());
    for (auto& a : s.sounds) {
      if (!a.started && t0 + a.start_ms <= t) {
        a.started = true;
        progressed = true;
        out.push_back({t, PlayAudio{a.asset}});
      }
    }

    if (s.window && s.window->phase == WindowPhase::pending && t0 + s.window->start_ms <= t) {
      s.window->phase = WindowPhase::open;
      s.window->opened_at = t;
      progressed = true;
      out.push_back({t, AwaitKeys{s.window->allowed_keys, s.window->window_s}});
    }
    if (s.window && s.window->phase == WindowPhase::open) {
      const std::int64_t expiry = s.window->opened_at + s.window->window_ms;
      if (expiry <= t && !(hold_expiry && expiry == t)) {
        s.window->phase = WindowPhase::resolved;
        s.window->resolved_at = t;
        progressed = true;
        record(s, {}, std::nullopt, Outcome::no_answer);
        start_feedback(s, t, FeedbackKind::timeout, out);
      }
    }

    if (s.feedback_end && !s.feedback_over && *s.feedback_end <= t) {
      s.feedback_over = true;
      progressed = true;
      auto end = routine_end();
      if (end && *end > t) redraw(t, out);
    }

    if (auto end = routine_end(); end && *end <= t) {
      progressed = true;
      out.push_back({t, ClearScreen{}});
      ++current;
      if (current == steps.size()) {
        end_session(t, out);
      } else {
        routine_start = t;
      }
    }
    return progressed;
  }

  void advance(std::int64_t limit, bool hold_expiry, std::vector<Directive>& out) {
    while (!ended) {
      auto t = next_event_time();
      if (!t || *t > limit) break;
      if (!process_at(*t, hold_expiry && *t == limit, out)) break;
    }
  }

  void press(std::string_view key, std::int64_t now, std::vector<Directive>& out) {
    if (ended) return;
    Step& s = step();
    if (!s.window || s.window->phase != WindowPhase::open) return;
    if (now > s.window->opened_at + s.window->window_ms) return;
    const auto& allowed = s.window->allowed_keys;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) return;

    s.window->phase = WindowPhase::resolved;
    s.window->resolved_at = now;
    const bool hit = key == s.window->correct_answer;
    record(s, std::string(key), now - s.window->opened_at, hit ? Outcome::hit : Outcome::miss);
    start_feedback(s, now, hit ? FeedbackKind::correct : FeedbackKind::incorrect, out);
  }
};

Session::Session(std::unique_ptr<State> state) : state_(std::move(state)) {}
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;
Session::~Session() = default;

std::vector<Directive> Session::tick(std::int64_t now_ms) {
  State& st = *state_;
  st.check_call(now_ms);
  std::vector<Directive> out;
  if (!st.begun) st.begin(now_ms, out);
  st.advance(now_ms, false, out);
  st.last_now = now_ms;
  return out;
}

std::vector<Directive> Session::key_event(std::string_view key, std::int64_t now_ms) {
  State& st = *state_;
  st.check_call(now_ms);
  std::vector<Directive> out;
  if (!st.begun) st.begin(now_ms, out);
  st.advance(now_ms, true, out);
  st.press(key, now_ms, out);
  st.advance(now_ms, false, out);
  st.last_now = now_ms;
  return out;
}

SessionResult Session::finish() const {
  const State& st = *state_;
  if (!st.ended) {
    throw RuntimeError(ErrorKind::session_not_finished, "session has not reached its end");
  }
  SessionResult result;
  result.config = st.config;
  result.records = st.records;
  result.finished_at = st.config.started_at + std::chrono::milliseconds(st.end_ms - st.origin_ms);
  return result;
}

bool Session::finished() const { return state_->ended; }

std::size_t Session::pending_trials() const {
  return state_->total_trials - state_->records.size();
}

std::size_t Session::total_trials() const { return state_->total_trials; }

const SessionConfig& Session::config() const { return state_->config; }

Session start_session(const plan::LoadedPlan& loaded, SessionConfig config,
                      AssetResolver resolver) {
  if (config.participant_id.empty() || config.session_id.empty() || config.training_id.empty()) {
    throw RuntimeError(ErrorKind::invalid_plan, "session ids must be non-empty");
  }
  if (config.tick_ms < 1) throw RuntimeError(ErrorKind::invalid_plan, "tick_ms must be >= 1");
  if (!resolver) resolver = file_resolver(loaded, false);

  auto state = std::make_unique<Session::State>();
  state->config = std::move(config);
  for (const auto& planned : expand_flow(loaded)) {
    state->steps.push_back(build_step(planned, resolver));
    if (state->steps.back().window) ++state->total_trials;
  }
  return Session(std::move(state));
}

// ---------------------------------------------------------------------------
// Headless

std::vector<ScriptedEvent> parse_script(std::string_view text) {
  std::vector<csv::Record> records;
  try {
    records = csv::parse(text);
  } catch (const csv::SyntaxError& e) {
    throw ScriptError(e.what());
  }
  while (!records.empty() && records.back().fields.size() == 1 && records.back().fields[0].empty()) {
    records.pop_back();
  }
  if (records.empty()) return {};
  if (records.front().fields != std::vector<std::string>{"at_ms", "kind", "key"}) {
    throw ScriptError("line 1: header must be at_ms,kind,key");
  }
  std::vector<ScriptedEvent> events;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& rec = records[k];
    const std::string where = "line " + std::to_string(rec.line) + ": ";
    if (rec.fields.size() != 3) throw ScriptError(where + "expected 3 fields");
    ScriptedEvent e;
    const auto& at = rec.fields[0];
    auto [ptr, ec] = std::from_chars(at.data(), at.data() + at.size(), e.at_ms);
    if (ec != std::errc() || ptr != at.data() + at.size() || e.at_ms < 0) {
      throw ScriptError(where + "at_ms must be a non-negative integer");
    }
    if (rec.fields[1] != "key") throw ScriptError(where + "unsupported event kind '" + rec.fields[1] + "'");
    if (rec.fields[2].empty()) throw ScriptError(where + "key is empty");
    e.key = rec.fields[2];
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<ScriptedEvent> load_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScriptError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_script(buf.str());
}

HeadlessRun run_headless(const plan::LoadedPlan& loaded, SessionConfig config,
                         AssetResolver resolver, std::vector<ScriptedEvent> events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const ScriptedEvent& a, const ScriptedEvent& b) { return a.at_ms < b.at_ms; });
  const std::int64_t step = config.tick_ms;
  Session session = start_session(loaded, std::move(config), std::move(resolver));

  HeadlessRun run;
  auto append = [&](std::vector<Directive> batch) {
    run.log.insert(run.log.end(), std::make_move_iterator(batch.begin()),
                   std::make_move_iterator(batch.end()));
  };

  std::int64_t now = 0;
  append(session.tick(now));
  std::size_t next_event = 0;
  while (!session.finished()) {
    const std::int64_t next = now + step;
    while (next_event < events.size() && events[next_event].at_ms <= next && !session.finished()) {
      const auto& e = events[next_event++];
      const std::int64_t at = std::max(e.at_ms, now);
      append(session.key_event(e.key, at));
      now = at;
    }
    if (session.finished()) break;
    append(session.tick(next));
    now = next;
  }
  run.result = session.finish();
  return run;
}

std::string to_json_line(const Directive& directive) {
  nlohmann::ordered_json j;
  j["at_ms"] = directive.at_ms;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ShowText>) {
          j["type"] = "show_text";
          j["content"] = d.content;
          j["narration"] = d.narration ? nlohmann::ordered_json(*d.narration) : nullptr;
        } else if constexpr (std::is_same_v<T, ShowImage>) {
          j["type"] = "show_image";
          j["asset"] = d.asset;
        } else if constexpr (std::is_same_v<T, PlayAudio>) {
          j["type"] = "play_audio";
          j["asset"] = d.asset;
        } else if constexpr (std::is_same_v<T, AwaitKeys>) {
          j["type"] = "await_keys";
          j["allowed_keys"] = d.allowed_keys;
          j["window_s"] = d.window_s;
        } else if constexpr (std::is_same_v<T, ShowFeedback>) {
          j["type"] = "show_feedback";
          j["message"] = d.message;
          j["kind"] = std::string(to_string(d.kind));
        } else if constexpr (std::is_same_v<T, ClearScreen>) {
          j["type"] = "clear_screen";
        } else {
          j["type"] = "session_end";
        }
      },
      directive.body);
  return j.dump();
}

}  // namespace sonda::runtime
