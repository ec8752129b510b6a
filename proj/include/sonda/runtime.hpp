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

#ifndef SONDA_RUNTIME_HPP_
#define SONDA_RUNTIME_HPP_

/// \file
/// Session engine.
///
/// A Session walks the expanded flow of a plan against a monotonic
/// millisecond clock supplied by the host. It never touches devices, files
/// or sockets: hosts call tick() and key_event() and interpret the returned
/// Directives (show this text, play that file, wait for these keys).
///
/// Timing rules, all relative to the start of the current routine:
///  - text and image components are shown at start_s and hidden at stop_s;
///    hiding is expressed as ClearScreen followed by the visuals that stay up;
///  - audio components start playing at start_s;
///  - the response window opens at the key response's start_s and expires
///    window_s later; the first allowed key inside the window resolves it;
///  - a routine with duration_s > 0 ends at duration_s, or when its feedback
///    finishes if that is later; a routine with duration_s == 0 ends once
///    every component has started and stopped, the window is resolved and
///    the feedback is over;
///  - every routine end emits ClearScreen; the last one is followed by
///    SessionEnd.
/// A key arriving on the exact millisecond the window expires still counts.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sonda/plan.hpp"
#include "sonda/timestamp.hpp"

namespace sonda::runtime {

struct SessionConfig {
  std::string participant_id;
  std::string session_id;
  std::string training_id;
  Timestamp started_at{};
  int tick_ms = 10;

  bool operator==(const SessionConfig&) const = default;
};

enum class FeedbackKind { correct, incorrect, timeout };

struct ShowText {
  std::string content;
  std::optional<std::string> narration;
  bool operator==(const ShowText&) const = default;
};
struct ShowImage {
  std::string asset;
  bool operator==(const ShowImage&) const = default;
};
struct PlayAudio {
  std::string asset;
  bool operator==(const PlayAudio&) const = default;
};
struct AwaitKeys {
  std::vector<std::string> allowed_keys;
  double window_s = 0.0;
  bool operator==(const AwaitKeys&) const = default;
};
struct ShowFeedback {
  std::string message;
  FeedbackKind kind = FeedbackKind::correct;
  bool operator==(const ShowFeedback&) const = default;
};
struct ClearScreen {
  bool operator==(const ClearScreen&) const = default;
};
struct SessionEnd {
  bool operator==(const SessionEnd&) const = default;
};

using DirectiveBody = std::variant<ShowText, ShowImage, PlayAudio, AwaitKeys, ShowFeedback,
                                   ClearScreen, SessionEnd>;

struct Directive {
  /// Clock time at which the directive takes effect.
  std::int64_t at_ms = 0;
  DirectiveBody body;

  bool operator==(const Directive&) const = default;
};

enum class Outcome { hit, miss, no_answer };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);
std::string_view to_string(FeedbackKind kind);

struct TrialRecord {
  std::string loop_name;
  std::size_t rep_index = 0;
  std::size_t row_index = 0;
  std::string routine_name;
  /// Stimulus paths as written in the plan after row substitution,
  /// relative to the assets directory.
  std::string stimulus_image;
  std::string stimulus_audio;
  std::string correct_answer;
  std::string response;
  std::optional<std::int64_t> rt_ms;
  Outcome outcome = Outcome::no_answer;

  bool operator==(const TrialRecord&) const = default;
};

/// Checks the outcome/response/rt consistency rules. Returns an empty string
/// when the record is consistent, a description of the violation otherwise.
std::string check_record(const TrialRecord& record, std::int64_t window_ms);

struct SessionResult {
  SessionConfig config;
  std::vector<TrialRecord> records;
  Timestamp finished_at{};

  bool operator==(const SessionResult&) const = default;
};

enum class ErrorKind { invalid_plan, asset_missing, session_finished, session_not_finished, clock_regression };

class RuntimeError : public std::runtime_error {
 public:
  RuntimeError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Maps a (possibly row-substituted) asset path from the plan to what the
/// host should load. Throws RuntimeError(asset_missing) when it cannot.
using AssetResolver = std::function<std::string(std::string_view)>;

/// `<assets_dir>/<path>` relative to the plan directory; with
/// `require_existing`, missing files are reported as asset_missing.
AssetResolver file_resolver(const plan::LoadedPlan& loaded, bool require_existing);

/// One trial that will produce a TrialRecord, in execution order.
struct TrialSlot {
  std::string loop_name;
  std::size_t rep_index = 0;
  std::size_t row_index = 0;
  std::string routine_name;
  std::string correct_answer;
  std::int64_t window_ms = 0;
};

/// Record-producing trials of a plan; throws RuntimeError(invalid_plan).
std::vector<TrialSlot> trial_slots(const plan::LoadedPlan& loaded);

class Session {
 public:
  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;
  ~Session();

  std::vector<Directive> tick(std::int64_t now_ms);
  std::vector<Directive> key_event(std::string_view key, std::int64_t now_ms);
  SessionResult finish() const;

  bool finished() const;
  /// Record-producing trials not yet resolved.
  std::size_t pending_trials() const;
  std::size_t total_trials() const;
  const SessionConfig& config() const;

 private:
  struct State;
  explicit Session(std::unique_ptr<State> state);
  friend Session start_session(const plan::LoadedPlan&, SessionConfig, AssetResolver);

  std::unique_ptr<State> state_;
};

Session start_session(const plan::LoadedPlan& loaded, SessionConfig config,
                      AssetResolver resolver);

// ---------------------------------------------------------------------------
// Headless runs

struct ScriptedEvent {
  std::int64_t at_ms = 0;
  std::string key;
};

class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV with header `at_ms,kind,key`; kind must be `key`. Throws ScriptError.
std::vector<ScriptedEvent> parse_script(std::string_view text);
std::vector<ScriptedEvent> load_script(const std::filesystem::path& path);

struct HeadlessRun {
  SessionResult result;
  std::vector<Directive> log;
};

/// Drives a session from clock 0 in steps of config.tick_ms, delivering each
/// scripted key at its exact time. Keys after SessionEnd are dropped.
HeadlessRun run_headless(const plan::LoadedPlan& loaded, SessionConfig config,
                         AssetResolver resolver, std::vector<ScriptedEvent> events);

/// One JSON object per directive, no trailing newline.
std::string to_json_line(const Directive& directive);

}  // namespace sonda::runtime

#endif  // SONDA_RUNTIME_HPP_
