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

#ifndef SONDA_PLAN_HPP_
#define SONDA_PLAN_HPP_

/// \file
/// Training plans: routines made of timed components, condition-table loops
/// and the flow that sequences them.
///
/// A plan is authored as a single `.training.json` document. String fields
/// that may vary per trial are templates: `$column` is replaced by the value
/// of that column in the current condition-table row, `$$` is a literal `$`.
///
/// Paths inside a plan are relative. Condition tables are resolved against
/// the directory holding the plan file; stimulus sources and narration files
/// against `<plan dir>/<assets_dir>`.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sonda::plan {

struct TextComponent {
  std::string content;
  double start_s = 0.0;
  /// Absent: shown until the routine ends.
  std::optional<double> stop_s;
  std::optional<std::string> narration;

  bool operator==(const TextComponent&) const = default;
};

struct ImageComponent {
  std::string source;
  double start_s = 0.0;
  std::optional<double> stop_s;

  bool operator==(const ImageComponent&) const = default;
};

struct AudioComponent {
  std::string source;
  double start_s = 0.0;

  bool operator==(const AudioComponent&) const = default;
};

struct KeyResponseComponent {
  std::vector<std::string> allowed_keys;
  std::string correct_from;
  double window_s = 10.0;
  /// Offset at which the response window opens.
  double start_s = 0.0;

  bool operator==(const KeyResponseComponent&) const = default;
};

struct FeedbackComponent {
  std::string correct_message;
  std::string incorrect_message;
  std::string timeout_message;
  double duration_s = 1.0;

  bool operator==(const FeedbackComponent&) const = default;
};

using Component = std::variant<TextComponent, ImageComponent, AudioComponent,
                               KeyResponseComponent, FeedbackComponent>;

struct Routine {
  std::string name;
  std::vector<Component> components;
  /// 0 means the routine ends when its timed components, response window
  /// and feedback have all finished.
  double duration_s = 0.0;

  const KeyResponseComponent* key_response() const;
  const FeedbackComponent* feedback() const;

  bool operator==(const Routine&) const = default;
};

enum class LoopOrder { sequential, random };

struct Loop {
  std::string name;
  std::string table;
  LoopOrder order = LoopOrder::sequential;
  std::int64_t n_reps = 1;
  std::optional<std::vector<std::size_t>> rows;
  std::vector<std::string> body;
  std::optional<std::uint64_t> seed;

  bool operator==(const Loop&) const = default;
};

struct RoutineRef {
  std::string routine;

  bool operator==(const RoutineRef&) const = default;
};

using FlowItem = std::variant<RoutineRef, Loop>;

struct TrainingPlan {
  std::string id;
  std::string title;
  std::string description;
  std::string locale;
  std::vector<Routine> routines;
  std::vector<FlowItem> flow;
  std::string assets_dir;

  const Routine* find_routine(std::string_view name) const;
  std::vector<const Loop*> loops() const;

  bool operator==(const TrainingPlan&) const = default;
};

struct ConditionTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;

  bool operator==(const ConditionTable&) const = default;
};

struct TrialBinding {
  std::string loop_name;
  std::size_t rep_index = 0;
  std::size_t row_index = 0;
  std::map<std::string, std::string> bindings;

  bool operator==(const TrialBinding&) const = default;
};

// ---------------------------------------------------------------------------
// Errors

enum class ParseErrorKind {
  syntax,
  unknown_field,
  bad_reference,
  bad_placeholder,
  invalid_value,
  ragged_row,
  empty_header,
  duplicate_column,
};

std::string_view to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::string message, std::string field = {},
             std::size_t line = 0);

  ParseErrorKind kind() const noexcept { return kind_; }
  /// JSON pointer of the offending value, if known.
  const std::string& field() const noexcept { return field_; }
  /// 1-based line, or 0 when not applicable.
  std::size_t line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ParseErrorKind kind_;
  std::string message_;
  std::string field_;
  std::size_t line_;
};

class MissingSeed : public std::runtime_error {
 public:
  explicit MissingSeed(const std::string& loop_name)
      : std::runtime_error("loop '" + loop_name + "' has random order but no seed") {}
};

// ---------------------------------------------------------------------------
// Templates

bool is_identifier(std::string_view text);

/// Column names referenced by `text`, in order of appearance (with repeats).
/// Throws ParseError(bad_placeholder) on a `$` not followed by `$` or an
/// identifier.
std::vector<std::string> placeholders(std::string_view text);

bool has_placeholders(std::string_view text);

/// Replaces every `$column` by its bound value and `$$` by `$`. Throws
/// std::out_of_range when a column is unbound.
std::string substitute(std::string_view text,
                       const std::map<std::string, std::string>& bindings);

/// All template-bearing strings of a component.
std::vector<std::string_view> template_fields(const Component& component);

/// Relative, non-empty, no `..` segments, no backslashes.
bool is_safe_relative_path(std::string_view path);

// ---------------------------------------------------------------------------
// Operations

TrainingPlan parse_plan(std::string_view document);
TrainingPlan load_plan_file(const std::filesystem::path& path);

/// Pretty-printed JSON in the training-definition format.
std::string serialize_plan(const TrainingPlan& plan);

/// Checks the invariants that do not need any file: ids, name uniqueness,
/// references, placeholder syntax, ranges, path shapes. parse_plan runs this
/// after reading; the runtime runs it again on plans built in code.
void check_plan_structure(const TrainingPlan& plan);

ConditionTable parse_table(std::string_view text);
ConditionTable load_table(const std::filesystem::path& path);

/// Rows selected by `loop.rows` (all rows when absent). Throws
/// ParseError(bad_reference) for an index outside the table.
std::vector<std::size_t> selected_rows(const Loop& loop, const ConditionTable& table);

std::vector<TrialBinding> expand_trials(const Loop& loop, const ConditionTable& table);

enum class Severity { error, warning };

struct Finding {
  Severity severity = Severity::error;
  std::string location;
  std::string message;

  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  std::size_t error_count() const;
  std::size_t warning_count() const;
  bool ok() const { return error_count() == 0; }

  bool operator==(const ValidationReport&) const = default;
};

std::string_view to_string(Severity severity);

/// `root` is the directory holding the plan file.
ValidationReport validate_plan(const TrainingPlan& plan, const std::filesystem::path& root);

/// A plan together with its condition tables, keyed by loop name.
struct LoadedPlan {
  TrainingPlan plan;
  std::filesystem::path root;
  std::map<std::string, ConditionTable> tables;
};

LoadedPlan load_tables(TrainingPlan plan, const std::filesystem::path& root);

}  // namespace sonda::plan

#endif  // SONDA_PLAN_HPP_
