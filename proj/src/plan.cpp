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

#include "sonda/plan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sonda::plan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Accessors

const KeyResponseComponent* Routine::key_response() const {
  for (const auto& c : components) {
    if (const auto* k = std::get_if<KeyResponseComponent>(&c)) return k;
  }
  return nullptr;
}

const FeedbackComponent* Routine::feedback() const {
  for (const auto& c : components) {
    if (const auto* f = std::get_if<FeedbackComponent>(&c)) return f;
  }
  return nullptr;
}

const Routine* TrainingPlan::find_routine(std::string_view name) const {
  for (const auto& r : routines) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::vector<const Loop*> TrainingPlan::loops() const {
  std::vector<const Loop*> out;
  for (const auto& item : flow) {
    if (const auto* loop = std::get_if<Loop>(&item)) out.push_back(loop);
  }
  return out;
}

std::optional<std::size_t> ConditionTable::column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::syntax: return "syntax";
    case ParseErrorKind::unknown_field: return "unknown_field";
    case ParseErrorKind::bad_reference: return "bad_reference";
    case ParseErrorKind::bad_placeholder: return "bad_placeholder";
    case ParseErrorKind::invalid_value: return "invalid_value";
    case ParseErrorKind::ragged_row: return "ragged_row";
    case ParseErrorKind::empty_header: return "empty_header";
    case ParseErrorKind::duplicate_column: return "duplicate_column";
  }
  return "unknown";
}

namespace {

std::string describe(ParseErrorKind kind, const std::string& message,
                     const std::string& field, std::size_t line) {
  std::string out(to_string(kind));
  if (line) out += " at line " + std::to_string(line);
  if (!field.empty()) out += " at " + field;
  out += ": " + message;
  return out;
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, std::string message, std::string field,
                       std::size_t line)
    : std::runtime_error(describe(kind, message, field, line)),
      kind_(kind),
      message_(std::move(message)),
      field_(std::move(field)),
      line_(line) {}

// ---------------------------------------------------------------------------
// Templates

namespace {

bool is_ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

// Calls on_text(segment) for literal runs and on_column(name) for placeholders.
template <typename OnText, typename OnColumn>
void scan_template(std::string_view text, OnText&& on_text, OnColumn&& on_column) {
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t dollar = text.find('$', i);
    if (dollar == std::string_view::npos) {
      on_text(text.substr(i));
      return;
    }
    on_text(text.substr(i, dollar - i));
    if (dollar + 1 < text.size() && text[dollar + 1] == '$') {
      on_text("$");
      i = dollar + 2;
      continue;
    }
    std::size_t end = dollar + 1;
    if (end >= text.size() || !is_ident_start(text[end])) {
      throw ParseError(ParseErrorKind::bad_placeholder,
                       "'$' must be followed by '$' or a column name in \"" +
                           std::string(text) + "\"");
    }
    while (end < text.size() && is_ident_char(text[end])) ++end;
    on_column(text.substr(dollar + 1, end - dollar - 1));
    i = end;
  }
}

}  // namespace

bool is_identifier(std::string_view text) {
  if (text.empty() || !is_ident_start(text.front())) return false;
  return std::all_of(text.begin(), text.end(), is_ident_char);
}

std::vector<std::string> placeholders(std::string_view text) {
  std::vector<std::string> out;
  scan_template(
      text, [](std::string_view) {}, [&](std::string_view c) { out.emplace_back(c); });
  return out;
}

bool has_placeholders(std::string_view text) { return !placeholders(text).empty(); }

std::string substitute(std::string_view text,
                       const std::map<std::string, std::string>& bindings) {
  std::string out;
  scan_template(
      text, [&](std::string_view s) { out += s; },
      [&](std::string_view c) {
        auto it = bindings.find(std::string(c));
        if (it == bindings.end()) {
          throw std::out_of_range("unbound column '" + std::string(c) + "'");
        }
        out += it->second;
      });
  return out;
}

std::vector<std::string_view> template_fields(const Component& component) {
  return std::visit(
      [](const auto& c) -> std::vector<std::string_view> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, TextComponent>) {
          std::vector<std::string_view> v{c.content};
          if (c.narration) v.push_back(*c.narration);
          return v;
        } else if constexpr (std::is_same_v<T, ImageComponent> ||
                             std::is_same_v<T, AudioComponent>) {
          return {c.source};
        } else if constexpr (std::is_same_v<T, KeyResponseComponent>) {
          return {c.correct_from};
        } else {
          return {c.correct_message, c.incorrect_message, c.timeout_message};
        }
      },
      component);
}

bool is_safe_relative_path(std::string_view path) {
  if (path.empty() || path.front() == '/' || path.find('\\') != std::string_view::npos ||
      path.find('\0') != std::string_view::npos) {
    return false;
  }
  if (path.size() >= 2 && path[1] == ':') return false;
  std::size_t i = 0;
  while (i <= path.size()) {
    std::size_t slash = path.find('/', i);
    if (slash == std::string_view::npos) slash = path.size();
    if (path.substr(i, slash - i) == "..") return false;
    i = slash + 1;
  }
  return true;
}

// ---------------------------------------------------------------------------
// JSON reading

namespace {

std::string pointer_join(const std::string& base, std::string_view key) {
  return base + "/" + std::string(key);
}

std::string pointer_join(const std::string& base, std::size_t index) {
  return base + "/" + std::to_string(index);
}

/// Reads the members of one JSON object, rejecting members it was never
/// asked about.
class ObjectReader {
 public:
  ObjectReader(const json& value, std::string pointer) : value_(value), pointer_(std::move(pointer)) {
    if (!value_.is_object()) {
      throw ParseError(ParseErrorKind::syntax, "expected an object", pointer_);
    }
  }

  const std::string& pointer() const { return pointer_; }
  std::string at(std::string_view key) const { return pointer_join(pointer_, key); }

  const json* find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = value_.find(std::string(key));
    if (it == value_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  const json& require(std::string_view key) {
    const json* v = find(key);
    if (!v) throw ParseError(ParseErrorKind::syntax, "missing required field", at(key));
    return *v;
  }

  std::string string(std::string_view key) { return as_string(require(key), at(key)); }

  std::optional<std::string> optional_string(std::string_view key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return as_string(*v, at(key));
  }

  double number(std::string_view key) { return as_number(require(key), at(key)); }

  std::optional<double> optional_number(std::string_view key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return as_number(*v, at(key));
  }

  const json& array(std::string_view key) {
    const json& v = require(key);
    if (!v.is_array()) throw ParseError(ParseErrorKind::syntax, "expected an array", at(key));
    return v;
  }

  void finish() const {
    for (auto it = value_.begin(); it != value_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ParseError(ParseErrorKind::unknown_field, "unknown field '" + it.key() + "'",
                         at(it.key()));
      }
    }
  }

  static std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ParseError(ParseErrorKind::syntax, "expected a string", where);
    return v.get<std::string>();
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(ParseErrorKind::syntax, "expected a number", where);
    return v.get<double>();
  }

 private:
  const json& value_;
  std::string pointer_;
  std::set<std::string> seen_;
};

std::vector<std::string> string_list(const json& array, const std::string& where) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < array.size(); ++k) {
    out.push_back(ObjectReader::as_string(array[k], pointer_join(where, k)));
  }
  return out;
}

Component read_component(const json& value, const std::string& where) {
  ObjectReader r(value, where);
  const std::string type = r.string("type");
  Component out;
  if (type == "text") {
    TextComponent c;
    c.content = r.string("content");
    c.start_s = r.optional_number("start_s").value_or(0.0);
    c.stop_s = r.optional_number("stop_s");
    c.narration = r.optional_string("narration");
    out = std::move(c);
  } else if (type == "image") {
    ImageComponent c;
    c.source = r.string("source");
    c.start_s = r.optional_number("start_s").value_or(0.0);
    c.stop_s = r.optional_number("stop_s");
    out = std::move(c);
  } else if (type == "audio") {
    AudioComponent c;
    c.source = r.string("source");
    c.start_s = r.optional_number("start_s").value_or(0.0);
    out = std::move(c);
  } else if (type == "key_response") {
    KeyResponseComponent c;
    c.allowed_keys = string_list(r.array("allowed_keys"), r.at("allowed_keys"));
    c.correct_from = r.string("correct_from");
    c.window_s = r.number("window_s");
    c.start_s = r.optional_number("start_s").value_or(0.0);
    out = std::move(c);
  } else if (type == "feedback") {
    FeedbackComponent c;
    c.correct_message = r.string("correct_message");
    c.incorrect_message = r.string("incorrect_message");
    c.timeout_message = r.optional_string("timeout_message").value_or(c.incorrect_message);
    c.duration_s = r.number("duration_s");
    out = std::move(c);
  } else {
    throw ParseError(ParseErrorKind::invalid_value, "unknown component type '" + type + "'",
                     r.at("type"));
  }
  r.finish();
  return out;
}

Routine read_routine(const json& value, const std::string& where) {
  ObjectReader r(value, where);
  Routine routine;
  routine.name = r.string("name");
  routine.duration_s = r.optional_number("duration_s").value_or(0.0);
  const json& comps = r.array("components");
  for (std::size_t k = 0; k < comps.size(); ++k) {
    routine.components.push_back(read_component(comps[k], pointer_join(r.at("components"), k)));
  }
  r.finish();
  return routine;
}

std::int64_t read_integer(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && std::floor(d) == d) return static_cast<std::int64_t>(d);
  }
  throw ParseError(ParseErrorKind::invalid_value, "expected an integer", where);
}

FlowItem read_flow_item(const json& value, const std::string& where) {
  ObjectReader r(value, where);
  const std::string type = r.string("type");
  FlowItem out;
  if (type == "routine") {
    out = RoutineRef{r.string("routine")};
  } else if (type == "loop") {
    Loop loop;
    loop.name = r.string("name");
    loop.table = r.string("table");
    if (auto order = r.optional_string("order")) {
      if (*order == "sequential") {
        loop.order = LoopOrder::sequential;
      } else if (*order == "random") {
        loop.order = LoopOrder::random;
      } else {
        throw ParseError(ParseErrorKind::invalid_value,
                         "order must be 'sequential' or 'random'", r.at("order"));
      }
    }
    if (const json* reps = r.find("n_reps")) loop.n_reps = read_integer(*reps, r.at("n_reps"));
    if (const json* rows = r.find("rows")) {
      if (!rows->is_array()) {
        throw ParseError(ParseErrorKind::syntax, "expected an array", r.at("rows"));
      }
      std::vector<std::size_t> indices;
      for (std::size_t k = 0; k < rows->size(); ++k) {
        const std::string at = pointer_join(r.at("rows"), k);
        const std::int64_t idx = read_integer((*rows)[k], at);
        if (idx < 0) throw ParseError(ParseErrorKind::invalid_value, "row index < 0", at);
        indices.push_back(static_cast<std::size_t>(idx));
      }
      loop.rows = std::move(indices);
    }
    loop.body = string_list(r.array("body"), r.at("body"));
    if (const json* seed = r.find("seed")) {
      if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0)) {
        throw ParseError(ParseErrorKind::invalid_value, "seed must be an unsigned integer",
                         r.at("seed"));
      }
      loop.seed = seed->get<std::uint64_t>();
    }
    out = std::move(loop);
  } else {
    throw ParseError(ParseErrorKind::invalid_value, "unknown flow item type '" + type + "'",
                     r.at("type"));
  }
  r.finish();
  return out;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

}  // namespace

TrainingPlan parse_plan(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(ParseErrorKind::syntax, e.what(), {},
                     line_of_offset(document, e.byte > 0 ? e.byte - 1 : 0));
  }

  ObjectReader r(doc, "");
  TrainingPlan plan;
  plan.id = r.string("id");
  plan.title = r.string("title");
  plan.description = r.optional_string("description").value_or("");
  plan.locale = r.optional_string("locale").value_or("en");
  plan.assets_dir = r.optional_string("assets_dir").value_or("assets");
  const json& routines = r.array("routines");
  for (std::size_t k = 0; k < routines.size(); ++k) {
    plan.routines.push_back(read_routine(routines[k], pointer_join("/routines", k)));
  }
  const json& flow = r.array("flow");
  for (std::size_t k = 0; k < flow.size(); ++k) {
    plan.flow.push_back(read_flow_item(flow[k], pointer_join("/flow", k)));
  }
  r.finish();

  check_plan_structure(plan);
  return plan;
}

TrainingPlan load_plan_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(ParseErrorKind::bad_reference, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str());
}

// ---------------------------------------------------------------------------
// JSON writing

namespace {

json component_json(const Component& component) {
  return std::visit(
      [](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        json j;
        if constexpr (std::is_same_v<T, TextComponent>) {
          j["type"] = "text";
          j["content"] = c.content;
          j["start_s"] = c.start_s;
          if (c.stop_s) j["stop_s"] = *c.stop_s;
          if (c.narration) j["narration"] = *c.narration;
        } else if constexpr (std::is_same_v<T, ImageComponent>) {
          j["type"] = "image";
          j["source"] = c.source;
          j["start_s"] = c.start_s;
          if (c.stop_s) j["stop_s"] = *c.stop_s;
        } else if constexpr (std::is_same_v<T, AudioComponent>) {
          j["type"] = "audio";
          j["source"] = c.source;
          j["start_s"] = c.start_s;
        } else if constexpr (std::is_same_v<T, KeyResponseComponent>) {
          j["type"] = "key_response";
          j["allowed_keys"] = c.allowed_keys;
          j["correct_from"] = c.correct_from;
          j["start_s"] = c.start_s;
          j["window_s"] = c.window_s;
        } else {
          j["type"] = "feedback";
          j["correct_message"] = c.correct_message;
          j["incorrect_message"] = c.incorrect_message;
          j["timeout_message"] = c.timeout_message;
          j["duration_s"] = c.duration_s;
        }
        return j;
      },
      component);
}

json flow_json(const FlowItem& item) {
  if (const auto* ref = std::get_if<RoutineRef>(&item)) {
    return json{{"type", "routine"}, {"routine", ref->routine}};
  }
  const Loop& loop = std::get<Loop>(item);
  json j;
  j["type"] = "loop";
  j["name"] = loop.name;
  j["table"] = loop.table;
  j["order"] = loop.order == LoopOrder::random ? "random" : "sequential";
  j["n_reps"] = loop.n_reps;
  if (loop.rows) j["rows"] = *loop.rows;
  j["body"] = loop.body;
  if (loop.seed) j["seed"] = *loop.seed;
  return j;
}

}  // namespace

std::string serialize_plan(const TrainingPlan& plan) {
  json j;
  j["id"] = plan.id;
  j["title"] = plan.title;
  j["description"] = plan.description;
  j["locale"] = plan.locale;
  j["assets_dir"] = plan.assets_dir;
  json routines = json::array();
  for (const auto& r : plan.routines) {
    json comps = json::array();
    for (const auto& c : r.components) comps.push_back(component_json(c));
    routines.push_back(json{{"name", r.name}, {"duration_s", r.duration_s}, {"components", comps}});
  }
  j["routines"] = std::move(routines);
  json flow = json::array();
  for (const auto& item : plan.flow) flow.push_back(flow_json(item));
  j["flow"] = std::move(flow);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Structural checks

namespace {

constexpr double kOffsetSlack = 1e-9;

bool valid_plan_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
  });
}

void check_seconds(double value, const std::string& where, bool strictly_positive) {
  if (!std::isfinite(value) || value < 0.0 || (strictly_positive && value == 0.0)) {
    throw ParseError(ParseErrorKind::invalid_value,
                     strictly_positive ? "must be a finite number > 0"
                                       : "must be a finite number >= 0",
                     where);
  }
}

void check_asset_template(const std::string& text, const std::string& where) {
  if (text.empty()) throw ParseError(ParseErrorKind::invalid_value, "empty path", where);
  if (!has_placeholders(text) && !is_safe_relative_path(text)) {
    throw ParseError(ParseErrorKind::invalid_value,
                     "path must be relative without '..' segments", where);
  }
}

void check_component(const Component& component, double routine_duration,
                     const std::string& where) {
  for (auto field : template_fields(component)) {
    try {
      placeholders(field);
    } catch (const ParseError& e) {
      throw ParseError(ParseErrorKind::bad_placeholder, e.message(), where);
    }
  }
  auto within = [&](double offset, const std::string& field) {
    if (routine_duration > 0.0 && offset > routine_duration + kOffsetSlack) {
      throw ParseError(ParseErrorKind::invalid_value,
                       "offset beyond routine duration", pointer_join(where, field));
    }
  };
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, TextComponent> || std::is_same_v<T, ImageComponent>) {
          check_seconds(c.start_s, pointer_join(where, "start_s"), false);
          within(c.start_s, "start_s");
          if (c.stop_s) {
            check_seconds(*c.stop_s, pointer_join(where, "stop_s"), false);
            if (*c.stop_s < c.start_s) {
              throw ParseError(ParseErrorKind::invalid_value, "stop_s before start_s",
                               pointer_join(where, "stop_s"));
            }
            within(*c.stop_s, "stop_s");
          }
          if constexpr (std::is_same_v<T, TextComponent>) {
            if (c.narration) check_asset_template(*c.narration, pointer_join(where, "narration"));
          } else {
            check_asset_template(c.source, pointer_join(where, "source"));
          }
        } else if constexpr (std::is_same_v<T, AudioComponent>) {
          check_seconds(c.start_s, pointer_join(where, "start_s"), false);
          within(c.start_s, "start_s");
          check_asset_template(c.source, pointer_join(where, "source"));
        } else if constexpr (std::is_same_v<T, KeyResponseComponent>) {
          if (c.allowed_keys.empty()) {
            throw ParseError(ParseErrorKind::invalid_value, "allowed_keys is empty",
                             pointer_join(where, "allowed_keys"));
          }
          std::set<std::string> seen;
          for (const auto& key : c.allowed_keys) {
            if (key.empty() || !seen.insert(key).second) {
              throw ParseError(ParseErrorKind::invalid_value,
                               "allowed_keys must be non-empty and unique",
                               pointer_join(where, "allowed_keys"));
            }
          }
          check_seconds(c.window_s, pointer_join(where, "window_s"), true);
          check_seconds(c.start_s, pointer_join(where, "start_s"), false);
          within(c.start_s + c.window_s, "window_s");
        } else {
          check_seconds(c.duration_s, pointer_join(where, "duration_s"), true);
        }
      },
      component);
}

}  // namespace

void check_plan_structure(const TrainingPlan& plan) {
  if (!valid_plan_id(plan.id)) {
    throw ParseError(ParseErrorKind::invalid_value, "id must match [a-z0-9-]+", "/id");
  }
  if (plan.assets_dir != "." && !is_safe_relative_path(plan.assets_dir)) {
    throw ParseError(ParseErrorKind::invalid_value,
                     "assets_dir must be relative without '..' segments", "/assets_dir");
  }

  std::set<std::string> routine_names;
  for (std::size_t k = 0; k < plan.routines.size(); ++k) {
    const Routine& routine = plan.routines[k];
    const std::string where = pointer_join("/routines", k);
    if (routine.name.empty()) {
      throw ParseError(ParseErrorKind::invalid_value, "routine name is empty", where + "/name");
    }
    if (!routine_names.insert(routine.name).second) {
      throw ParseError(ParseErrorKind::bad_reference,
                       "duplicate routine name '" + routine.name + "'", where + "/name");
    }
    check_seconds(routine.duration_s, where + "/duration_s", false);
    int keys = 0;
    int feedbacks = 0;
    for (std::size_t c = 0; c < routine.components.size(); ++c) {
      const Component& comp = routine.components[c];
      keys += std::holds_alternative<KeyResponseComponent>(comp);
      feedbacks += std::holds_alternative<FeedbackComponent>(comp);
      check_component(comp, routine.duration_s, pointer_join(where + "/components", c));
    }
    if (keys > 1 || feedbacks > 1) {
      throw ParseError(ParseErrorKind::invalid_value,
                       "at most one key_response and one feedback per routine",
                       where + "/components");
    }
    if (feedbacks == 1 && keys == 0) {
      throw ParseError(ParseErrorKind::invalid_value,
                       "feedback requires a key_response in the same routine",
                       where + "/components");
    }
  }

  if (plan.flow.empty()) {
    throw ParseError(ParseErrorKind::bad_reference, "flow must be non-empty", "/flow");
  }
  std::set<std::string> loop_names;
  for (std::size_t k = 0; k < plan.flow.size(); ++k) {
    const std::string where = pointer_join("/flow", k);
    if (const auto* ref = std::get_if<RoutineRef>(&plan.flow[k])) {
      if (!routine_names.count(ref->routine)) {
        throw ParseError(ParseErrorKind::bad_reference,
                         "unknown routine '" + ref->routine + "'", where + "/routine");
      }
      for (const auto& comp : plan.find_routine(ref->routine)->components) {
        for (auto field : template_fields(comp)) {
          if (has_placeholders(field)) {
            throw ParseError(ParseErrorKind::bad_placeholder,
                             "routine '" + ref->routine +
                                 "' uses placeholders but runs outside a loop",
                             where + "/routine");
          }
        }
      }
      continue;
    }
    const Loop& loop = std::get<Loop>(plan.flow[k]);
    if (loop.name.empty()) {
      throw ParseError(ParseErrorKind::invalid_value, "loop name is empty", where + "/name");
    }
    if (!loop_names.insert(loop.name).second) {
      throw ParseError(ParseErrorKind::bad_reference,
                       "duplicate loop name '" + loop.name + "'", where + "/name");
    }
    if (!is_safe_relative_path(loop.table)) {
      throw ParseError(ParseErrorKind::invalid_value,
                       "table must be a relative path without '..' segments", where + "/table");
    }
    if (loop.n_reps < 0) {
      throw ParseError(ParseErrorKind::invalid_value, "n_reps must be >= 0", where + "/n_reps");
    }
    if (loop.body.empty()) {
      throw ParseError(ParseErrorKind::bad_reference, "loop body is empty", where + "/body");
    }
    for (std::size_t b = 0; b < loop.body.size(); ++b) {
      if (!routine_names.count(loop.body[b])) {
        throw ParseError(ParseErrorKind::bad_reference,
                         "unknown routine '" + loop.body[b] + "'", pointer_join(where + "/body", b));
      }
    }
    if (loop.order == LoopOrder::random && !loop.seed) {
      throw ParseError(ParseErrorKind::invalid_value, "random order requires a seed",
                       where + "/seed");
    }
  }
}

}  // namespace sonda::plan
