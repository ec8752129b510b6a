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
#include <set>
#include <system_error>

#include "sonda/plan.hpp"

namespace sonda::plan {

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Severity::error;
  }));
}

std::size_t ValidationReport::warning_count() const {
  return findings.size() - error_count();
}

std::string_view to_string(Severity severity) {
  return severity == Severity::error ? "error" : "warning";
}

namespace {

// Stimulus and narration paths of a component (not messages or answers).
std::vector<std::string_view> asset_fields(const Component& component) {
  if (const auto* t = std::get_if<TextComponent>(&component)) {
    if (t->narration) return {*t->narration};
    return {};
  }
  if (const auto* i = std::get_if<ImageComponent>(&component)) return {i->source};
  if (const auto* a = std::get_if<AudioComponent>(&component)) return {a->source};
  return {};
}

bool file_exists(const std::filesystem::path& p) {
  std::error_code ec;
  return std::filesystem::is_regular_file(p, ec);
}

}  // namespace

ValidationReport validate_plan(const TrainingPlan& plan, const std::filesystem::path& root) {
  ValidationReport report;
  auto error = [&](std::string location, std::string message) {
    report.findings.push_back({Severity::error, std::move(location), std::move(message)});
  };
  auto warning = [&](std::string location, std::string message) {
    report.findings.push_back({Severity::warning, std::move(location), std::move(message)});
  };

  try {
    check_plan_structure(plan);
  } catch (const ParseError& e) {
    error(e.field().empty() ? "plan" : e.field(),
          std::string(to_string(e.kind())) + ": " + e.message());
  }

  const std::filesystem::path asset_root = root / plan.assets_dir;

  for (const auto& routine : plan.routines) {
    for (const auto& component : routine.components) {
      for (auto path : asset_fields(component)) {
        bool templated = false;
        try {
          templated = has_placeholders(path);
        } catch (const ParseError&) {
          continue;  // already reported by the structural check
        }
        if (templated || !is_safe_relative_path(path)) continue;
        if (!file_exists(asset_root / path)) {
          error("routine '" + routine.name + "'",
                "missing asset '" + std::string(path) + "'");
        }
      }
    }
  }

  for (const Loop* loop : plan.loops()) {
    const std::string where = "loop '" + loop->name + "'";
    if (!is_safe_relative_path(loop->table)) continue;

    ConditionTable table;
    try {
      table = load_table(root / loop->table);
    } catch (const ParseError& e) {
      error(where, "table '" + loop->table + "': " + e.what());
      continue;
    }

    std::vector<std::size_t> rows;
    try {
      rows = selected_rows(*loop, table);
    } catch (const ParseError& e) {
      error(where, e.message());
      continue;
    }

    std::set<std::pair<std::string, std::string>> reported;
    for (const auto& name : loop->body) {
      const Routine* routine = plan.find_routine(name);
      if (!routine) continue;
      for (const auto& component : routine->components) {
        bool resolved = true;
        for (auto field : template_fields(component)) {
          std::vector<std::string> columns;
          try {
            columns = placeholders(field);
          } catch (const ParseError&) {
            resolved = false;
            continue;
          }
          for (const auto& column : columns) {
            if (table.column(column)) continue;
            resolved = false;
            if (reported.emplace(routine->name, column).second) {
              error(where, "table '" + loop->table + "' has no column '" + column +
                               "' used by routine '" + routine->name + "'");
            }
          }
        }
        if (!resolved) continue;

        for (auto path : asset_fields(component)) {
          if (!has_placeholders(path)) continue;
          for (std::size_t row : rows) {
            std::map<std::string, std::string> bindings;
            for (std::size_t c = 0; c < table.header.size(); ++c) {
              bindings.emplace(table.header[c], table.rows[row][c]);
            }
            const std::string resolved_path = substitute(path, bindings);
            const std::string at = where + " row " + std::to_string(row);
            if (!is_safe_relative_path(resolved_path)) {
              error(at, "unsafe asset path '" + resolved_path + "'");
            } else if (!file_exists(asset_root / resolved_path)) {
              warning(at, "missing asset '" + resolved_path + "'");
            }
          }
        }
      }
    }
  }
  return report;
}

}  // namespace sonda::plan
