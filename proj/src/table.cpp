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

#include <fstream>
#include <set>
#include <sstream>

#include "sonda/csv.hpp"
#include "sonda/plan.hpp"
#include "sonda/prng.hpp"

namespace sonda::plan {

ConditionTable parse_table(std::string_view text) {
  std::vector<csv::Record> records;
  try {
    records = csv::parse(text);
  } catch (const csv::SyntaxError& e) {
    throw ParseError(ParseErrorKind::syntax, e.what(), {}, e.line());
  }
  // Blank lines at the end of a file are not rows.
  while (!records.empty() && records.back().fields.size() == 1 &&
         records.back().fields.front().empty()) {
    records.pop_back();
  }
  if (records.empty()) {
    throw ParseError(ParseErrorKind::empty_header, "table has no header", {}, 1);
  }

  ConditionTable table;
  table.header = std::move(records.front().fields);
  std::set<std::string> seen;
  for (const auto& name : table.header) {
    if (name.empty()) {
      throw ParseError(ParseErrorKind::empty_header, "empty column name", {}, 1);
    }
    if (!seen.insert(name).second) {
      throw ParseError(ParseErrorKind::duplicate_column, "duplicate column '" + name + "'", {},
                       1);
    }
  }
  for (std::size_t k = 1; k < records.size(); ++k) {
    auto& rec = records[k];
    if (rec.fields.size() != table.header.size()) {
      throw ParseError(ParseErrorKind::ragged_row,
                       "row " + std::to_string(k) + " has " +
                           std::to_string(rec.fields.size()) + " cells, expected " +
                           std::to_string(table.header.size()),
                       {}, rec.line);
    }
    table.rows.push_back(std::move(rec.fields));
  }
  return table;
}

ConditionTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseErrorKind::bad_reference, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_table(buf.str());
}

std::vector<std::size_t> selected_rows(const Loop& loop, const ConditionTable& table) {
  if (!loop.rows) {
    std::vector<std::size_t> all(table.rows.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    return all;
  }
  for (std::size_t idx : *loop.rows) {
    if (idx >= table.rows.size()) {
      throw ParseError(ParseErrorKind::bad_reference,
                       "loop '" + loop.name + "' selects row " + std::to_string(idx) +
                           " but the table has " + std::to_string(table.rows.size()) +
                           " rows");
    }
  }
  return *loop.rows;
}

std::vector<TrialBinding> expand_trials(const Loop& loop, const ConditionTable& table) {
  if (loop.order == LoopOrder::random && !loop.seed) throw MissingSeed(loop.name);
  const std::vector<std::size_t> rows = selected_rows(loop, table);

  std::vector<TrialBinding> trials;
  trials.reserve(rows.size() * static_cast<std::size_t>(std::max<std::int64_t>(loop.n_reps, 0)));
  SplitMix64 rng(loop.seed.value_or(0));
  for (std::int64_t rep = 0; rep < loop.n_reps; ++rep) {
    std::vector<std::size_t> block = rows;
    if (loop.order == LoopOrder::random) shuffle(std::span<std::size_t>(block), rng);
    for (std::size_t row : block) {
      TrialBinding t;
      t.loop_name = loop.name;
      t.rep_index = static_cast<std::size_t>(rep);
      t.row_index = row;
      for (std::size_t c = 0; c < table.header.size(); ++c) {
        t.bindings.emplace(table.header[c], table.rows[row][c]);
      }
      trials.push_back(std::move(t));
    }
  }
  return trials;
}

LoadedPlan load_tables(TrainingPlan plan, const std::filesystem::path& root) {
  LoadedPlan out;
  out.root = root;
  for (const Loop* loop : plan.loops()) {
    out.tables.emplace(loop->name, load_table(root / loop->table));
  }
  out.plan = std::move(plan);
  return out;
}

}  // namespace sonda::plan
