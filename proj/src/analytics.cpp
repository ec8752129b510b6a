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

#include "sonda/analytics.hpp"

#include <algorithm>
#include <cstdio>

#include "json.hpp"
#include "sonda/csv.hpp"

namespace sonda::analytics {

ParticipantReport score_session(const runtime::SessionResult& result) {
  ParticipantReport report;
  report.participant_id = result.config.participant_id;
  for (const auto& r : result.records) {
    OutcomeCounts& c = report.per_block[r.loop_name];
    switch (r.outcome) {
      case runtime::Outcome::hit: ++c.hits; break;
      case runtime::Outcome::miss: ++c.misses; break;
      case runtime::Outcome::no_answer: ++c.no_answers; break;
    }
  }
  return report;
}

std::int64_t percent_milli(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0) return 0;
  return (200000 * numerator + denominator) / (2 * denominator);
}

std::string format_percent(std::int64_t milli) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%03lld", static_cast<long long>(milli / 1000),
                static_cast<long long>(milli % 1000));
  return buf;
}

std::vector<BlockReport> aggregate(const std::vector<ParticipantReport>& reports,
                                   const std::vector<BlockSize>& block_sizes) {
  if (reports.empty()) throw MismatchedBlocks("no participant reports to aggregate");

  std::map<std::string, std::int64_t> sizes;
  for (const auto& b : block_sizes) sizes[b.block] = b.trials;

  for (const auto& report : reports) {
    for (const auto& [block, counts] : report.per_block) {
      auto it = sizes.find(block);
      if (it == sizes.end()) {
        throw MismatchedBlocks("participant '" + report.participant_id +
                               "' has records for unknown block '" + block + "'");
      }
    }
    for (const auto& [block, trials] : sizes) {
      auto it = report.per_block.find(block);
      const std::int64_t seen = it == report.per_block.end() ? 0 : it->second.total();
      if (seen != trials) {
        throw MismatchedBlocks("participant '" + report.participant_id + "' has " +
                               std::to_string(seen) + " records in block '" + block +
                               "', expected " + std::to_string(trials));
      }
    }
  }

  std::vector<BlockReport> out;
  for (const auto& b : block_sizes) {
    BlockReport r;
    r.block = b.block;
    r.participants = static_cast<std::int64_t>(reports.size());
    r.trials_per_participant = b.trials;
    for (const auto& report : reports) {
      auto it = report.per_block.find(b.block);
      if (it == report.per_block.end()) continue;
      r.hits += it->second.hits;
      r.misses += it->second.misses;
      r.no_answers += it->second.no_answers;
    }
    r.hit_percent_milli = percent_milli(r.hits, r.participants * r.trials_per_participant);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<BlockSize> block_sizes(const plan::LoadedPlan& loaded) {
  std::vector<BlockSize> out;
  for (const plan::Loop* loop : loaded.plan.loops()) out.push_back({loop->name, 0});
  for (const auto& slot : runtime::trial_slots(loaded)) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const BlockSize& b) { return b.block == slot.loop_name; });
    if (it == out.end()) {
      out.push_back({slot.loop_name, 1});
    } else {
      ++it->trials;
    }
  }
  // Loops whose body never asks for a response produce no records.
  out.erase(std::remove_if(out.begin(), out.end(), [](const BlockSize& b) { return b.trials == 0; }),
            out.end());
  return out;
}

std::vector<BlockReport> training_report(const plan::LoadedPlan& loaded,
                                         const std::vector<runtime::SessionResult>& sessions) {
  if (sessions.empty()) return {};
  std::vector<ParticipantReport> reports;
  reports.reserve(sessions.size());
  for (const auto& s : sessions) reports.push_back(score_session(s));
  return aggregate(reports, block_sizes(loaded));
}

std::string render_text(const std::vector<BlockReport>& reports) {
  const std::vector<std::string> header{"block", "participants", "hits", "misses", "no_answers",
                                        "hit_percent"};
  std::vector<std::vector<std::string>> rows{header};
  for (const auto& r : reports) {
    rows.push_back({r.block, std::to_string(r.participants), std::to_string(r.hits),
                    std::to_string(r.misses), std::to_string(r.no_answers),
                    format_percent(r.hit_percent_milli)});
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      // Block names left-aligned, numbers right-aligned.
      const std::string pad(widths[c] - row[c].size(), ' ');
      line += c == 0 ? row[c] + pad : pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string render_csv(const std::vector<BlockReport>& reports) {
  std::string out =
      csv::format_record({"block", "participants", "hits", "misses", "no_answers", "hit_percent"});
  for (const auto& r : reports) {
    out += csv::format_record({r.block, std::to_string(r.participants), std::to_string(r.hits),
                               std::to_string(r.misses), std::to_string(r.no_answers),
                               format_percent(r.hit_percent_milli)});
  }
  return out;
}

std::string render_json(const std::vector<BlockReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["block"] = r.block;
    j["participants"] = r.participants;
    j["trials_per_participant"] = r.trials_per_participant;
    j["hits"] = r.hits;
    j["misses"] = r.misses;
    j["no_answers"] = r.no_answers;
    j["hit_percent"] = r.hit_percent();
    j["hit_percent_text"] = format_percent(r.hit_percent_milli);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace sonda::analytics
