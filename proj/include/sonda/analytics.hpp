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

#ifndef SONDA_ANALYTICS_HPP_
#define SONDA_ANALYTICS_HPP_

/// \file
/// Per-participant and per-block hit counts.
///
/// Percentages are kept as integer thousandths of a percent computed from
/// the exact ratio hits / trials, rounded half-up, so 19 of 60 is 31.667.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sonda/plan.hpp"
#include "sonda/runtime.hpp"

namespace sonda::analytics {

struct OutcomeCounts {
  std::int64_t hits = 0;
  std::int64_t misses = 0;
  std::int64_t no_answers = 0;

  std::int64_t total() const { return hits + misses + no_answers; }
  bool operator==(const OutcomeCounts&) const = default;
};

struct ParticipantReport {
  std::string participant_id;
  std::map<std::string, OutcomeCounts> per_block;

  bool operator==(const ParticipantReport&) const = default;
};

/// Trials each participant sees in one block (loop).
struct BlockSize {
  std::string block;
  std::int64_t trials = 0;

  bool operator==(const BlockSize&) const = default;
};

struct BlockReport {
  std::string block;
  std::int64_t participants = 0;
  std::int64_t trials_per_participant = 0;
  std::int64_t hits = 0;
  std::int64_t misses = 0;
  std::int64_t no_answers = 0;
  /// 100 * hits / (participants * trials_per_participant), in thousandths.
  std::int64_t hit_percent_milli = 0;

  double hit_percent() const { return static_cast<double>(hit_percent_milli) / 1000.0; }
  bool operator==(const BlockReport&) const = default;
};

class MismatchedBlocks : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ParticipantReport score_session(const runtime::SessionResult& result);

/// Output follows the order of `block_sizes`.
std::vector<BlockReport> aggregate(const std::vector<ParticipantReport>& reports,
                                   const std::vector<BlockSize>& block_sizes);

/// Round-half-up thousandths of 100 * numerator / denominator.
std::int64_t percent_milli(std::int64_t numerator, std::int64_t denominator);

/// "31.667"
std::string format_percent(std::int64_t milli);

/// Records per loop for one run of the plan, in flow order.
std::vector<BlockSize> block_sizes(const plan::LoadedPlan& loaded);

/// Scores every session and aggregates them against the plan's blocks.
/// No sessions gives an empty report.
std::vector<BlockReport> training_report(const plan::LoadedPlan& loaded,
                                         const std::vector<runtime::SessionResult>& sessions);

std::string render_text(const std::vector<BlockReport>& reports);
std::string render_csv(const std::vector<BlockReport>& reports);
std::string render_json(const std::vector<BlockReport>& reports);

}  // namespace sonda::analytics

#endif  // SONDA_ANALYTICS_HPP_
