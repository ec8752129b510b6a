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

#ifndef SONDA_BUNDLED_HPP_
#define SONDA_BUNDLED_HPP_

/// \file
/// The trainings shipped with sonda, generated from code together with
/// their condition tables and stimuli:
///
///   prototype         three modules of noisy tones (260-280, 300-320,
///                     480-500 Hz), three trials each
///   workshop-1        simple functions (4), emission/absorption lines by
///                     ear only (10), the same lines with plots (10)
///   workshop-2-day-1  glitch classes (3), particles from one event (5),
///                     muon yes/no (2), with narrated instructions
///   workshop-2-day-2  glitches (6), particles from two events (5 + 5),
///                     muons (6)
///
/// Data series are synthetic stand-ins shaped like the real signals. The
/// narration files are short placeholder tones meant to be replaced by
/// recorded speech.
///
/// For a training `<id>` written into `dir`:
///
///     dir/<id>.training.json
///     dir/<id>/tables/*.csv
///     dir/<id>/assets/...

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sonda/plan.hpp"

namespace sonda::bundled {

const std::vector<std::string>& training_ids();

/// Throws std::invalid_argument for an unknown id.
plan::TrainingPlan make_plan(std::string_view id);

/// Writes the plan, its tables and its stimuli. Returns the plan file path.
std::filesystem::path write_training(std::string_view id, const std::filesystem::path& dir);

std::vector<std::filesystem::path> write_all(const std::filesystem::path& dir);

}  // namespace sonda::bundled

#endif  // SONDA_BUNDLED_HPP_
