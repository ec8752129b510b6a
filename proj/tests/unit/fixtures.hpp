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

#ifndef SONDA_TESTS_UNIT_FIXTURES_HPP_
#define SONDA_TESTS_UNIT_FIXTURES_HPP_

#include <filesystem>
#include <string>

#include "sonda/bundled.hpp"
#include "sonda/plan.hpp"
#include "support.hpp"

namespace sonda::testing {

// The four bundled trainings, written once per test binary.
inline const std::filesystem::path& bundled_dir() {
  static TempDir dir;
  static const bool written = [] {
    bundled::write_all(dir.path());
    return true;
  }();
  (void)written;
  return dir.path();
}

inline plan::LoadedPlan load_bundled(const std::string& id) {
  const auto& dir = bundled_dir();
  return plan::load_tables(plan::load_plan_file(dir / (id + ".training.json")), dir);
}

}  // namespace sonda::testing

#endif  // SONDA_TESTS_UNIT_FIXTURES_HPP_
