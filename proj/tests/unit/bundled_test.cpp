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

#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "sonda/analytics.hpp"
#include "sonda/runtime.hpp"

using namespace sonda;

TEST_CASE("bundled trainings validate cleanly") {
  CHECK(bundled::training_ids().size() == 4);
  for (const auto& id : bundled::training_ids()) {
    CAPTURE(id);
    const auto p = plan::load_plan_file(testing::bundled_dir() / (id + ".training.json"));
    CHECK(p == bundled::make_plan(id));
    const auto report = plan::validate_plan(p, testing::bundled_dir());
    CHECK(report.error_count() == 0);
    CHECK(report.warning_count() == 0);
  }
  CHECK_THROWS_AS(bundled::make_plan("nope"), std::invalid_argument);
}

TEST_CASE("bundled plans are reproducible") {
  testing::TempDir dir;
  bundled::write_training("prototype", dir.path());
  for (const char* rel : {"prototype.training.json", "prototype/tables/condiciones.csv",
                          "prototype/assets/tones/tone_490.wav", "prototype/assets/tones/tone_490.svg"}) {
    CAPTURE(rel);
    CHECK(testing::slurp(dir / rel) == testing::slurp(testing::bundled_dir() / rel));
  }
}

TEST_CASE("workshop-1 layout") {
  const auto lp = testing::load_bundled("workshop-1");
  CHECK(lp.plan.locale == "es");
  const auto slots = runtime::trial_slots(lp);
  std::map<std::string, int> per_block;
  for (const auto& s : slots) ++per_block[s.loop_name];
  CHECK(per_block == std::map<std::string, int>{{"bloque1", 4}, {"bloque2", 10}, {"bloque3", 10}});
  const auto* b2 = lp.plan.find_routine("bloque2");
  REQUIRE(b2);
  CHECK(b2->feedback() == nullptr);
  CHECK(b2->key_response()->allowed_keys == std::vector<std::string>{"e", "a"});
  const auto* b3 = lp.plan.find_routine("bloque3");
  REQUIRE(b3);
  REQUIRE(b3->feedback());
  CHECK(b3->feedback()->correct_message == "Correcto");
}

TEST_CASE("workshop-2 days differ in glitch count and loops") {
  const auto d1 = testing::load_bundled("workshop-2-day-1");
  const auto d2 = testing::load_bundled("workshop-2-day-2");
  CHECK(d1.plan.loops().size() == 3);
  CHECK(d2.plan.loops().size() == 4);
  auto glitches = [](const plan::LoadedPlan& lp) {
    int n = 0;
    for (const auto& s : runtime::trial_slots(lp)) n += s.loop_name == "glitches";
    return n;
  };
  CHECK(glitches(d1) == 3);
  CHECK(glitches(d2) == 6);
  CHECK(d2.plan.find_routine("intro_event2") != nullptr);
  CHECK(d1.plan.find_routine("intro_event2") == nullptr);
  const auto* g = d1.plan.find_routine("glitch");
  REQUIRE(g);
  CHECK(g->feedback()->correct_message == "Excellent job!!");
  CHECK(g->feedback()->incorrect_message ==
        "Oops!! This seems to belong to a different glich class");
}
