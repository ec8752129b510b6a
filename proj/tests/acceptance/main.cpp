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

// Acceptance checks. Usage: sonda_acceptance <path to sonda> <tests dir>
// Prints one PASS or FAIL line per criterion and exits non-zero on failure.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "sonda/analytics.hpp"
#include "sonda/bundled.hpp"
#include "sonda/runtime.hpp"
#include "sonda/server.hpp"
#include "sonda/stimulus.hpp"
#include "sonda/store.hpp"
#include "sonda/wav.hpp"
#include "support.hpp"
#include "workshop_scores.hpp"

namespace fs = std::filesystem;
using namespace sonda;
using nlohmann::json;

namespace {

std::string g_sonda;
fs::path g_tests;

// Thrown by require() with the reason a check failed.
struct Failed {
  std::string why;
};

void require(bool ok, const std::string& why) {
  if (!ok) throw Failed{why};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const fs::path& plans_dir() {
  static testing::TempDir dir;
  static const bool written = (bundled::write_all(dir.path()), true);
  (void)written;
  return dir.path();
}

plan::LoadedPlan load(const std::string& id) {
  return plan::load_tables(plan::load_plan_file(plans_dir() / (id + ".training.json")), plans_dir());
}

void block_report() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<analytics::ParticipantReport> reports;
  for (const auto& s : testing::workshop_sessions()) reports.push_back(analytics::score_session(s));
  const auto blocks = analytics::aggregate(reports, testing::workshop_blocks());
  const double elapsed = seconds_since(t0);
  require(blocks.size() == 3, "expected 3 blocks");
  const std::int64_t hits[] = {18, 19, 28};
  const char* pct[] = {"75.000", "31.667", "46.667"};
  for (int b = 0; b < 3; ++b) {
    require(blocks[b].hits == hits[b], blocks[b].block + " hits " + std::to_string(blocks[b].hits));
    const auto text = analytics::format_percent(blocks[b].hit_percent_milli);
    require(text == pct[b], blocks[b].block + " percent " + text);
  }
  require(analytics::render_csv(blocks) == testing::slurp(g_tests / "golden/workshop1_report.csv"),
          "csv differs from golden");
  require(elapsed < 1.0, "took " + std::to_string(elapsed) + " s");
}

runtime::SessionResult cli_run(const std::string& script, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = testing::run_command(
      testing::quote(g_sonda) + " run " + testing::quote(plans_dir() / "prototype.training.json") +
      " --participant p1 --script " + testing::quote(g_tests / "data" / script) + " -o " +
      testing::quote(out) + " 2>/dev/null");
  const double elapsed = seconds_since(t0);
  require(r.status == 0, "sonda run exited " + std::to_string(r.status));
  require(elapsed < 1.0, script + " took " + std::to_string(elapsed) + " s");
  return store::parse_session_csv(testing::slurp(out));
}

void prototype_end_to_end() {
  testing::TempDir tmp;
  const auto all = cli_run("prototype_all_correct.script.csv", tmp / "all.csv");
  require(all.records.size() == 9, "all-correct run gave " + std::to_string(all.records.size()));
  for (const auto& r : all.records) require(r.outcome == runtime::Outcome::hit, "non-hit record");
  require(testing::slurp(tmp / "all.csv") ==
              testing::slurp(g_tests / "golden/prototype_all_correct.csv"),
          "output differs from golden");
  const auto none = cli_run("empty.script.csv", tmp / "empty.csv");
  require(none.records.size() == 9, "empty run gave " + std::to_string(none.records.size()));
  for (const auto& r : none.records) {
    require(r.outcome == runtime::Outcome::no_answer, "answered record in empty run");
  }
}

void synthesis() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20220601);
  std::uniform_real_distribution<double> freq(100.0, 2000.0), dur(0.2, 2.0), amp(0.1, 0.95);
  for (int i = 0; i < 20; ++i) {
    stimulus::ToneSpec spec;
    spec.frequency_hz = std::round(freq(rng) * 10) / 10;
    spec.duration_s = std::round(dur(rng) * 100) / 100;
    spec.amplitude = amp(rng);
    spec.noise_seed = rng();
    const std::string bytes = stimulus::encode_wav(stimulus::synth_tone(spec));
    require(bytes == stimulus::encode_wav(stimulus::synth_tone(spec)), "equal specs, different bytes");
    const auto w = testing::decode_wav(bytes);
    require(w.has_value(), "undecodable tone");
    double sum = 0;
    for (auto s : w->samples) sum += (s / 32767.0) * (s / 32767.0);
    const double rms = std::sqrt(sum / static_cast<double>(w->samples.size()));
    const double want = spec.amplitude / std::sqrt(2.0);
    require(std::abs(rms - want) <= 0.01 * want, "tone " + std::to_string(i) + " rms " + std::to_string(rms));
    const double zc = static_cast<double>(testing::sign_changes(w->samples));
    const double expected = 2 * spec.frequency_hz * spec.duration_s;
    require(std::abs(zc - expected) <= 2, "tone " + std::to_string(i) + " crossings " +
                                              std::to_string(zc) + " vs " + std::to_string(expected));
  }

  stimulus::DataSeries ramp;
  for (int i = 0; i < 20; ++i) ramp.y.push_back(0.5 * i - 3);
  stimulus::SonificationSpec spec;
  const auto audio = stimulus::sonify(ramp, spec);
  require(stimulus::encode_wav(audio) == stimulus::encode_wav(stimulus::sonify(ramp, spec)),
          "sonify not byte-stable");
  double last = -1;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto [b, e] = stimulus::note_span(i, spec);
    const double rate = static_cast<double>(testing::sign_changes(audio.samples, b, e)) /
                        (static_cast<double>(e - b) / audio.sample_rate_hz) / 2;
    require(rate > last, "note " + std::to_string(i) + " not higher than the previous one");
    last = rate;
  }
  const double elapsed = seconds_since(t0);
  require(elapsed < 10.0, "took " + std::to_string(elapsed) + " s");
}

void wav_format() {
  testing::TempDir tmp;
  std::vector<stimulus::AudioBuffer> buffers;
  for (std::size_t n : {0, 1, 2, 7, 441, 44100}) {
    stimulus::AudioBuffer b;
    for (std::size_t i = 0; i < n; ++i) b.samples.push_back(static_cast<float>(std::sin(0.05 * i) * 0.9));
    buffers.push_back(b);
  }
  buffers.push_back(stimulus::synth_tone({300.0, 0.5, 22050, 0.8, 0.25, 9}));
  for (std::size_t k = 0; k < buffers.size(); ++k) {
    const auto& b = buffers[k];
    const std::string bytes = stimulus::encode_wav(b);
    const std::string tag = "buffer " + std::to_string(k);
    require(bytes.size() == 44 + 2 * b.samples.size(), tag + " breaks 44 + 2N");
    const auto w = testing::decode_wav(bytes);
    require(w && w->format == 1 && w->channels == 1 && w->bits == 16, tag + " bad header");
    require(w->sample_rate == static_cast<std::uint32_t>(b.sample_rate_hz), tag + " bad rate");
    require(w->samples.size() == b.samples.size(), tag + " bad sample count");
    for (std::size_t i = 0; i < b.samples.size(); ++i) {
      const double want = std::clamp<double>(b.samples[i], -1.0, 1.0) * 32767.0;
      require(std::abs(w->samples[i] - want) <= 1.0, tag + " sample " + std::to_string(i));
    }
    const fs::path file = tmp / (std::to_string(k) + ".wav");
    stimulus::write_wav_file(b, file);
    const auto py = testing::run_command(
        "python3 -c 'import sys,wave; w=wave.open(sys.argv[1]); "
        "print(w.getnchannels(), w.getsampwidth(), w.getframerate(), w.getnframes())' " +
        testing::quote(file));
    const std::string want = "1 2 " + std::to_string(b.sample_rate_hz) + " " +
                             std::to_string(b.samples.size()) + "\n";
    require(py.status == 0 && py.out == want, tag + " python wave read '" + py.out + "'");
  }
}

std::string log_text(const runtime::HeadlessRun& run) {
  std::string out;
  for (const auto& d : run.log) out += runtime::to_json_line(d) + "\n";
  return out;
}

void determinism() {
  const auto d1 = load("workshop-2-day-1");
  std::vector<runtime::ScriptedEvent> script;
  const char* keys[] = {"b", "k", "s", "c", "e", "y", "n"};
  for (int i = 0; i < 40; ++i) script.push_back({i * 9137 + 250, keys[i % 7]});
  runtime::SessionConfig cfg{"p", "p-w2d1", "workshop-2-day-1", {}, 10};
  const auto a = runtime::run_headless(d1, cfg, runtime::file_resolver(d1, true), script);
  const auto b = runtime::run_headless(d1, cfg, runtime::file_resolver(d1, true), script);
  require(!a.log.empty() && log_text(a) == log_text(b), "directive logs differ");
  require(a.result == b.result, "session results differ");

  testing::TempDir tmp;
  std::string script_csv = "at_ms,kind,key\n";
  for (const auto& e : script) script_csv += std::to_string(e.at_ms) + ",key," + e.key + "\n";
  testing::spit(tmp / "script.csv", script_csv);
  std::string logs[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path log = tmp / ("log" + std::to_string(i) + ".jsonl");
    const auto r = testing::run_command(
        testing::quote(g_sonda) + " run " +
        testing::quote(plans_dir() / "workshop-2-day-1.training.json") + " --participant p --script " +
        testing::quote(tmp / "script.csv") + " -o " + testing::quote(tmp / "out.csv") + " --log " +
        testing::quote(log) + " 2>/dev/null");
    require(r.status == 0, "sonda run exited " + std::to_string(r.status));
    logs[i] = testing::slurp(log);
  }
  require(!logs[0].empty() && logs[0] == logs[1], "CLI directive logs differ");
  require(logs[0] == log_text(a), "CLI log differs from the library run");

  const auto d2 = load("workshop-2-day-2");
  require(d1.plan.loops().size() == 3 && d2.plan.loops().size() == 4, "unexpected loop counts");
  auto first_block = [](const plan::LoadedPlan& lp) {
    const auto slots = runtime::trial_slots(lp);
    std::size_t n = 0;
    for (const auto& s : slots) n += s.loop_name == lp.plan.loops().front()->name;
    return n;
  };
  require(first_block(d1) == 3 && first_block(d2) == 6,
          "first block trials " + std::to_string(first_block(d1)) + " vs " + std::to_string(first_block(d2)));
}

void server_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  testing::TempDir data;
  server::Config cfg;
  cfg.plans_dir = plans_dir();
  cfg.data_dir = data.path();
  cfg.host = "127.0.0.1";
  cfg.port = 0;
  server::Server srv(cfg);
  const int port = srv.bind();
  std::thread th([&] { srv.listen(); });
  struct Join {
    server::Server& s;
    std::thread& t;
    ~Join() {
      s.stop();
      t.join();
    }
  } join{srv, th};

  httplib::Client c("127.0.0.1", port);
  c.set_read_timeout(5, 0);
  auto created = c.Post("/api/sessions", R"({"training_id":"prototype","participant_id":"p1"})",
                        "application/json");
  require(created && created->status == 201, "session not created");
  const std::string id = json::parse(created->body).at("session_id");

  const auto lp = load("prototype");
  const auto run = runtime::run_headless(
      lp, {"p1", id, "prototype", {}, 10}, runtime::file_resolver(lp, true),
      runtime::load_script(g_tests / "data/prototype_all_correct.script.csv"));
  json records = json::array();
  for (const auto& r : run.result.records) records.push_back(server::record_to_json(r));
  json body{{"records", records},
            {"started_at", "2024-03-01T12:00:00.000Z"},
            {"finished_at", "2024-03-01T12:01:23.100Z"}};

  json bad = body;
  bad["records"][4]["outcome"] = "miss";  // response matches the answer
  auto rejected = c.Post("/api/sessions/" + id + "/records", bad.dump(), "application/json");
  require(rejected && rejected->status == 422, "inconsistent outcome not rejected with 422");

  auto stored = c.Post("/api/sessions/" + id + "/records", body.dump(), "application/json");
  require(stored && stored->status == 204, "valid submission not accepted with 204");

  const auto loaded = store::Store(data.path()).load_session(id);
  require(loaded.records == run.result.records, "stored records differ from submitted ones");
  require(loaded.config.participant_id == "p1" &&
              format_timestamp(loaded.config.started_at) == "2024-03-01T12:00:00.000Z" &&
              format_timestamp(loaded.finished_at) == "2024-03-01T12:01:23.100Z",
          "stored session metadata differs");

  auto report = c.Get("/api/reports/trainings/prototype");
  require(report && report->status == 200, "report request failed");
  const auto offline = testing::run_command(
      testing::quote(g_sonda) + " analyze " + testing::quote(data.path()) +
      " --training prototype --plans " + testing::quote(plans_dir()) + " --format json");
  require(offline.status == 0, "sonda analyze exited " + std::to_string(offline.status));
  require(report->body == offline.out, "report differs from sonda analyze");
  require(json::parse(report->body).size() == 3, "report should have 3 blocks");

  const double elapsed = seconds_since(t0);
  require(elapsed < 5.0, "took " + std::to_string(elapsed) + " s");
}

void timeout_semantics() {
  const auto lp = load("workshop-1");
  const auto run = runtime::run_headless(lp, {"p", "p-w1", "workshop-1", {}, 10},
                                         runtime::file_resolver(lp, true), {});
  require(!run.result.records.empty(), "no records");
  const auto& first = run.result.records.front();
  require(first.outcome == runtime::Outcome::no_answer && first.response.empty() && !first.rt_ms,
          "first trial not recorded as no_answer");
  std::optional<std::int64_t> opened, shown;
  std::string message;
  for (const auto& d : run.log) {
    if (std::holds_alternative<runtime::AwaitKeys>(d.body) && !opened) opened = d.at_ms;
    if (const auto* f = std::get_if<runtime::ShowFeedback>(&d.body); f && !shown) {
      require(f->kind == runtime::FeedbackKind::timeout, "first feedback is not a timeout");
      shown = d.at_ms;
      message = f->message;
    }
  }
  require(opened && shown, "no key window or feedback in the log");
  require(*shown - *opened == 10000, "feedback " + std::to_string(*shown - *opened) + " ms after the window opened");
  require(message == "Incorrecto", "timeout message '" + message + "'");
  for (const auto& r : run.result.records) {
    require(r.outcome == runtime::Outcome::no_answer, "a trial was answered without keys");
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: sonda_acceptance <sonda> <tests dir>\n";
    return 2;
  }
  g_sonda = argv[1];
  g_tests = argv[2];
  const std::vector<std::pair<std::string, std::function<void()>>> checks{
      {"block_report", block_report},
      {"prototype_end_to_end", prototype_end_to_end},
      {"synthesis_properties", synthesis},
      {"wav_format", wav_format},
      {"determinism_replay", determinism},
      {"server_round_trip", server_round_trip},
      {"timeout_semantics", timeout_semantics},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    try {
      check();
      std::cout << "PASS " << name << "\n";
    } catch (const Failed& f) {
      std::cout << "FAIL " << name << ": " << f.why << "\n";
      ++failed;
    } catch (const std::exception& e) {
      std::cout << "FAIL " << name << ": " << e.what() << "\n";
      ++failed;
    }
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}
