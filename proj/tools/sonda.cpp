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

// sonda: validate plans, synthesize stimuli, run scripted sessions, analyze
// stored results and serve the HTTP API.
//
// Exit status: 0 success, 1 domain error, 2 usage error.

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sonda/analytics.hpp"
#include "sonda/bundled.hpp"
#include "sonda/plan.hpp"
#include "sonda/plot.hpp"
#include "sonda/runtime.hpp"
#include "sonda/server.hpp"
#include "sonda/stimulus.hpp"
#include "sonda/store.hpp"
#include "sonda/wav.hpp"

namespace {

namespace fs = std::filesystem;
using namespace sonda;

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

// Domain failures carry their message up to main.
struct Failure {
  std::string message;
};

void write_text_file(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f.flush()) throw Failure{"cannot write " + path};
}

std::string describe(const plan::ParseError& e) {
  std::string out = std::string(plan::to_string(e.kind()));
  if (!e.field().empty()) out += " at " + e.field();
  if (e.line()) out += " (line " + std::to_string(e.line()) + ")";
  return out + ": " + e.message();
}

plan::TrainingPlan load_plan(const std::string& path) {
  try {
    return plan::load_plan_file(path);
  } catch (const plan::ParseError& e) {
    throw Failure{path + ": " + describe(e)};
  }
}

// First plan in `dir` whose id matches.
std::optional<fs::path> find_plan_file(const fs::path& dir, const std::string& id) {
  std::error_code ec;
  std::vector<fs::path> candidates;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    const std::string name = it->path().filename().string();
    if (name.size() > 14 && name.ends_with(".training.json")) candidates.push_back(it->path());
  }
  std::sort(candidates.begin(), candidates.end());
  for (const auto& path : candidates) {
    try {
      if (plan::load_plan_file(path).id == id) return path;
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

plan::LoadedPlan load_with_tables(const plan::TrainingPlan& p, const fs::path& root) {
  try {
    return plan::load_tables(p, root);
  } catch (const plan::ParseError& e) {
    throw Failure{describe(e)};
  } catch (const plan::MissingSeed& e) {
    throw Failure{e.what()};
  }
}

// --- validate ----------------------------------------------------------------

int cmd_validate(const std::string& path) {
  const plan::TrainingPlan p = load_plan(path);
  const auto report = plan::validate_plan(p, fs::path(path).parent_path());
  for (const auto& f : report.findings) {
    std::cout << plan::to_string(f.severity) << ": " << f.location << ": " << f.message << "\n";
  }
  std::cout << path << ": " << report.error_count() << " error(s), " << report.warning_count()
            << " warning(s)\n";
  return report.ok() ? kOk : kDomainError;
}

// --- synth / sonify ----------------------------------------------------------

int cmd_synth_tone(const stimulus::ToneSpec& spec, const std::string& out) {
  const auto bytes = stimulus::write_wav_file(stimulus::synth_tone(spec), out);
  std::cout << out << ": " << bytes << " bytes\n";
  return kOk;
}

struct SonifyArgs {
  std::string series;
  stimulus::SonificationSpec spec;
  std::string out;
  std::string plot;
  int plot_width = 800;
  int plot_height = 400;
};

int cmd_sonify(const SonifyArgs& a) {
  stimulus::check(a.spec);
  const stimulus::DataSeries series = stimulus::load_series(a.series);
  const auto bytes = stimulus::write_wav_file(stimulus::sonify(series, a.spec), a.out);
  std::cout << a.out << ": " << bytes << " bytes, " << series.y.size() << " notes\n";
  if (!a.plot.empty()) {
    write_text_file(a.plot, stimulus::render_plot(series, a.plot_width, a.plot_height));
  }
  return kOk;
}

// --- run -----------------------------------------------------------------------

struct RunArgs {
  std::string plan;
  std::string participant;
  std::string script;
  std::string out;
  std::string session_id;
  std::string started_at = "1970-01-01T00:00:00.000Z";
  std::string log;
  int tick_ms = 10;
};

int cmd_run(const RunArgs& a) {
  const plan::TrainingPlan p = load_plan(a.plan);
  const plan::LoadedPlan loaded = load_with_tables(p, fs::path(a.plan).parent_path());

  std::vector<runtime::ScriptedEvent> events;
  if (!a.script.empty()) events = runtime::load_script(a.script);

  runtime::SessionConfig config;
  config.participant_id = a.participant;
  config.training_id = p.id;
  config.session_id = a.session_id.empty() ? a.participant + "-" + p.id : a.session_id;
  config.tick_ms = a.tick_ms;
  auto started = parse_timestamp(a.started_at);
  if (!started) throw Failure{"--started-at is not a UTC timestamp: " + a.started_at};
  config.started_at = *started;

  const runtime::HeadlessRun run =
      runtime::run_headless(loaded, config, runtime::file_resolver(loaded, true), events);

  write_text_file(a.out, store::session_csv(run.result));
  if (!a.log.empty()) {
    std::string text;
    for (const auto& d : run.log) text += runtime::to_json_line(d) + "\n";
    write_text_file(a.log, text);
  }
  if (a.out != "-") {
    std::size_t hits = 0;
    for (const auto& r : run.result.records) hits += r.outcome == runtime::Outcome::hit;
    std::cout << a.out << ": " << run.result.records.size() << " records, " << hits << " hits\n";
  }
  return kOk;
}

// --- analyze -------------------------------------------------------------------

struct AnalyzeArgs {
  std::string data_dir;
  std::string training;
  std::string plans;
  std::string participant;
  std::string format = "text";
};

int cmd_analyze(const AnalyzeArgs& a) {
  const fs::path plans = a.plans.empty() ? fs::path(".") : fs::path(a.plans);
  const auto plan_path = find_plan_file(plans, a.training);
  if (!plan_path) throw Failure{"no training '" + a.training + "' in " + plans.string()};
  const plan::LoadedPlan loaded = load_with_tables(load_plan(plan_path->string()), plans);

  std::vector<runtime::SessionResult> sessions;
  if (fs::exists(a.data_dir)) {
    const store::Store st(a.data_dir);
    store::Filter filter;
    filter.training_id = a.training;
    if (!a.participant.empty()) filter.participant_id = a.participant;
    for (const auto& e : st.list_sessions(filter)) sessions.push_back(st.load_session(e.session_id));
  }
  const auto reports = analytics::training_report(loaded, sessions);
  if (a.format == "json") {
    std::cout << analytics::render_json(reports);
  } else if (a.format == "csv") {
    std::cout << analytics::render_csv(reports);
  } else {
    std::cout << analytics::render_text(reports);
  }
  return kOk;
}

// --- serve ---------------------------------------------------------------------

server::Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(server::Config config) {
  server::Server srv(std::move(config));
  int port = 0;
  try {
    port = srv.bind();
  } catch (const server::ServerError& e) {
    throw Failure{e.what()};
  }
  std::cout << "listening on " << srv.config().host << ":" << port << std::endl;
  g_server = &srv;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  srv.listen();
  g_server = nullptr;
  return kOk;
}

// --- gen-examples --------------------------------------------------------------

int cmd_gen_examples(const std::string& out) {
  for (const auto& path : bundled::write_all(out)) std::cout << path.string() << "\n";
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"sonda: auditory training plans, stimuli, sessions and reports"};
  app.require_subcommand(1);
  std::function<int()> action;

  // validate
  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a plan and its tables and assets");
  validate->add_option("plan", validate_path, "Plan file")->required();
  validate->callback([&] { action = [&] { return cmd_validate(validate_path); }; });

  // synth tone
  stimulus::ToneSpec tone;
  std::string tone_out;
  auto* synth = app.add_subcommand("synth", "Synthesize stimuli");
  synth->require_subcommand(1);
  auto* synth_tone = synth->add_subcommand("tone", "Sine tone mixed with white noise");
  synth_tone->add_option("--freq", tone.frequency_hz, "Frequency in Hz")->required();
  synth_tone->add_option("--dur", tone.duration_s, "Duration in seconds")->required();
  synth_tone->add_option("--mix", tone.noise_mix, "Noise share in [0, 1]");
  synth_tone->add_option("--seed", tone.noise_seed, "Noise seed");
  synth_tone->add_option("--amp", tone.amplitude, "Peak amplitude in (0, 1]");
  synth_tone->add_option("--rate", tone.sample_rate_hz, "Sample rate in Hz");
  synth_tone->add_option("-o,--output", tone_out, "Output WAV")->required();
  synth_tone->callback([&] { action = [&] { return cmd_synth_tone(tone, tone_out); }; });

  // sonify
  SonifyArgs son;
  auto* sonify = app.add_subcommand("sonify", "Map a data series to a sequence of notes");
  sonify->add_option("series", son.series, "CSV or whitespace-separated text file")->required();
  sonify->add_option("--fmin", son.spec.f_min_hz, "Lowest note frequency in Hz");
  sonify->add_option("--fmax", son.spec.f_max_hz, "Highest note frequency in Hz");
  sonify->add_option("--note-dur", son.spec.note_duration_s, "Seconds per value");
  sonify->add_option("--rate", son.spec.sample_rate_hz, "Sample rate in Hz");
  sonify->add_option("--amp", son.spec.amplitude, "Peak amplitude in (0, 1]");
  sonify->add_option("-o,--output", son.out, "Output WAV")->required();
  sonify->add_option("--plot", son.plot, "Also write an SVG plot of the series");
  sonify->add_option("--plot-width", son.plot_width, "Plot width in px");
  sonify->add_option("--plot-height", son.plot_height, "Plot height in px");
  sonify->callback([&] { action = [&] { return cmd_sonify(son); }; });

  // run
  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a session headlessly from a key script");
  run->add_option("plan", run_args.plan, "Plan file")->required();
  run->add_option("--participant", run_args.participant, "Participant id")->required();
  run->add_option("--script", run_args.script, "CSV of at_ms,kind,key events");
  run->add_option("-o,--output", run_args.out, "Session CSV ('-' for stdout)")->required();
  run->add_option("--session-id", run_args.session_id, "Defaults to <participant>-<training>");
  run->add_option("--started-at", run_args.started_at, "UTC start timestamp")
      ->capture_default_str();
  run->add_option("--log", run_args.log, "Write the directive log as JSON lines");
  run->add_option("--tick-ms", run_args.tick_ms, "Clock step")->check(CLI::PositiveNumber);
  run->callback([&] { action = [&] { return cmd_run(run_args); }; });

  // analyze
  AnalyzeArgs an;
  if (const char* v = std::getenv("SONDA_PLANS_DIR")) an.plans = v;
  auto* analyze = app.add_subcommand("analyze", "Hit percentages per block");
  analyze->add_option("data-dir", an.data_dir, "Session store directory")->required();
  analyze->add_option("--training", an.training, "Training id")->required();
  analyze->add_option("--plans", an.plans, "Plans directory (default $SONDA_PLANS_DIR or .)");
  analyze->add_option("--participant", an.participant, "Only this participant");
  analyze->add_option("--format", an.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();
  analyze->callback([&] { action = [&] { return cmd_analyze(an); }; });

  // serve
  server::Config serve_config;
  std::string ui_dir;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API, assets and UI");
  serve->add_option("--port", serve_config.port, "TCP port, 0 for any free port")
      ->check(CLI::Range(0, 65535));
  serve->add_option("--host", serve_config.host, "Bind address");
  serve->add_option("--plans", serve_config.plans_dir, "Plans directory");
  serve->add_option("--data", serve_config.data_dir, "Session store directory");
  serve->add_option("--ui", ui_dir, "Static UI directory");
  serve->preparse_callback([&](std::size_t) { serve_config = server::config_from_env(); });
  serve->callback([&] {
    if (!ui_dir.empty()) serve_config.ui_dir = ui_dir;
    action = [&] { return cmd_serve(serve_config); };
  });

  // gen-examples
  std::string examples_out;
  auto* gen = app.add_subcommand("gen-examples", "Write the bundled trainings and stimuli");
  gen->add_option("out-dir", examples_out, "Output directory")->required();
  gen->callback([&] { action = [&] { return cmd_gen_examples(examples_out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }
  return action();
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Failure& f) {
    std::cerr << "sonda: " << f.message << "\n";
  } catch (const std::exception& e) {
    std::cerr << "sonda: " << e.what() << "\n";
  }
  return kDomainError;
}
