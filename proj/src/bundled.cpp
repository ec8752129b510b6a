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

#include "sonda/bundled.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>

#include "sonda/csv.hpp"
#include "sonda/plot.hpp"
#include "sonda/prng.hpp"
#include "sonda/stimulus.hpp"
#include "sonda/wav.hpp"

namespace sonda::bundled {
namespace {

namespace fs = std::filesystem;
using plan::AudioComponent;
using plan::FeedbackComponent;
using plan::ImageComponent;
using plan::KeyResponseComponent;
using plan::Loop;
using plan::Routine;
using plan::RoutineRef;
using plan::TextComponent;
using plan::TrainingPlan;
using stimulus::AudioBuffer;
using stimulus::DataSeries;
using stimulus::SonificationSpec;

constexpr int kPlotWidth = 800;
constexpr int kPlotHeight = 400;

// Collects a plan and, when given an output directory, writes its files as
// they are declared. Without one only the plan is built.
class Builder {
 public:
  Builder(std::string id, const fs::path* out) : out_(out) {
    plan.id = std::move(id);
    plan.assets_dir = plan.id + "/assets";
    if (out_) {
      fs::create_directories(*out_ / plan.id / "tables");
      fs::create_directories(*out_ / plan.assets_dir);
    }
  }

  TrainingPlan plan;

  bool writing() const { return out_ != nullptr; }

  // Returns the table path relative to the plan directory.
  std::string table(const std::string& name, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
    const std::string rel = plan.id + "/tables/" + name + ".csv";
    if (out_) {
      std::string text = csv::format_record(header);
      for (const auto& row : rows) text += csv::format_record(row);
      write_text(*out_ / rel, text);
    }
    return rel;
  }

  void wav(const std::string& rel, const std::function<AudioBuffer()>& make) {
    if (!out_) return;
    const fs::path path = *out_ / plan.assets_dir / rel;
    fs::create_directories(path.parent_path());
    stimulus::write_wav_file(make(), path);
  }

  void svg(const std::string& rel, const std::function<std::string()>& make) {
    if (!out_) return;
    const fs::path path = *out_ / plan.assets_dir / rel;
    fs::create_directories(path.parent_path());
    write_text(path, make());
  }

  // Sonified audio plus its plot, under `dir/name.{wav,svg}`.
  void sonified(const std::string& dir, const DataSeries& series, const SonificationSpec& spec) {
    wav(dir + "/" + series.name + ".wav", [&] { return stimulus::sonify(series, spec); });
    svg(dir + "/" + series.name + ".svg",
        [&] { return stimulus::render_plot(series, kPlotWidth, kPlotHeight); });
  }

  std::string narration(const std::string& routine) {
    const std::string rel = "narration/" + routine + ".wav";
    wav(rel, [] {
      stimulus::ToneSpec spec;
      spec.frequency_hz = 440.0;
      spec.duration_s = 0.6;
      spec.amplitude = 0.3;
      return stimulus::synth_tone(spec);
    });
    return rel;
  }

 private:
  static void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f.flush()) throw std::runtime_error("cannot write " + path.string());
  }

  const fs::path* out_;
};

Routine text_routine(std::string name, std::string content, double duration_s,
                     std::optional<std::string> narration = std::nullopt) {
  Routine r;
  r.name = std::move(name);
  r.duration_s = duration_s;
  TextComponent t;
  t.content = std::move(content);
  t.narration = std::move(narration);
  r.components.emplace_back(std::move(t));
  return r;
}

struct TrialShape {
  bool image = true;
  // Image stop offset; absent keeps it up while the participant answers.
  std::optional<double> image_stop_s;
  double stimulus_s = 4.0;
  std::string prompt;
  std::vector<std::string> keys;
  double window_s = 10.0;
  double duration_s = 0.0;
  std::optional<FeedbackComponent> feedback;
};

Routine trial_routine(std::string name, const TrialShape& shape) {
  Routine r;
  r.name = std::move(name);
  r.duration_s = shape.duration_s;
  if (shape.image) r.components.emplace_back(ImageComponent{"$image", 0.0, shape.image_stop_s});
  r.components.emplace_back(AudioComponent{"$sound", 0.0});
  r.components.emplace_back(TextComponent{shape.prompt, shape.stimulus_s, std::nullopt, std::nullopt});
  r.components.emplace_back(
      KeyResponseComponent{shape.keys, "$corrAns", shape.window_s, shape.stimulus_s});
  if (shape.feedback) r.components.emplace_back(*shape.feedback);
  return r;
}

FeedbackComponent feedback(std::string correct, std::string incorrect, double duration_s) {
  // Blank answers get the incorrect message, as the workshops did.
  return FeedbackComponent{std::move(correct), incorrect, incorrect, duration_s};
}

Loop sequential_loop(std::string name, std::string table, std::string body,
                     std::optional<std::vector<std::size_t>> rows = std::nullopt) {
  Loop l;
  l.name = std::move(name);
  l.table = std::move(table);
  l.rows = std::move(rows);
  l.body = {std::move(body)};
  return l;
}

// ---------------------------------------------------------------------------
// prototype

void build_prototype(Builder& b) {
  TrainingPlan& p = b.plan;
  p.title = "Entrenamiento prototipo";
  p.description = "Tonos puros mezclados con ruido blanco en tres rangos de frecuencia.";
  p.locale = "es";

  struct Module {
    std::string name;
    std::vector<double> freqs;
  };
  const std::vector<Module> modules{
      {"modulo1", {260, 270, 280}}, {"modulo2", {300, 310, 320}}, {"modulo3", {480, 490, 500}}};
  const std::vector<std::string> answers{"left", "down", "right"};

  std::vector<std::vector<std::string>> rows;
  for (const auto& m : modules) {
    for (std::size_t i = 0; i < m.freqs.size(); ++i) {
      const std::string stem = "tones/tone_" + std::to_string(static_cast<int>(m.freqs[i]));
      rows.push_back({stem + ".wav", stem + ".svg", answers[i]});
      stimulus::ToneSpec spec;
      spec.frequency_hz = m.freqs[i];
      spec.duration_s = 4.0;
      spec.noise_mix = 0.25;
      spec.noise_seed = static_cast<std::uint64_t>(m.freqs[i]);
      b.wav(stem + ".wav", [&] { return stimulus::synth_tone(spec); });
      b.svg(stem + ".svg", [&] {
        // First 20 ms of the waveform.
        const AudioBuffer buf = stimulus::synth_tone(spec);
        DataSeries s;
        s.name = "Tono " + std::to_string(static_cast<int>(spec.frequency_hz)) + " Hz";
        const std::size_t n = static_cast<std::size_t>(0.02 * buf.sample_rate_hz);
        for (std::size_t k = 0; k < n; ++k) {
          s.x.push_back(1000.0 * static_cast<double>(k) / buf.sample_rate_hz);
          s.y.push_back(buf.samples[k]);
        }
        return stimulus::render_plot(s, kPlotWidth, kPlotHeight);
      });
    }
  }
  const std::string table = b.table("condiciones", {"sound", "image", "corrAns"}, rows);

  TrialShape shape;
  shape.image_stop_s = 4.0;
  shape.stimulus_s = 4.0;
  shape.window_s = 3.9;
  shape.duration_s = 7.9;
  shape.keys = answers;
  shape.prompt = "¿El tono fue el más grave (←), el del medio (↓) o el más agudo (→)?";

  const std::vector<std::string> intros{
      "Módulo 1: escuchá cada tono y observá su forma de onda.",
      "Módulo 2: los tonos ahora están entre 300 Hz y 320 Hz.",
      "Módulo 3: los tonos ahora están entre 480 Hz y 500 Hz."};
  const std::vector<std::string> intro_names{"inicio", "inicio2", "inicio3"};
  for (std::size_t m = 0; m < modules.size(); ++m) {
    p.routines.push_back(text_routine(intro_names[m], intros[m], 4.0));
    p.routines.push_back(trial_routine(modules[m].name, shape));
  }
  for (std::size_t m = 0; m < modules.size(); ++m) {
    p.flow.emplace_back(RoutineRef{intro_names[m]});
    std::vector<std::size_t> sel{3 * m, 3 * m + 1, 3 * m + 2};
    p.flow.emplace_back(sequential_loop(modules[m].name, table, modules[m].name, sel));
  }
}

// ---------------------------------------------------------------------------
// workshop-1

DataSeries spectrum(const std::string& name, double center, double amplitude,
                    std::pair<double, double> range, bool noisy, std::uint64_t seed) {
  const double width = (range.second - range.first) / 14.0;
  DataSeries s = stimulus::gen_spectrum(1.0, {{center, width, amplitude}}, 40, range);
  if (noisy) {
    SplitMix64 rng(seed);
    for (double& y : s.y) y += 0.04 * rng.next_signed_unit();
  }
  s.name = name;
  return s;
}

void build_workshop1(Builder& b) {
  TrainingPlan& p = b.plan;
  p.title = "Primer workshop";
  p.description = "Funciones simples y líneas espectrales de emisión y absorción.";
  p.locale = "es";

  SonificationSpec spec;  // 40 notes of 0.1 s: about four seconds each

  // Block 1: simple functions.
  struct Fn {
    stimulus::FunctionKind kind;
    std::string key;
  };
  const std::vector<Fn> fns{{stimulus::FunctionKind::sine, "left"},
                            {stimulus::FunctionKind::increasing, "up"},
                            {stimulus::FunctionKind::square, "right"},
                            {stimulus::FunctionKind::decreasing, "down"}};
  std::vector<std::vector<std::string>> rows1;
  for (const auto& fn : fns) {
    DataSeries s = stimulus::gen_function(fn.kind, 40, 2.0);
    s.name = std::string(stimulus::to_string(fn.kind));
    b.sonified("funciones", s, spec);
    rows1.push_back({"funciones/" + s.name + ".wav", "funciones/" + s.name + ".svg", fn.key});
  }
  const std::string table1 = b.table("bloque1", {"sound", "image", "corrAns"}, rows1);

  // Blocks 2 and 3: two emission and three absorption ranges, each as a
  // noisy flux and as its smooth fit.
  struct Line {
    std::string name;
    double lo, hi, amplitude;
  };
  const std::vector<Line> lines{{"emision_7100", 7100, 7300, 1.5},
                                {"emision_7300", 7300, 7500, 1.2},
                                {"absorcion_4800", 4800, 5000, -0.7},
                                {"absorcion_5800", 5800, 6000, -0.6},
                                {"absorcion_6500", 6500, 6700, -0.8}};
  std::vector<DataSeries> spectra;
  std::uint64_t seed = 7;
  for (const auto& l : lines) {
    const double c = 0.5 * (l.lo + l.hi);
    spectra.push_back(spectrum(l.name + "_flujo", c, l.amplitude, {l.lo, l.hi}, true, seed++));
    spectra.push_back(spectrum(l.name + "_ajuste", c, l.amplitude, {l.lo, l.hi}, false, 0));
  }
  for (const auto& s : spectra) b.sonified("espectros", s, spec);

  auto row = [&](std::size_t i, bool image) {
    const DataSeries& s = spectra[i];
    const std::string answer = s.name.rfind("emision", 0) == 0 ? "e" : "a";
    std::vector<std::string> r{"espectros/" + s.name + ".wav"};
    if (image) r.push_back("espectros/" + s.name + ".svg");
    r.push_back(answer);
    return r;
  };
  const std::vector<std::size_t> order2{4, 0, 9, 6, 3, 5, 1, 8, 2, 7};
  const std::vector<std::size_t> order3{6, 2, 5, 1, 8, 0, 7, 3, 9, 4};
  std::vector<std::vector<std::string>> rows2, rows3;
  for (auto i : order2) rows2.push_back(row(i, false));
  for (auto i : order3) rows3.push_back(row(i, true));
  const std::string table2 = b.table("bloque2", {"sound", "corrAns"}, rows2);
  const std::string table3 = b.table("bloque3", {"sound", "image", "corrAns"}, rows3);

  const FeedbackComponent fb = feedback("Correcto", "Incorrecto", 1.0);

  TrialShape fn_shape;
  fn_shape.keys = {"left", "right", "up", "down"};
  fn_shape.prompt =
      "Seno (←), cuadrada (→), creciente (↑) o decreciente (↓). Tenés 10 segundos para responder.";
  fn_shape.feedback = fb;

  TrialShape spec_shape;
  spec_shape.keys = {"e", "a"};
  spec_shape.prompt = "¿Línea de emisión (e) o de absorción (a)?";

  TrialShape ear_shape = spec_shape;
  ear_shape.image = false;

  spec_shape.feedback = fb;

  p.routines = {
      text_routine("inicio",
                   "Bienvenida. Vas a escuchar y ver funciones simples; respondé con las flechas.",
                   8.0),
      trial_routine("bloque1", fn_shape),
      text_routine("inicio2",
                   "Bloque 2: solo sonido. ¿Es una línea de emisión (e) o de absorción (a)?", 8.0),
      trial_routine("bloque2", ear_shape),
      text_routine("inicio3", "Bloque 3: las mismas líneas, ahora con su gráfico.", 8.0),
      trial_routine("bloque3", spec_shape),
      text_routine("fin", "Fin del entrenamiento. ¡Gracias por participar!", 4.0),
  };
  p.flow = {
      RoutineRef{"inicio"},
      sequential_loop("bloque1", table1, "bloque1"),
      RoutineRef{"inicio2"},
      sequential_loop("bloque2", table2, "bloque2"),
      RoutineRef{"inicio3"},
      sequential_loop("bloque3", table3, "bloque3"),
      RoutineRef{"fin"},
  };
}

// ---------------------------------------------------------------------------
// workshop-2

constexpr int kGlitchPoints = 380;  // 38 s at 0.1 s per note

DataSeries glitch(const std::string& kind, std::uint64_t seed) {
  SplitMix64 rng(seed);
  DataSeries s;
  s.y.resize(kGlitchPoints);
  for (double& y : s.y) y = 0.05 * rng.next_signed_unit();
  const double center = 100.0 + 180.0 * rng.next_unit();
  if (kind == "blip") {
    // Short symmetric burst.
    for (int i = 0; i < kGlitchPoints; ++i) {
      const double d = (i - center) / 2.0;
      s.y[i] += std::exp(-d * d) * std::cos(1.5 * (i - center));
    }
  } else if (kind == "koi_fish") {
    // Broad loud head with a ringing tail.
    for (int i = 0; i < kGlitchPoints; ++i) {
      const double d = (i - center) / 8.0;
      const double tail = i > center ? std::exp(-(i - center) / 25.0) : 0.0;
      s.y[i] += 1.2 * std::exp(-d * d) + 0.4 * tail * std::sin(0.8 * (i - center));
    }
  } else {
    // Scattered light: slow repeating arches.
    const double period = 80.0 + 30.0 * rng.next_unit();
    for (int i = 0; i < kGlitchPoints; ++i) {
      const double a = std::sin(std::numbers::pi * i / period);
      s.y[i] += 0.8 * a * a;
    }
  }
  s.name = kind;
  return s;
}

constexpr int kParticlePoints = 50;  // 5 s

DataSeries particle(const std::string& kind, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const double slope = 0.03 + 0.01 * rng.next_unit();
  const double deposit = 0.8 + 0.2 * rng.next_unit();
  DataSeries s;
  s.y.assign(kParticlePoints, 0.0);
  for (int i = 0; i < kParticlePoints; ++i) {
    const bool track = i < 20;
    const bool in_deposit = i >= 20 && i < 35;
    double y = 0.0;
    if (kind == "converted_photon") {
      // Two tracks heading into one deposit, alternating notes.
      if (track) y = (i % 2 ? 0.5 : 1.0) * slope * i;
      if (in_deposit) y = deposit;
    } else if (kind == "electron") {
      if (track) y = slope * i;
      if (in_deposit) y = deposit;
    } else if (kind == "muon") {
      // Crosses every layer: one long staircase.
      y = 0.1 * std::floor(i / 5.0);
    } else if (kind == "photon") {
      if (in_deposit) y = deposit;
    } else {
      if (track) y = slope * i;
    }
    s.y[i] = y + 0.02 * rng.next_signed_unit();
  }
  s.name = kind;
  return s;
}

constexpr int kMuonPoints = 40;  // 4 s

DataSeries muon(bool present, std::uint64_t seed) {
  SplitMix64 rng(seed);
  DataSeries s;
  s.y.resize(kMuonPoints);
  for (int i = 0; i < kMuonPoints; ++i) {
    // Eight detector layers; a muon lines up one hit per layer.
    const double level = present ? (i / 5) / 7.0 : rng.next_unit();
    s.y[i] = level + 0.03 * rng.next_signed_unit();
  }
  s.name = present ? "muon" : "no_muon";
  return s;
}

const std::vector<std::pair<std::string, std::string>>& particle_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys{
      {"converted_photon", "c"}, {"electron", "e"}, {"muon", "m"}, {"photon", "p"},
      {"unknown", "u"}};
  return keys;
}

std::string particle_key(const std::string& kind) {
  for (const auto& [k, key] : particle_keys()) {
    if (k == kind) return key;
  }
  throw std::logic_error("unknown particle class " + kind);
}

void build_workshop2(Builder& b, int day) {
  TrainingPlan& p = b.plan;
  p.title = "Workshop 2, day " + std::to_string(day);
  p.description = day == 1 ? "Glitches, one LHC event and cosmic muons."
                           : "More glitches, two LHC events and cosmic muons.";
  p.locale = "en";

  const std::string hdr_sound = "sound", hdr_image = "image", hdr_answer = "corrAns";
  const std::vector<std::string> header{hdr_sound, hdr_image, hdr_answer};
  auto row_for = [](const std::string& dir, const std::string& stem, const std::string& answer) {
    return std::vector<std::string>{dir + "/" + stem + ".wav", dir + "/" + stem + ".svg", answer};
  };
  const std::uint64_t base = 1000 * static_cast<std::uint64_t>(day);

  // Glitches, at a 1600 Hz ceiling.
  SonificationSpec glitch_spec;
  glitch_spec.f_max_hz = 1600.0;
  const std::vector<std::pair<std::string, std::string>> glitch_keys{
      {"blip", "b"}, {"koi_fish", "k"}, {"scattered_light", "s"}};
  std::vector<std::size_t> glitch_order =
      day == 1 ? std::vector<std::size_t>{0, 1, 2} : std::vector<std::size_t>{1, 0, 2, 2, 1, 0};
  std::vector<std::vector<std::string>> glitch_rows;
  for (std::size_t n = 0; n < glitch_order.size(); ++n) {
    const auto& [kind, key] = glitch_keys[glitch_order[n]];
    DataSeries s = glitch(kind, base + n);
    s.name = kind + "_" + std::to_string(n + 1);
    b.sonified("glitches", s, glitch_spec);
    glitch_rows.push_back(row_for("glitches", s.name, key));
  }
  const std::string glitch_table = b.table("glitches", header, glitch_rows);

  // Particles: day 1 shows one event, day 2 two.
  SonificationSpec particle_spec;
  auto particle_table = [&](const std::string& name, const std::vector<std::string>& kinds,
                            std::uint64_t seed) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t n = 0; n < kinds.size(); ++n) {
      DataSeries s = particle(kinds[n], seed + n);
      s.name = name + "_" + kinds[n];
      b.sonified("particles", s, particle_spec);
      rows.push_back(row_for("particles", s.name, particle_key(kinds[n])));
    }
    return b.table(name, header, rows);
  };

  // Muons.
  SonificationSpec muon_spec;
  const std::vector<bool> muon_present =
      day == 1 ? std::vector<bool>{false, true}
               : std::vector<bool>{true, false, false, true, true, false};
  std::vector<std::vector<std::string>> muon_rows;
  for (std::size_t n = 0; n < muon_present.size(); ++n) {
    DataSeries s = muon(muon_present[n], base + 500 + n);
    s.name += "_" + std::to_string(n + 1);
    b.sonified("muons", s, muon_spec);
    muon_rows.push_back(row_for("muons", s.name, muon_present[n] ? "y" : "n"));
  }
  const std::string muon_table = b.table("muons", header, muon_rows);

  TrialShape glitch_shape;
  glitch_shape.stimulus_s = 38.0;
  glitch_shape.keys = {"b", "k", "s"};
  glitch_shape.prompt = "Which glitch was it? b = blip, k = koi-fish, s = scattered light";
  glitch_shape.feedback =
      feedback("Excellent job!!", "Oops!! This seems to belong to a different glich class", 2.0);

  TrialShape particle_shape;
  particle_shape.stimulus_s = 5.0;
  particle_shape.keys = {"c", "e", "m", "p", "u"};
  particle_shape.prompt =
      "Which particle was it? c = converted photon, e = electron, m = muon, p = photon, "
      "u = unknown";
  particle_shape.feedback = feedback(
      "Excellent job!!", "Oops!! This seems to belong to a different particle class", 2.0);

  TrialShape muon_shape;
  muon_shape.stimulus_s = 4.0;
  muon_shape.keys = {"y", "n"};
  muon_shape.prompt = "Was there a muon? y = yes, n = no";
  muon_shape.feedback =
      feedback("Excellent job!!", "Oops!! Listen again for the rising steps", 2.0);

  auto narrated = [&](const std::string& name, const std::string& text, double duration) {
    p.routines.push_back(text_routine(name, text, duration, b.narration(name)));
  };

  narrated("welcome",
           "Welcome! You will hear and see three kinds of data. Answer with the keys shown.", 12.0);
  narrated("intro_glitches",
           "Block 1: glitches. Press b for blip, k for koi-fish or s for scattered light.", 12.0);
  p.routines.push_back(trial_routine("glitch", glitch_shape));
  narrated("intro_particles",
           "Block 2: particles from the LHC. Press c, e, m, p or u. Not every class appears in "
           "every event.",
           12.0);
  p.routines.push_back(trial_routine("particle", particle_shape));
  if (day == 2) narrated("intro_event2", "Now the particles of a second event.", 6.0);
  narrated("intro_muons", "Block 3: cosmic muons. Press y if you detect a muon, n if not.", 12.0);
  p.routines.push_back(trial_routine("muon_detection", muon_shape));
  narrated("goodbye", "That is all. Thank you for taking part!", 6.0);

  p.flow.emplace_back(RoutineRef{"welcome"});
  p.flow.emplace_back(RoutineRef{"intro_glitches"});
  p.flow.emplace_back(sequential_loop("glitches", glitch_table, "glitch"));
  p.flow.emplace_back(RoutineRef{"intro_particles"});
  if (day == 1) {
    const std::string t = particle_table(
        "particles", {"electron", "muon", "photon", "converted_photon", "unknown"}, base + 100);
    p.flow.emplace_back(sequential_loop("particles", t, "particle"));
  } else {
    const std::string t1 = particle_table(
        "particles_event1", {"muon", "electron", "unknown", "photon", "converted_photon"},
        base + 100);
    const std::string t2 = particle_table(
        "particles_event2", {"photon", "converted_photon", "muon", "electron", "unknown"},
        base + 200);
    p.flow.emplace_back(sequential_loop("particles_event1", t1, "particle"));
    p.flow.emplace_back(RoutineRef{"intro_event2"});
    p.flow.emplace_back(sequential_loop("particles_event2", t2, "particle"));
  }
  p.flow.emplace_back(RoutineRef{"intro_muons"});
  p.flow.emplace_back(sequential_loop("muons", muon_table, "muon_detection"));
  p.flow.emplace_back(RoutineRef{"goodbye"});
}

TrainingPlan build(std::string_view id, const fs::path* out) {
  Builder b{std::string(id), out};
  if (id == "prototype") {
    build_prototype(b);
  } else if (id == "workshop-1") {
    build_workshop1(b);
  } else if (id == "workshop-2-day-1") {
    build_workshop2(b, 1);
  } else if (id == "workshop-2-day-2") {
    build_workshop2(b, 2);
  } else {
    throw std::invalid_argument("unknown bundled training '" + std::string(id) + "'");
  }
  return std::move(b.plan);
}

}  // namespace

const std::vector<std::string>& training_ids() {
  static const std::vector<std::string> ids{"prototype", "workshop-1", "workshop-2-day-1",
                                            "workshop-2-day-2"};
  return ids;
}

plan::TrainingPlan make_plan(std::string_view id) { return build(id, nullptr); }

fs::path write_training(std::string_view id, const fs::path& dir) {
  // Validate the id before touching the filesystem.
  bool known = false;
  for (const auto& k : training_ids()) known = known || k == id;
  if (!known) throw std::invalid_argument("unknown bundled training '" + std::string(id) + "'");

  fs::create_directories(dir);
  const TrainingPlan plan = build(id, &dir);
  const fs::path path = dir / (std::string(id) + ".training.json");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << plan::serialize_plan(plan);
  if (!f.flush()) throw std::runtime_error("cannot write " + path.string());
  return path;
}

std::vector<fs::path> write_all(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& id : training_ids()) out.push_back(write_training(id, dir));
  return out;
}

}  // namespace sonda::bundled
