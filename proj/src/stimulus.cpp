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

#include "sonda/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sonda/csv.hpp"
#include "sonda/prng.hpp"

namespace sonda::stimulus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void invalid(const std::string& what) {
  throw StimulusError(ErrorKind::invalid_spec, what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

std::size_t sample_count(double seconds, int rate) {
  return static_cast<std::size_t>(std::llround(seconds * rate));
}

}  // namespace

void check(const ToneSpec& spec) {
  if (spec.sample_rate_hz <= 0) invalid("sample_rate_hz must be > 0");
  if (!finite_positive(spec.frequency_hz)) invalid("frequency_hz must be > 0");
  if (spec.frequency_hz >= spec.sample_rate_hz / 2.0) {
    invalid("frequency_hz must be below the Nyquist frequency");
  }
  if (!finite_positive(spec.duration_s)) invalid("duration_s must be > 0");
  if (!(spec.amplitude > 0.0 && spec.amplitude <= 1.0)) invalid("amplitude must be in (0, 1]");
  if (!(spec.noise_mix >= 0.0 && spec.noise_mix <= 1.0)) invalid("noise_mix must be in [0, 1]");
}

void check(const SonificationSpec& spec) {
  if (spec.sample_rate_hz <= 0) invalid("sample_rate_hz must be > 0");
  if (!finite_positive(spec.f_min_hz)) invalid("f_min_hz must be > 0");
  if (!std::isfinite(spec.f_max_hz) || !(spec.f_min_hz < spec.f_max_hz)) {
    invalid("f_min_hz must be below f_max_hz");
  }
  if (spec.f_max_hz >= spec.sample_rate_hz / 2.0) {
    invalid("f_max_hz must be below the Nyquist frequency");
  }
  if (!finite_positive(spec.note_duration_s)) invalid("note_duration_s must be > 0");
  if (!(spec.amplitude > 0.0 && spec.amplitude <= 1.0)) invalid("amplitude must be in (0, 1]");
  if (!std::isfinite(spec.ramp_s) || spec.ramp_s < 0.0) invalid("ramp_s must be >= 0");
  if (2.0 * spec.ramp_s > spec.note_duration_s) invalid("ramps longer than the note");
}

void check(const DataSeries& series) {
  if (series.y.empty()) invalid("series has no values");
  if (!series.x.empty()) {
    if (series.x.size() != series.y.size()) invalid("x and y lengths differ");
    for (std::size_t k = 1; k < series.x.size(); ++k) {
      if (series.x[k] < series.x[k - 1]) invalid("x must be non-decreasing");
    }
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(series.y.begin(), series.y.end(), finite) ||
      !std::all_of(series.x.begin(), series.x.end(), finite)) {
    throw StimulusError(ErrorKind::non_finite_data, "series contains non-finite values");
  }
}

AudioBuffer synth_tone(const ToneSpec& spec) {
  check(spec);
  AudioBuffer out;
  out.sample_rate_hz = spec.sample_rate_hz;
  const std::size_t n = sample_count(spec.duration_s, spec.sample_rate_hz);
  out.samples.resize(n);
  SplitMix64 noise(spec.noise_seed);
  const double step = kTwoPi * spec.frequency_hz / spec.sample_rate_hz;
  for (std::size_t k = 0; k < n; ++k) {
    const double tone = std::sin(step * static_cast<double>(k));
    // The noise stream advances on every sample so that the noise is the
    // same for a given seed whatever the mix.
    const double w = noise.next_signed_unit();
    out.samples[k] = static_cast<float>(
        spec.amplitude * ((1.0 - spec.noise_mix) * tone + spec.noise_mix * w));
  }
  return out;
}

std::vector<double> note_frequencies(const DataSeries& series, const SonificationSpec& spec) {
  check(spec);
  check(series);
  const auto [lo, hi] = std::minmax_element(series.y.begin(), series.y.end());
  const double y_min = *lo;
  const double y_max = *hi;
  std::vector<double> out;
  out.reserve(series.y.size());
  for (double y : series.y) {
    if (y_max == y_min) {
      out.push_back((spec.f_min_hz + spec.f_max_hz) / 2.0);
    } else {
      out.push_back(spec.f_min_hz +
                    (y - y_min) / (y_max - y_min) * (spec.f_max_hz - spec.f_min_hz));
    }
  }
  return out;
}

std::pair<std::size_t, std::size_t> note_span(std::size_t index, const SonificationSpec& spec) {
  const double rate = spec.sample_rate_hz;
  return {sample_count(static_cast<double>(index) * spec.note_duration_s, static_cast<int>(rate)),
          sample_count(static_cast<double>(index + 1) * spec.note_duration_s,
                       static_cast<int>(rate))};
}

AudioBuffer sonify(const DataSeries& series, const SonificationSpec& spec) {
  const std::vector<double> freqs = note_frequencies(series, spec);
  AudioBuffer out;
  out.sample_rate_hz = spec.sample_rate_hz;
  out.samples.resize(note_span(freqs.size() - 1, spec).second);

  const double ramp = spec.ramp_s * spec.sample_rate_hz;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const auto [first, last] = note_span(i, spec);
    const double len = static_cast<double>(last - first);
    const double step = kTwoPi * freqs[i] / spec.sample_rate_hz;
    for (std::size_t k = first; k < last; ++k) {
      const double local = static_cast<double>(k - first);
      double gain = 1.0;
      if (ramp > 0.0) gain = std::min({1.0, local / ramp, (len - local) / ramp});
      out.samples[k] = static_cast<float>(spec.amplitude * gain * std::sin(step * local));
    }
  }
  return out;
}

std::optional<FunctionKind> parse_function_kind(std::string_view name) {
  if (name == "sine") return FunctionKind::sine;
  if (name == "square") return FunctionKind::square;
  if (name == "increasing") return FunctionKind::increasing;
  if (name == "decreasing") return FunctionKind::decreasing;
  return std::nullopt;
}

std::string_view to_string(FunctionKind kind) {
  switch (kind) {
    case FunctionKind::sine: return "sine";
    case FunctionKind::square: return "square";
    case FunctionKind::increasing: return "increasing";
    case FunctionKind::decreasing: return "decreasing";
  }
  return "unknown";
}

DataSeries gen_function(FunctionKind kind, int n_points, double periods) {
  if (n_points < 2) invalid("n_points must be >= 2");
  const bool periodic = kind == FunctionKind::sine || kind == FunctionKind::square;
  if (periodic && !finite_positive(periods)) invalid("periods must be > 0");

  DataSeries s;
  s.name = std::string(to_string(kind));
  s.x.resize(static_cast<std::size_t>(n_points));
  s.y.resize(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) {
    const double t = static_cast<double>(k) / (n_points - 1);
    s.x[k] = t;
    switch (kind) {
      case FunctionKind::sine:
        s.y[k] = std::sin(kTwoPi * periods * t);
        break;
      case FunctionKind::square:
        s.y[k] = std::sin(kTwoPi * periods * t) >= 0.0 ? 1.0 : -1.0;
        break;
      case FunctionKind::increasing:
        s.y[k] = -1.0 + 2.0 * t;
        break;
      case FunctionKind::decreasing:
        s.y[k] = 1.0 - 2.0 * t;
        break;
    }
  }
  return s;
}

DataSeries gen_spectrum(double continuum, const std::vector<SpectralLine>& lines, int n_points,
                        std::pair<double, double> x_range) {
  if (n_points < 16) invalid("n_points must be >= 16");
  if (!std::isfinite(continuum)) invalid("continuum must be finite");
  const auto [x0, x1] = x_range;
  if (!std::isfinite(x0) || !std::isfinite(x1) || !(x0 < x1)) invalid("x_range must be increasing");
  for (const auto& line : lines) {
    if (!finite_positive(line.width)) invalid("line width must be > 0");
    if (!std::isfinite(line.center) || !std::isfinite(line.amplitude)) {
      invalid("line parameters must be finite");
    }
  }

  DataSeries s;
  s.name = "spectrum";
  s.x.resize(static_cast<std::size_t>(n_points));
  s.y.resize(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) {
    const double x = x0 + (x1 - x0) * static_cast<double>(k) / (n_points - 1);
    double y = continuum;
    for (const auto& line : lines) {
      const double d = x - line.center;
      y += line.amplitude * std::exp(-(d * d) / (2.0 * line.width * line.width));
    }
    s.x[k] = x;
    s.y[k] = y;
  }
  return s;
}

namespace {

std::optional<double> to_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return std::nullopt;
  std::string owned(text);
  char* end = nullptr;
  const double v = std::strtod(owned.c_str(), &end);
  if (end != owned.c_str() + owned.size()) return std::nullopt;
  return v;
}

void push_row(DataSeries& s, const std::vector<double>& values, std::size_t line) {
  if (values.size() == 1) {
    if (!s.x.empty()) invalid("line " + std::to_string(line) + ": missing x value");
    s.y.push_back(values[0]);
  } else if (values.size() == 2) {
    if (s.x.size() != s.y.size()) invalid("line " + std::to_string(line) + ": mixed column counts");
    s.x.push_back(values[0]);
    s.y.push_back(values[1]);
  } else {
    invalid("line " + std::to_string(line) + ": expected 1 or 2 columns");
  }
}

}  // namespace

DataSeries parse_series(std::string_view text, bool is_csv, std::string name) {
  DataSeries s;
  s.name = std::move(name);
  if (is_csv) {
    std::vector<csv::Record> records;
    try {
      records = csv::parse(text);
    } catch (const csv::SyntaxError& e) {
      invalid(e.what());
    }
    bool first = true;
    for (const auto& rec : records) {
      if (rec.fields.size() == 1 && rec.fields[0].find_first_not_of(" \t\r") == std::string::npos) {
        continue;
      }
      std::vector<double> values;
      bool numeric = true;
      for (const auto& f : rec.fields) {
        auto v = to_number(f);
        if (!v) {
          numeric = false;
          break;
        }
        values.push_back(*v);
      }
      if (!numeric) {
        if (first) {
          first = false;
          continue;  // header row
        }
        invalid("line " + std::to_string(rec.line) + ": non-numeric value");
      }
      first = false;
      push_row(s, values, rec.line);
    }
  } else {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      std::istringstream fields(line);
      std::vector<double> values;
      std::string token;
      while (fields >> token) {
        auto v = to_number(token);
        if (!v) invalid("line " + std::to_string(line_no) + ": non-numeric value");
        values.push_back(*v);
      }
      if (!values.empty()) push_row(s, values, line_no);
    }
  }
  check(s);
  return s;
}

DataSeries load_series(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) invalid("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return parse_series(buf.str(), ext == ".csv", path.stem().string());
}

}  // namespace sonda::stimulus
