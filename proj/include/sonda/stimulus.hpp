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

#ifndef SONDA_STIMULUS_HPP_
#define SONDA_STIMULUS_HPP_

/// \file
/// Auditory stimulus synthesis and stand-in data series.
///
/// Everything here is a pure function of its arguments. Noise is drawn from
/// SplitMix64 seeded from the ToneSpec, so equal specs produce equal samples.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sonda::stimulus {

enum class ErrorKind { invalid_spec, non_finite_data };

class StimulusError : public std::runtime_error {
 public:
  StimulusError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ToneSpec {
  double frequency_hz = 440.0;
  double duration_s = 1.0;
  int sample_rate_hz = 44100;
  double amplitude = 0.8;
  /// Share of white noise in the mix: 0 is a pure sine, 1 pure noise.
  double noise_mix = 0.0;
  std::uint64_t noise_seed = 0;
};

struct SonificationSpec {
  double f_min_hz = 220.0;
  double f_max_hz = 1700.0;
  double note_duration_s = 0.1;
  int sample_rate_hz = 44100;
  double amplitude = 0.8;
  double ramp_s = 0.005;
};

struct DataSeries {
  /// Empty when the series is indexed by position only.
  std::vector<double> x;
  std::vector<double> y;
  std::string name;
};

struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate_hz = 44100;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

void check(const ToneSpec& spec);
void check(const SonificationSpec& spec);
void check(const DataSeries& series);

/// amplitude * ((1 - mix) * sin(2 pi f n / sr) + mix * w[n]), w uniform in
/// [-1, 1) from SplitMix64(noise_seed).
AudioBuffer synth_tone(const ToneSpec& spec);

/// Target frequency of each note: linear from [y_min, y_max] onto
/// [f_min, f_max]; a flat series maps every value to the midpoint.
std::vector<double> note_frequencies(const DataSeries& series, const SonificationSpec& spec);

/// One fixed-length sine note per value with linear attack and release.
AudioBuffer sonify(const DataSeries& series, const SonificationSpec& spec);

/// Sample range [first, second) of note `index` in a sonify() buffer.
std::pair<std::size_t, std::size_t> note_span(std::size_t index, const SonificationSpec& spec);

enum class FunctionKind { sine, square, increasing, decreasing };

std::optional<FunctionKind> parse_function_kind(std::string_view name);
std::string_view to_string(FunctionKind kind);

/// x runs over [0, 1]; y stays in [-1, 1].
DataSeries gen_function(FunctionKind kind, int n_points, double periods);

struct SpectralLine {
  double center = 0.0;
  double width = 1.0;
  /// Positive for emission, negative for absorption.
  double amplitude = 0.0;
};

/// continuum + sum of Gaussian lines sampled on n_points evenly spaced x.
DataSeries gen_spectrum(double continuum, const std::vector<SpectralLine>& lines,
                        int n_points, std::pair<double, double> x_range);

/// `.csv`: `x,y` or a single `y` column, optional header row.
/// Anything else: whitespace-separated columns, `#` starts a comment.
DataSeries parse_series(std::string_view text, bool is_csv, std::string name = {});
DataSeries load_series(const std::filesystem::path& path);

}  // namespace sonda::stimulus

#endif  // SONDA_STIMULUS_HPP_
