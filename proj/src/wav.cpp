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

#include "sonda/wav.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace sonda::stimulus {

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

}  // namespace

std::int16_t to_pcm16(float sample) {
  const double scaled = std::round(static_cast<double>(sample) * 32767.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

std::string encode_wav(const AudioBuffer& buffer) {
  if (buffer.sample_rate_hz <= 0) {
    throw StimulusError(ErrorKind::invalid_spec, "sample rate must be > 0");
  }
  for (float s : buffer.samples) {
    if (!(s >= -1.0f && s <= 1.0f)) {
      throw StimulusError(ErrorKind::invalid_spec, "sample outside [-1, 1]");
    }
  }
  const std::uint64_t data_bytes = 2ull * buffer.samples.size();
  if (data_bytes > 0xFFFFFFFFull - 36) {
    throw StimulusError(ErrorKind::invalid_spec, "buffer too long for a WAV file");
  }
  const auto rate = static_cast<std::uint32_t>(buffer.sample_rate_hz);

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, static_cast<std::uint32_t>(36 + data_bytes));
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);        // fmt chunk size
  put_u16(out, 1);         // PCM
  put_u16(out, 1);         // mono
  put_u32(out, rate);
  put_u32(out, rate * 2);  // byte rate
  put_u16(out, 2);         // block align
  put_u16(out, 16);        // bits per sample
  out += "data";
  put_u32(out, static_cast<std::uint32_t>(data_bytes));
  for (float s : buffer.samples) put_u16(out, static_cast<std::uint16_t>(to_pcm16(s)));
  return out;
}

std::size_t write_wav(const AudioBuffer& buffer, std::ostream& sink) {
  const std::string bytes = encode_wav(buffer);
  sink.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw SinkError("failed to write WAV data");
  return bytes.size();
}

std::size_t write_wav_file(const AudioBuffer& buffer, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SinkError("cannot open " + path.string() + " for writing");
  const std::size_t n = write_wav(buffer, out);
  out.close();
  if (!out) throw SinkError("failed to write " + path.string());
  return n;
}

}  // namespace sonda::stimulus
