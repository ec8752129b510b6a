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

#ifndef SONDA_WAV_HPP_
#define SONDA_WAV_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sonda/stimulus.hpp"

namespace sonda::stimulus {

class SinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// round(s * 32767), clamped to the int16 range.
std::int16_t to_pcm16(float sample);

/// Canonical 44-byte RIFF/WAVE header followed by mono 16-bit little-endian
/// PCM. Always 44 + 2 * N bytes.
std::string encode_wav(const AudioBuffer& buffer);

/// Returns the number of bytes written. Throws SinkError when the stream
/// fails.
std::size_t write_wav(const AudioBuffer& buffer, std::ostream& sink);

std::size_t write_wav_file(const AudioBuffer& buffer, const std::filesystem::path& path);

}  // namespace sonda::stimulus

#endif  // SONDA_WAV_HPP_
