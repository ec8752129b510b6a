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

// Test-only helpers. Nothing here calls into the library code it is used to
// check: the WAV reader, SVG scanner and PRNG are written from the formats'
// definitions.

#ifndef SONDA_TESTS_SUPPORT_HPP_
#define SONDA_TESTS_SUPPORT_HPP_

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace sonda::testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "sonda-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

// SplitMix64 written out from its published definition.
struct RefSplitMix {
  std::uint64_t s;
  std::uint64_t operator()() {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s;
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }
};

struct DecodedWav {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint32_t byte_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
  std::uint32_t riff_size = 0;
  std::vector<std::int16_t> samples;
};

// Minimal RIFF walker: checks the container, finds "fmt " and "data".
inline std::optional<DecodedWav> decode_wav(std::string_view b) {
  auto u32 = [&](std::size_t at) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
  };
  auto u16 = [&](std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                      static_cast<unsigned char>(b[at + 1]) << 8);
  };
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") return std::nullopt;
  DecodedWav w;
  w.riff_size = u32(4);
  bool have_fmt = false, have_data = false;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const std::string_view id = b.substr(at, 4);
    const std::uint32_t size = u32(at + 4);
    const std::size_t body = at + 8;
    if (body + size > b.size()) return std::nullopt;
    if (id == "fmt ") {
      if (size < 16) return std::nullopt;
      w.format = u16(body);
      w.channels = u16(body + 2);
      w.sample_rate = u32(body + 4);
      w.byte_rate = u32(body + 8);
      w.block_align = u16(body + 12);
      w.bits = u16(body + 14);
      have_fmt = true;
    } else if (id == "data") {
      for (std::size_t i = 0; i + 1 < size; i += 2) {
        w.samples.push_back(static_cast<std::int16_t>(u16(body + i)));
      }
      have_data = true;
    }
    at = body + size + (size & 1);
  }
  if (!have_fmt || !have_data) return std::nullopt;
  return w;
}

// Coordinates of every `points="..."` attribute on polyline elements.
inline std::vector<std::vector<std::pair<double, double>>> svg_polylines(const std::string& svg) {
  std::vector<std::vector<std::pair<double, double>>> out;
  std::size_t at = 0;
  while ((at = svg.find("<polyline", at)) != std::string::npos) {
    const std::size_t end = svg.find('>', at);
    const std::size_t p = svg.find("points=\"", at);
    if (p == std::string::npos || p > end) {
      at = end;
      continue;
    }
    const std::size_t q = svg.find('"', p + 8);
    std::istringstream in(svg.substr(p + 8, q - p - 8));
    std::vector<std::pair<double, double>> pts;
    std::string pair;
    while (in >> pair) {
      const auto comma = pair.find(',');
      pts.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
    }
    out.push_back(std::move(pts));
    at = q;
  }
  return out;
}

// Sign changes between consecutive samples, zero counted as positive.
template <typename Seq>
std::size_t sign_changes(const Seq& s, std::size_t begin = 0, std::size_t end = SIZE_MAX) {
  end = std::min<std::size_t>(end, s.size());
  std::size_t n = 0;
  for (std::size_t i = begin + 1; i < end; ++i) n += (s[i - 1] >= 0) != (s[i] >= 0);
  return n;
}

struct ProcessResult {
  int status = -1;
  std::string out;
};

// Runs `command` through /bin/sh, capturing stdout.
inline ProcessResult run_command(const std::string& command) {
  ProcessResult r;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int st = ::pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

inline std::string quote(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace sonda::testing

#endif  // SONDA_TESTS_SUPPORT_HPP_
