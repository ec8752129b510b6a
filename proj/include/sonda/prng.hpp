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

#ifndef SONDA_PRNG_HPP_
#define SONDA_PRNG_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace sonda {

/// SplitMix64 (Steele, Lea & Flood). Loop shuffles and noise synthesis both
/// draw from this generator so that any implementation reproduces the same
/// trial order and the same noise samples from a seed.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  constexpr double next_unit() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [-1, 1).
  constexpr double next_signed_unit() noexcept { return 2.0 * next_unit() - 1.0; }

 private:
  std::uint64_t state_;
};

/// Fisher-Yates, walking from the back: for i = n-1 .. 1 swap element i with
/// element `next() % (i + 1)`.
template <typename T>
void shuffle(std::span<T> items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next() % i);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace sonda

#endif  // SONDA_PRNG_HPP_
