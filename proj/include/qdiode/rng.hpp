// Copyright 2026 The qdiode Authors
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

#ifndef QDIODE_RNG_HPP
#define QDIODE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace qdiode {

// Counter-style PRNG built on splitmix64. Streams are derived from a
// (seed, purpose, index...) key, so draws are reproducible bit-for-bit and
// independent of execution order or thread count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {
    // Burn a few outputs so nearby keys decorrelate.
    next_u64();
    next_u64();
  }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return split(a ^ (split(b) + 0x9e3779b97f4a7c15ULL));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return split(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (no cached second value; determinism first).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t split(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Builds a stream key from a seed plus up to three context indices.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t purpose,
                                std::uint64_t i = 0, std::uint64_t j = 0,
                                std::uint64_t k = 0) {
  std::uint64_t key = RngStream::mix(seed, purpose);
  key = RngStream::mix(key, i + 1);
  key = RngStream::mix(key, j + 1);
  key = RngStream::mix(key, k + 1);
  return key;
}

}  // namespace qdiode

#endif  // QDIODE_RNG_HPP
