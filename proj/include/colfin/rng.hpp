// Copyright 2026 The colfin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace colfin {

// Counter-based generation: every draw is a pure function of (key, counter),
// so streams can be cloned, replayed, and evaluated out of order (per-pixel
// noise indexes by pixel, not by draw order).

/// Philox 2x64-10 block function.
struct Philox2x64 {
  static constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ULL;
  static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

  static std::pair<std::uint64_t, std::uint64_t> block(std::uint64_t c0,
                                                       std::uint64_t c1,
                                                       std::uint64_t key) {
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 prod =
          static_cast<unsigned __int128>(kMul) * c0;
      const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
      const std::uint64_t lo = static_cast<std::uint64_t>(prod);
      c0 = hi ^ key ^ c1;
      c1 = lo;
      key += kWeyl;
    }
    return {c0, c1};
  }
};

inline std::uint64_t philox_word(std::uint64_t c0, std::uint64_t c1,
                                 std::uint64_t key) {
  return Philox2x64::block(c0, c1, key).first;
}

/// Value-semantics random stream: a Philox key plus a draw counter.
struct RandomStream {
  std::uint64_t key = 0;
  std::uint64_t counter = 0;

  /// Child stream keyed by (tag, domain) under a master seed. Identical
  /// inputs always yield the identical stream.
  static RandomStream derive(std::uint64_t master, std::uint64_t tag,
                             std::uint64_t domain) {
    return RandomStream{philox_word(tag, domain, master), 0};
  }

  std::uint64_t next_u64() { return philox_word(counter++, 0, key); }

  /// Uniform in [0,1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  bool next_bool() { return (next_u64() & 1u) != 0; }

  /// Standard normal via Box-Muller; consumes two words per draw.
  double next_gaussian() {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }
};

/// Order-independent uniform in [0,1) addressed by (key, index, salt).
inline double uniform_at(std::uint64_t key, std::uint64_t index,
                         std::uint64_t salt) {
  return static_cast<double>(philox_word(index, salt, key) >> 11) * 0x1.0p-53;
}

/// Order-independent standard normal addressed by (key, index, salt).
inline double gaussian_at(std::uint64_t key, std::uint64_t index,
                          std::uint64_t salt) {
  const auto words = Philox2x64::block(index, salt, key);
  const double u1 =
      (static_cast<double>(words.first >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
  const double u2 = static_cast<double>(words.second >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace colfin
