// Copyright 2026 The crashgen Authors
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

namespace crashgen
{

/// Deterministic 64-bit generator (splitmix64). Every random choice in the
/// toolkit flows through this type so that a single seed reproduces runs
/// byte-for-byte across platforms; std::random distributions are avoided
/// because their output is implementation-defined.
class Rng
{
public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next()
  {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0. Multiply-shift mapping:
  /// biased by at most n/2^64, deterministic (no rejection loop).
  uint64_t uniform_int(uint64_t n)
  {
    return static_cast<uint64_t>(
      (static_cast<__uint128_t>(next()) * static_cast<__uint128_t>(n)) >> 64);
  }

  /// Standard normal via Box-Muller. Draws two uniforms per pair; the
  /// second value is cached so consumption order stays well defined.
  double normal()
  {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u1 = uniform();
    double u2 = uniform();
    // uniform() can return exactly 0; nudge to keep log finite.
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cache_ = r * std::sin(a);
    has_cache_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Independent substream for a labelled purpose. Does not consume state.
  Rng fork(uint64_t salt) const
  {
    uint64_t z = state_ ^ (0xD1B54A32D192ED03ULL * (salt + 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return Rng(z ^ (z >> 31));
  }

private:
  uint64_t state_;
  double cache_ = 0.0;
  bool has_cache_ = false;
};

}  // namespace crashgen
