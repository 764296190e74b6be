// Copyright 2026 The qgt Authors
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

#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace qgt {

/// Counter-based random generator.
///
/// The n-th output is a pure function of (key, n), so a stream can be
/// reproduced anywhere from its key alone.  `split(id)` derives an
/// independent child stream; every sampling site in the library takes an
/// explicit `Rng` so that experiments are bit-reproducible across processes.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into the <random>
/// distributions directly.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc908ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Child stream `id`; does not advance this generator.
  [[nodiscard]] Rng split(std::uint64_t id) const {
    Rng child;
    child.key_ = mix(key_ ^ mix(id + 0xbb67ae8584caa73bULL));
    return child;
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(*this); }

  double normal(double sigma) {
    if (sigma == 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(*this);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace qgt
