// Copyright 2026 The fleetplan Authors.
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

#ifndef FLEETPLAN_RANDOM_HPP_
#define FLEETPLAN_RANDOM_HPP_

#include <cstdint>
#include <cmath>
#include <random>

namespace fleetplan {

// Portable uniform draws on top of mt19937_64. The standard distributions are
// implementation-defined, so seeded results would differ across toolchains.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // (0, 1)
  double next_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  // Exponential with the given rate.
  double next_exponential(double rate);
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline double UniformStream::next_exponential(double rate) {
  return -std::log(next_open()) / rate;
}

// Derives an independent stream seed from a base seed and a tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace fleetplan

#endif  // FLEETPLAN_RANDOM_HPP_
