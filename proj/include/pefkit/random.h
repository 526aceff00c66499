// Copyright 2026 The pefkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seed derivation helpers. Every random stream in the library is keyed from a
// user seed through these, so results depend only on (seed, key).

#ifndef PEFKIT_RANDOM_H_
#define PEFKIT_RANDOM_H_

#include <cstdint>
#include <string_view>

namespace pefkit {

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t key) {
  return Mix64(Mix64(seed) ^ Mix64(key + 0x632BE59BD9B4E019ULL));
}

// FNV-1a, used to turn labels such as a subcommand name into a key.
constexpr std::uint64_t HashLabel(std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view label) {
  return DeriveSeed(seed, HashLabel(label));
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double UnitInterval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace pefkit

#endif  // PEFKIT_RANDOM_H_
