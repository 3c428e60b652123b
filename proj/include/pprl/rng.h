// Copyright 2026 The pprlkit Authors.
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

// Seed derivation. Every random stream in the toolkit is obtained from a
// master seed and a label, so adding a stream never perturbs the others.

#ifndef PPRL_RNG_H_
#define PPRL_RNG_H_

#include <cstdint>
#include <random>
#include "absl/strings/string_view.h"

namespace pprl {

// First 8 bytes (big-endian) of SHA-256(be64(master) || label).
uint64_t DeriveSeed(uint64_t master, absl::string_view label);

inline std::mt19937_64 MakeRng(uint64_t master, absl::string_view label) {
  return std::mt19937_64(DeriveSeed(master, label));
}

// One step of the splitmix64 finalizer; cheap per-item seeding.
inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace pprl

#endif  // PPRL_RNG_H_
