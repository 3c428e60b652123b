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

// Shamir threshold sharing of byte strings. The secret is cut into 31-byte
// limbs and each limb is shared independently over GF(2^256 - 189).

#ifndef PPRL_SECRET_SHARING_H_
#define PPRL_SECRET_SHARING_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace pprl {

inline constexpr size_t kShareLimbBytes = 31;
inline constexpr size_t kShareElementBytes = 32;

struct Share {
  uint32_t index = 0;  // evaluation point, 1..n
  // One 32-byte big-endian field element per limb.
  std::vector<uint8_t> value;

  friend bool operator==(const Share&, const Share&) = default;
};

struct SecretShares {
  uint32_t threshold = 0;
  uint32_t total = 0;
  uint64_t secret_length = 0;
  std::vector<Share> shares;
};

// Requires 1 <= threshold <= total <= 255. Polynomial coefficients are drawn
// from rng by rejection sampling.
absl::StatusOr<SecretShares> SplitSecret(const std::vector<uint8_t>& secret,
                                         uint32_t threshold, uint32_t total,
                                         std::mt19937_64& rng);

// Reconstructs from any `threshold` or more distinct shares. Fewer shares,
// duplicate indices or malformed values are errors.
absl::StatusOr<std::vector<uint8_t>> RecombineSecret(
    const std::vector<Share>& shares, uint32_t threshold,
    uint64_t secret_length);

// One `index:hex` line per share after a `# threshold=t total=n length=L`
// header line.
std::string SerializeShares(const SecretShares& shares);
absl::StatusOr<SecretShares> ParseShares(absl::string_view content);

}  // namespace pprl

#endif  // PPRL_SECRET_SHARING_H_
