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

// Keyed and unkeyed hash primitives: SHA-2 digests, HMAC-SHA256 tags,
// Carter-Wegman universal hashing, (enhanced) double hashing and bi-gram
// extraction for boundary-padded names.

#ifndef PPRL_HASHCORE_H_
#define PPRL_HASHCORE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/statusor.h"

namespace pprl {

using Digest256 = std::array<uint8_t, 32>;
using Digest512 = std::array<uint8_t, 64>;
using HmacTag = Digest256;

Digest256 Sha256(absl::string_view input);
Digest512 Sha512(absl::string_view input);
std::array<uint8_t, 20> Sha1(absl::string_view input);
std::array<uint8_t, 16> Md5(absl::string_view input);

// Lowercase hex of SHA-256(input).
std::string Sha256Hex(absl::string_view input);

std::string HexEncode(std::span<const uint8_t> bytes);
absl::StatusOr<std::vector<uint8_t>> HexDecode(absl::string_view hex);

// Big-endian integer from the first 8 bytes of `bytes` (which must hold at
// least 8).
uint64_t LoadBigEndian64(std::span<const uint8_t> bytes);

// 32-byte HMAC secret. The bytes are deliberately not printable through any
// stream operator; only the key file writer emits them.
class HmacKey {
 public:
  static constexpr size_t kSize = 32;

  // Fresh key from the operating system CSPRNG.
  static HmacKey Generate(std::string key_id);
  // Deterministic key for reproducible experiment runs. Never use for real
  // data.
  static HmacKey FromSeed(uint64_t seed, std::string key_id);
  static absl::StatusOr<HmacKey> FromBytes(std::string key_id,
                                           std::span<const uint8_t> bytes);

  const std::string& key_id() const { return key_id_; }
  std::span<const uint8_t, kSize> bytes() const { return bytes_; }

  friend bool operator==(const HmacKey&, const HmacKey&) = default;

 private:
  HmacKey(std::string key_id, const std::array<uint8_t, kSize>& bytes)
      : key_id_(std::move(key_id)), bytes_(bytes) {}

  std::string key_id_;
  std::array<uint8_t, kSize> bytes_;
};

// HMAC-SHA256(key, message).
HmacTag ComputeHmac(const HmacKey& key, absl::string_view message);

// Key files hold one `key_id:hex` line per key.
absl::StatusOr<std::vector<HmacKey>> ReadKeyFile(const std::string& path);
absl::Status WriteKeyFile(const std::string& path,
                          std::span<const HmacKey> keys);

// The Mersenne prime 2^61 - 1.
inline constexpr uint64_t kMersenne61 = (uint64_t{1} << 61) - 1;

// Parameters of h(x) = ((a*x + b) mod p) mod range.
struct UniversalHashParams {
  uint64_t a = 1;
  uint64_t b = 0;
  uint64_t p = kMersenne61;
  uint64_t range = 2;

  // Validates a in [1, p-1], b in [0, p-1], p == 2^61-1, range >= 1.
  static absl::StatusOr<UniversalHashParams> Create(uint64_t a, uint64_t b,
                                                    uint64_t range);
  static UniversalHashParams Random(std::mt19937_64& rng, uint64_t range);
};

uint64_t UniversalHash(const UniversalHashParams& params, uint64_t x);

enum class DoubleHashEnhancement {
  kPlain,     // f(i) = 0
  kEnhanced,  // f(i) = (i^3 - i) / 6
};

enum class HashPair {
  // Two 64-bit slices (bytes [0,8) and [32,40)) of one SHA-512 digest.
  kSha512Split,
  // SHA-1 for h1 and MD5 for h2, as in the older linkage literature.
  kSha1Md5,
};

absl::StatusOr<HashPair> ParseHashPair(absl::string_view name);
absl::string_view HashPairName(HashPair pair);

struct DoubleHashParams {
  uint64_t m = 100;
  uint32_t k = 3;
  DoubleHashEnhancement enhancement = DoubleHashEnhancement::kPlain;
  HashPair hash_pair = HashPair::kSha512Split;

  absl::Status Validate() const;
};

struct BaseHashes {
  uint64_t h1;
  uint64_t h2;
};

BaseHashes ComputeBaseHashes(HashPair pair, absl::string_view element);

// g_i(x) = h1(x) + i*h2(x) + f(i) mod m, for i = 0..k-1.
std::vector<uint64_t> DoubleHashIndices(const DoubleHashParams& params,
                                        absl::string_view element);
void DoubleHashIndicesFrom(const DoubleHashParams& params, BaseHashes base,
                           std::vector<uint64_t>& out);

// A bi-gram packed as (first byte << 8) | second byte, i.e. the two bytes
// read as a 16-bit big-endian integer.
using BigramCode = uint16_t;

inline constexpr char kBigramPad = '_';

std::string BigramString(BigramCode code);

// The set of bi-grams of "_" + name + "_". Order and multiplicity are lost,
// so "petitt" and "pettit" produce the same set.
class BigramSet {
 public:
  BigramSet() = default;

  static absl::StatusOr<BigramSet> FromName(absl::string_view name);
  static BigramSet FromCodes(std::vector<BigramCode> codes);

  // Sorted, unique.
  const std::vector<BigramCode>& codes() const { return codes_; }
  size_t size() const { return codes_.size(); }
  bool empty() const { return codes_.empty(); }
  bool Contains(BigramCode code) const;
  std::vector<std::string> ToStrings() const;

  friend bool operator==(const BigramSet&, const BigramSet&) = default;

 private:
  std::vector<BigramCode> codes_;
};

absl::StatusOr<BigramSet> Bigrams(absl::string_view name);

// All bi-grams of the padded name with multiplicity, sorted.
absl::StatusOr<std::vector<BigramCode>> BigramMultiset(absl::string_view name);

}  // namespace pprl

#endif  // PPRL_HASHCORE_H_
