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

#include "pprl/hashcore.h"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace pprl {
namespace {

template <size_t N>
std::array<uint8_t, N> EvpDigest(const EVP_MD* md, absl::string_view input) {
  std::array<uint8_t, N> out{};
  unsigned int len = 0;
  if (EVP_Digest(input.data(), input.size(), out.data(), &len, md, nullptr) !=
          1 ||
      len != N) {
    // Only reachable if the crypto library itself is broken.
    throw std::runtime_error("EVP_Digest failed");
  }
  return out;
}

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Reduces a value below 2^122 modulo 2^61 - 1.
uint64_t ReduceMersenne61(unsigned __int128 v) {
  uint64_t lo = static_cast<uint64_t>(v & kMersenne61);
  uint64_t hi = static_cast<uint64_t>(v >> 61);
  uint64_t r = lo + (hi & kMersenne61) + (hi >> 61);
  r = (r & kMersenne61) + (r >> 61);
  if (r >= kMersenne61) r -= kMersenne61;
  return r;
}

}  // namespace

Digest256 Sha256(absl::string_view input) {
  return EvpDigest<32>(EVP_sha256(), input);
}

Digest512 Sha512(absl::string_view input) {
  return EvpDigest<64>(EVP_sha512(), input);
}

std::array<uint8_t, 20> Sha1(absl::string_view input) {
  return EvpDigest<20>(EVP_sha1(), input);
}

std::array<uint8_t, 16> Md5(absl::string_view input) {
  return EvpDigest<16>(EVP_md5(), input);
}

std::string Sha256Hex(absl::string_view input) { return HexEncode(Sha256(input)); }

std::string HexEncode(std::span<const uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

absl::StatusOr<std::vector<uint8_t>> HexDecode(absl::string_view hex) {
  if (hex.size() % 2 != 0) {
    return absl::InvalidArgumentError("hex string has odd length");
  }
  std::vector<uint8_t> out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = HexValue(hex[2 * i]);
    int lo = HexValue(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid hex digit at offset ", 2 * i));
    }
    out[i] = static_cast<uint8_t>((hi << 4) | lo);
  }
  return out;
}

uint64_t LoadBigEndian64(std::span<const uint8_t> bytes) {
  uint64_t v = 0;
  for (size_t i = 0; i < 8; ++i) v = (v << 8) | bytes[i];
  return v;
}

HmacKey HmacKey::Generate(std::string key_id) {
  std::array<uint8_t, kSize> bytes{};
  if (RAND_bytes(bytes.data(), static_cast<int>(bytes.size())) != 1) {
    throw std::runtime_error("RAND_bytes failed");
  }
  return HmacKey(std::move(key_id), bytes);
}

HmacKey HmacKey::FromSeed(uint64_t seed, std::string key_id) {
  std::string material = absl::StrCat("pprl-experiment-key\x1f", seed, "\x1f",
                                      key_id);
  return HmacKey(std::move(key_id), Sha256(material));
}

absl::StatusOr<HmacKey> HmacKey::FromBytes(std::string key_id,
                                           std::span<const uint8_t> bytes) {
  if (bytes.size() != kSize) {
    return absl::InvalidArgumentError(
        absl::StrCat("HMAC key must be ", kSize, " bytes, got ", bytes.size()));
  }
  if (key_id.empty() || key_id.find(':') != std::string::npos) {
    return absl::InvalidArgumentError("key id must be non-empty without ':'");
  }
  std::array<uint8_t, kSize> arr{};
  std::copy(bytes.begin(), bytes.end(), arr.begin());
  return HmacKey(std::move(key_id), arr);
}

HmacTag ComputeHmac(const HmacKey& key, absl::string_view message) {
  HmacTag tag{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.bytes().data(), HmacKey::kSize,
           reinterpret_cast<const unsigned char*>(message.data()),
           message.size(), tag.data(), &len) == nullptr ||
      len != tag.size()) {
    throw std::runtime_error("HMAC failed");
  }
  return tag;
}

absl::StatusOr<std::vector<HmacKey>> ReadKeyFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::vector<HmacKey> keys;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view view = absl::StripAsciiWhitespace(line);
    if (view.empty() || view.front() == '#') continue;
    std::pair<absl::string_view, absl::string_view> parts =
        absl::StrSplit(view, absl::MaxSplits(':', 1));
    absl::StatusOr<std::vector<uint8_t>> bytes = HexDecode(parts.second);
    if (!bytes.ok()) {
      // The message never includes the key material.
      return absl::InvalidArgumentError(
          absl::StrCat(path, ":", line_no, ": malformed key"));
    }
    absl::StatusOr<HmacKey> key =
        HmacKey::FromBytes(std::string(parts.first), *bytes);
    if (!key.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          path, ":", line_no, ": ", key.status().message()));
    }
    keys.push_back(*std::move(key));
  }
  return keys;
}

absl::Status WriteKeyFile(const std::string& path,
                          std::span<const HmacKey> keys) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  for (const HmacKey& key : keys) {
    out << key.key_id() << ':' << HexEncode(key.bytes()) << '\n';
  }
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("short write to ", path));
}

absl::StatusOr<UniversalHashParams> UniversalHashParams::Create(
    uint64_t a, uint64_t b, uint64_t range) {
  if (a == 0 || a >= kMersenne61) {
    return absl::InvalidArgumentError("a must lie in [1, p-1]");
  }
  if (b >= kMersenne61) {
    return absl::InvalidArgumentError("b must lie in [0, p-1]");
  }
  if (range == 0) return absl::InvalidArgumentError("range must be >= 1");
  return UniversalHashParams{a, b, kMersenne61, range};
}

UniversalHashParams UniversalHashParams::Random(std::mt19937_64& rng,
                                                uint64_t range) {
  std::uniform_int_distribution<uint64_t> a_dist(1, kMersenne61 - 1);
  std::uniform_int_distribution<uint64_t> b_dist(0, kMersenne61 - 1);
  UniversalHashParams params;
  params.a = a_dist(rng);
  params.b = b_dist(rng);
  params.range = range;
  return params;
}

uint64_t UniversalHash(const UniversalHashParams& params, uint64_t x) {
  uint64_t xr = ReduceMersenne61(x);
  unsigned __int128 v = static_cast<unsigned __int128>(params.a) * xr + params.b;
  return ReduceMersenne61(v) % params.range;
}

absl::StatusOr<HashPair> ParseHashPair(absl::string_view name) {
  if (name == "sha512split") return HashPair::kSha512Split;
  if (name == "sha1md5") return HashPair::kSha1Md5;
  return absl::InvalidArgumentError(absl::StrCat("unknown hash pair '", name,
                                                 "'"));
}

absl::string_view HashPairName(HashPair pair) {
  switch (pair) {
    case HashPair::kSha512Split:
      return "sha512split";
    case HashPair::kSha1Md5:
      return "sha1md5";
  }
  return "unknown";
}

absl::Status DoubleHashParams::Validate() const {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  if (m < 2) return absl::InvalidArgumentError("m must be >= 2");
  return absl::OkStatus();
}

BaseHashes ComputeBaseHashes(HashPair pair, absl::string_view element) {
  switch (pair) {
    case HashPair::kSha1Md5: {
      auto h1 = Sha1(element);
      auto h2 = Md5(element);
      return {LoadBigEndian64(h1), LoadBigEndian64(h2)};
    }
    case HashPair::kSha512Split:
      break;
  }
  Digest512 d = Sha512(element);
  return {LoadBigEndian64(std::span<const uint8_t>(d).subspan(0, 8)),
          LoadBigEndian64(std::span<const uint8_t>(d).subspan(32, 8))};
}

void DoubleHashIndicesFrom(const DoubleHashParams& params, BaseHashes base,
                           std::vector<uint64_t>& out) {
  out.clear();
  const uint64_t m = params.m;
  const uint64_t h1 = base.h1 % m;
  const uint64_t h2 = base.h2 % m;
  for (uint64_t i = 0; i < params.k; ++i) {
    uint64_t f = 0;
    if (params.enhancement == DoubleHashEnhancement::kEnhanced) {
      f = static_cast<uint64_t>((static_cast<unsigned __int128>(i) * i * i - i) /
                                6 % m);
    }
    unsigned __int128 g = static_cast<unsigned __int128>(h1) +
                          static_cast<unsigned __int128>(i) * h2 + f;
    out.push_back(static_cast<uint64_t>(g % m));
  }
}

std::vector<uint64_t> DoubleHashIndices(const DoubleHashParams& params,
                                        absl::string_view element) {
  std::vector<uint64_t> out;
  out.reserve(params.k);
  DoubleHashIndicesFrom(params, ComputeBaseHashes(params.hash_pair, element),
                        out);
  return out;
}

std::string BigramString(BigramCode code) {
  return std::string{static_cast<char>(code >> 8), static_cast<char>(code & 0xff)};
}

absl::StatusOr<std::vector<BigramCode>> BigramMultiset(absl::string_view name) {
  if (name.empty()) {
    return absl::InvalidArgumentError("cannot take bi-grams of an empty name");
  }
  std::string padded = absl::StrCat("_", name, "_");
  std::vector<BigramCode> codes;
  codes.reserve(padded.size() - 1);
  for (size_t i = 0; i + 1 < padded.size(); ++i) {
    codes.push_back(static_cast<BigramCode>(
        (static_cast<uint8_t>(padded[i]) << 8) | static_cast<uint8_t>(padded[i + 1])));
  }
  std::sort(codes.begin(), codes.end());
  return codes;
}

absl::StatusOr<BigramSet> BigramSet::FromName(absl::string_view name) {
  absl::StatusOr<std::vector<BigramCode>> codes = BigramMultiset(name);
  if (!codes.ok()) return codes.status();
  codes->erase(std::unique(codes->begin(), codes->end()), codes->end());
  BigramSet set;
  set.codes_ = *std::move(codes);
  return set;
}

BigramSet BigramSet::FromCodes(std::vector<BigramCode> codes) {
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  BigramSet set;
  set.codes_ = std::move(codes);
  return set;
}

bool BigramSet::Contains(BigramCode code) const {
  return std::binary_search(codes_.begin(), codes_.end(), code);
}

std::vector<std::string> BigramSet::ToStrings() const {
  std::vector<std::string> out;
  out.reserve(codes_.size());
  for (BigramCode c : codes_) out.push_back(BigramString(c));
  return out;
}

absl::StatusOr<BigramSet> Bigrams(absl::string_view name) {
  return BigramSet::FromName(name);
}

}  // namespace pprl
