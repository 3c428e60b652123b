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

#include "pprl/secret_sharing.h"

#include <algorithm>
#include <iterator>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "boost/multiprecision/cpp_int.hpp"
#include "pprl/hashcore.h"

namespace pprl {
namespace {

using boost::multiprecision::cpp_int;

const cpp_int& Prime() {
  static const cpp_int* p = new cpp_int((cpp_int(1) << 256) - 189);
  return *p;
}

cpp_int FromBytes(const uint8_t* data, size_t size) {
  cpp_int v;
  if (size > 0) {
    boost::multiprecision::import_bits(v, data, data + size, 8, true);
  }
  return v;
}

// Big-endian, left-padded to `width` bytes.
void AppendBytes(const cpp_int& v, size_t width, std::vector<uint8_t>& out) {
  std::vector<uint8_t> raw;
  if (v != 0) {
    boost::multiprecision::export_bits(v, std::back_inserter(raw), 8, true);
  }
  out.insert(out.end(), width - raw.size(), 0);
  out.insert(out.end(), raw.begin(), raw.end());
}

cpp_int RandomElement(std::mt19937_64& rng) {
  while (true) {
    cpp_int v;
    for (int i = 0; i < 4; ++i) v = (v << 64) | cpp_int(rng());
    if (v < Prime()) return v;
  }
}

cpp_int Mod(const cpp_int& v) {
  cpp_int r = v % Prime();
  return r < 0 ? r + Prime() : r;
}

cpp_int Inverse(const cpp_int& v) {
  return boost::multiprecision::powm(v, Prime() - 2, Prime());
}

size_t LimbCount(uint64_t secret_length) {
  return std::max<size_t>(1, (secret_length + kShareLimbBytes - 1) /
                                 kShareLimbBytes);
}

}  // namespace

absl::StatusOr<SecretShares> SplitSecret(const std::vector<uint8_t>& secret,
                                         uint32_t threshold, uint32_t total,
                                         std::mt19937_64& rng) {
  if (threshold < 1 || threshold > total || total > 255) {
    return absl::InvalidArgumentError(absl::StrCat(
        "need 1 <= t <= n <= 255, got t=", threshold, " n=", total));
  }
  SecretShares out;
  out.threshold = threshold;
  out.total = total;
  out.secret_length = secret.size();
  out.shares.resize(total);
  for (uint32_t i = 0; i < total; ++i) out.shares[i].index = i + 1;
  const size_t limbs = LimbCount(secret.size());
  for (size_t l = 0; l < limbs; ++l) {
    const size_t begin = std::min(secret.size(), l * kShareLimbBytes);
    const size_t end = std::min(secret.size(), begin + kShareLimbBytes);
    std::vector<cpp_int> coeffs;
    coeffs.push_back(FromBytes(secret.data() + begin, end - begin));
    for (uint32_t c = 1; c < threshold; ++c) {
      coeffs.push_back(RandomElement(rng));
    }
    for (Share& share : out.shares) {
      // Horner evaluation at x = index.
      cpp_int y = 0;
      for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        y = Mod(y * share.index + *it);
      }
      AppendBytes(y, kShareElementBytes, share.value);
    }
  }
  return out;
}

absl::StatusOr<std::vector<uint8_t>> RecombineSecret(
    const std::vector<Share>& shares, uint32_t threshold,
    uint64_t secret_length) {
  if (threshold < 1) return absl::InvalidArgumentError("threshold must be >= 1");
  if (shares.size() < threshold) {
    return absl::FailedPreconditionError(
        absl::StrCat("need ", threshold, " shares to reconstruct, have ",
                     shares.size()));
  }
  const size_t limbs = LimbCount(secret_length);
  absl::flat_hash_set<uint32_t> seen;
  for (const Share& s : shares) {
    if (s.index == 0 || !seen.insert(s.index).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid or duplicate share index ", s.index));
    }
    if (s.value.size() != limbs * kShareElementBytes) {
      return absl::InvalidArgumentError(
          absl::StrCat("share ", s.index, " has ", s.value.size(),
                       " bytes, expected ", limbs * kShareElementBytes));
    }
  }
  const std::vector<Share> used(shares.begin(), shares.begin() + threshold);

  // Lagrange basis values at x = 0, shared by every limb.
  std::vector<cpp_int> basis;
  for (const Share& si : used) {
    cpp_int num = 1;
    cpp_int den = 1;
    for (const Share& sj : used) {
      if (sj.index == si.index) continue;
      num = Mod(num * sj.index);
      den = Mod(den * (cpp_int(sj.index) - cpp_int(si.index)));
    }
    basis.push_back(Mod(num * Inverse(den)));
  }

  std::vector<uint8_t> secret;
  for (size_t l = 0; l < limbs; ++l) {
    cpp_int value = 0;
    for (size_t i = 0; i < used.size(); ++i) {
      const uint8_t* element = used[i].value.data() + l * kShareElementBytes;
      const cpp_int y = FromBytes(element, kShareElementBytes);
      if (y >= Prime()) {
        return absl::InvalidArgumentError("share element outside the field");
      }
      value = Mod(value + y * basis[i]);
    }
    const size_t width = std::min<uint64_t>(
        kShareLimbBytes, secret_length - std::min<uint64_t>(
                                             secret_length, l * kShareLimbBytes));
    if (value >> (8 * width) != 0) {
      return absl::DataLossError("reconstructed limb does not fit; wrong shares");
    }
    AppendBytes(value, width, secret);
  }
  return secret;
}

std::string SerializeShares(const SecretShares& shares) {
  std::string out = absl::StrCat("# threshold=", shares.threshold,
                                 " total=", shares.total,
                                 " length=", shares.secret_length, "\n");
  for (const Share& s : shares.shares) {
    absl::StrAppend(&out, s.index, ":", HexEncode(s.value), "\n");
  }
  return out;
}

absl::StatusOr<SecretShares> ParseShares(absl::string_view content) {
  SecretShares out;
  bool have_header = false;
  for (absl::string_view line : absl::StrSplit(content, '\n')) {
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    if (absl::ConsumePrefix(&line, "#")) {
      for (absl::string_view kv :
           absl::StrSplit(line, ' ', absl::SkipWhitespace())) {
        std::pair<absl::string_view, absl::string_view> p =
            absl::StrSplit(kv, absl::MaxSplits('=', 1));
        uint64_t v = 0;
        if (!absl::SimpleAtoi(p.second, &v)) {
          return absl::InvalidArgumentError(
              absl::StrCat("bad share header field '", kv, "'"));
        }
        if (p.first == "threshold") out.threshold = static_cast<uint32_t>(v);
        if (p.first == "total") out.total = static_cast<uint32_t>(v);
        if (p.first == "length") out.secret_length = v;
      }
      have_header = true;
      continue;
    }
    std::pair<absl::string_view, absl::string_view> p =
        absl::StrSplit(line, absl::MaxSplits(':', 1));
    Share share;
    if (!absl::SimpleAtoi(p.first, &share.index)) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad share index in '", line, "'"));
    }
    absl::StatusOr<std::vector<uint8_t>> bytes = HexDecode(p.second);
    if (!bytes.ok()) return bytes.status();
    share.value = *std::move(bytes);
    out.shares.push_back(std::move(share));
  }
  if (!have_header || out.threshold == 0) {
    return absl::InvalidArgumentError("shares file lacks a threshold header");
  }
  return out;
}

}  // namespace pprl
