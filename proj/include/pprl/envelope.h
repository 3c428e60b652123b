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

// Public-key envelope encryption of record fields and an in-process
// simulation of the encrypted linkage pipeline.
//
// A blob is a fresh 32-byte data key used with XChaCha20-Poly1305 over the
// fields, and that key boxed (X25519 + XSalsa20-Poly1305) from a one-time
// sender keypair to the recipient's public key.

#ifndef PPRL_ENVELOPE_H_
#define PPRL_ENVELOPE_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "pprl/evalbench.h"
#include "pprl/linker.h"
#include "pprl/model.h"
#include "pprl/secret_sharing.h"

namespace pprl {

struct Keypair {
  static constexpr size_t kKeySize = 32;
  std::array<uint8_t, kKeySize> public_key{};
  std::array<uint8_t, kKeySize> private_key{};

  static Keypair Generate();
  // Reproducible keypair for experiments.
  static Keypair FromSeed(uint64_t seed, absl::string_view label);
};

// Bytes of randomness consumed by one encryption.
using EnvelopeRandomness = std::array<uint8_t, 32>;

// Encrypts `fields` to `public_key`. All randomness (sender keypair, data
// key, nonces) is expanded from `randomness`; distinct randomness yields
// unrelated blobs.
absl::StatusOr<std::vector<uint8_t>> EnvelopeEncrypt(
    std::span<const uint8_t, Keypair::kKeySize> public_key,
    const std::vector<std::string>& fields,
    const EnvelopeRandomness& randomness);

// Same with randomness from the operating system.
absl::StatusOr<std::vector<uint8_t>> EnvelopeEncrypt(
    std::span<const uint8_t, Keypair::kKeySize> public_key,
    const std::vector<std::string>& fields);

// Fails on a wrong key, a truncated blob or any modified byte.
absl::StatusOr<std::vector<std::string>> EnvelopeDecrypt(
    const Keypair& keypair, std::span<const uint8_t> blob);

// Seeded encryptor: the n-th call uses randomness derived from (seed, n), so
// repeated encryptions of one plaintext differ but a run is reproducible.
class EnvelopeEncryptor {
 public:
  explicit EnvelopeEncryptor(uint64_t seed) : seed_(seed) {}
  absl::StatusOr<std::vector<uint8_t>> Encrypt(
      std::span<const uint8_t, Keypair::kKeySize> public_key,
      const std::vector<std::string>& fields);

 private:
  uint64_t seed_;
  uint64_t counter_ = 0;
};

EnvelopeRandomness DeriveEnvelopeRandomness(uint64_t seed,
                                            absl::string_view label,
                                            uint64_t counter);

// Splits the private key of `keypair` among `total` custodians.
absl::StatusOr<SecretShares> SplitPrivateKey(const Keypair& keypair,
                                             uint32_t threshold, uint32_t total,
                                             uint64_t seed);
// Rebuilds the keypair (public key recomputed) from enough shares.
absl::StatusOr<Keypair> RecombinePrivateKey(const std::vector<Share>& shares,
                                            uint32_t threshold);

// Linking fields of a record, in a fixed order; an absent middle initial is
// the absent marker.
std::vector<std::string> RecordLinkingFields(const PersonRecord& record);
absl::StatusOr<PersonRecord> RecordFromLinkingFields(
    uint64_t row_id, const std::vector<std::string>& fields);

// Encrypted linkage file: magic, version, count, then per record the row
// handle and a length-prefixed blob.
struct EncryptedRecord {
  uint64_t row_id = 0;
  std::vector<uint8_t> blob;
};

std::vector<uint8_t> SerializeLinkageFile(
    const std::vector<EncryptedRecord>& records);
absl::StatusOr<std::vector<EncryptedRecord>> ParseLinkageFile(
    std::span<const uint8_t> bytes);

absl::StatusOr<std::vector<EncryptedRecord>> EncryptDataset(
    const Dataset& dataset, std::span<const uint8_t, Keypair::kKeySize> pk,
    uint64_t seed, absl::string_view label, int threads = 0);
absl::StatusOr<Dataset> DecryptDataset(
    const std::vector<EncryptedRecord>& records, const Keypair& keypair,
    int threads = 0);

// Values of at least `min_length` bytes that occur verbatim in `bytes`.
// Shorter values are skipped: ciphertext matches them by chance.
std::vector<std::string> ScanForPlaintext(std::span<const uint8_t> bytes,
                                          const std::vector<std::string>& values,
                                          size_t min_length);

struct PipelineResult {
  // Files as the name holders hand them to the linker.
  std::vector<uint8_t> reference_file;
  std::vector<uint8_t> query_file;
  // Fields that bypass the linker, keyed by row: `row_id,sa3`.
  std::string analysis_csv;
  // Linker output after the shuffle.
  std::vector<MatchDecision> decisions;
  EvalResult evaluation;
};

// Encrypts both datasets to the linker, lets the linker decrypt, derive
// linkage keys under its own HMAC key and link, then shuffles the output.
// Year of birth travels inside the encrypted fields and is forwarded by the
// linker after decryption.
absl::StatusOr<PipelineResult> PipelineDemo(const Dataset& reference,
                                            const Dataset& queries,
                                            const Keypair& linker_keypair,
                                            uint64_t seed,
                                            MatchMethod method =
                                                MatchMethod::kVoting,
                                            int threads = 0);

}  // namespace pprl

#endif  // PPRL_ENVELOPE_H_
