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

// Attacks on deterministic name encodings: dictionary search, frequency
// alignment, re-identification chains through lossy buckets, and the
// duplicate-posting probe on a linkage index.

#ifndef PPRL_ATTACKS_H_
#define PPRL_ATTACKS_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "pprl/hashcore.h"
#include "pprl/linkkeys.h"
#include "pprl/lossy.h"
#include "pprl/model.h"

namespace pprl {

// A deterministic per-name encoding. Attacks and their verification share
// one instance, so the attacked process is reproduced exactly.
class NameEncoder {
 public:
  virtual ~NameEncoder() = default;
  // Encoded bytes of `name`.
  virtual std::string Encode(absl::string_view name) const = 0;
  virtual std::string Describe() const = 0;
};

// Unkeyed SHA-256 of the name bytes.
class Sha256Encoder : public NameEncoder {
 public:
  std::string Encode(absl::string_view name) const override;
  std::string Describe() const override { return "sha256"; }
};

// HMAC-SHA256 under a secret key.
class HmacEncoder : public NameEncoder {
 public:
  explicit HmacEncoder(HmacKey key) : key_(std::move(key)) {}
  std::string Encode(absl::string_view name) const override;
  std::string Describe() const override;

 private:
  HmacKey key_;
};

// Truncated-HMAC bucket id as 4 big-endian bytes.
class TruncatedHmacBucketEncoder : public NameEncoder {
 public:
  TruncatedHmacBucketEncoder(HmacKey key, uint32_t n_buckets)
      : key_(std::move(key)), n_buckets_(n_buckets) {}
  std::string Encode(absl::string_view name) const override;
  std::string Describe() const override;

 private:
  HmacKey key_;
  uint32_t n_buckets_;
};

std::string EncodeBucketId(uint32_t bucket);

enum class AttackKind {
  kDictionary,
  kFrequency,
  kBucketReversal,
  kLinkageKeyProbe
};
absl::string_view AttackKindName(AttackKind kind);

struct Recovery {
  std::string target;  // encoded bytes
  // Recovered plaintext or, for many-to-one encodings, the candidate set.
  std::vector<std::string> plaintexts;
};

struct AttackReport {
  AttackKind kind = AttackKind::kDictionary;
  uint64_t attempted = 0;
  uint64_t recovered = 0;
  double wall_ms = 0.0;
  // Encoder invocations made by the attack.
  uint64_t encodings = 0;
  std::vector<Recovery> recoveries;
};

// Encodes every dictionary name and matches against the target set.
// Dictionary shards run in parallel; recoveries are ordered by first target
// occurrence. Duplicate targets count once.
AttackReport DictionaryAttack(const std::vector<std::string>& targets,
                              const std::vector<std::string>& dictionary,
                              const NameEncoder& encoder, int threads = 0);

// Re-encodes every claimed plaintext; false if any claim does not reproduce
// its target.
bool VerifyRecoveries(const AttackReport& report, const NameEncoder& encoder);

struct RankAlignment {
  uint32_t rank = 0;  // 1 = most frequent
  std::string tag;
  uint64_t observed_count = 0;
  std::string guessed_name;
  uint64_t public_count = 0;
};

struct FrequencyAttackResult {
  std::vector<RankAlignment> alignment;  // first top_k ranks
  AttackReport report;
};

// Ranks distinct tags by observed count (ties by tag bytes) and names by
// public frequency (ties by name), then pairs equal ranks. Needs no key.
FrequencyAttackResult FrequencyAttack(const std::vector<std::string>& tags,
                                      const FrequencyTable& public_freq,
                                      size_t top_k);

// Fraction of the first `top_k` aligned ranks whose guess re-encodes to its
// tag. Requires the encoder, so only the evaluator can score an attack.
double AlignmentAccuracy(const std::vector<RankAlignment>& alignment,
                         const NameEncoder& encoder, size_t top_k);

struct ChainStep {
  uint32_t seeds = 0;
  // Distinct (name, bucket) pairs pinned by the seeds so far.
  uint64_t pairs_confirmed = 0;
  uint64_t buckets_touched = 0;
  // Records sharing a pinned name: identified by name.
  uint64_t records_identified = 0;
  // Records in a touched bucket: candidate set narrowed to that bucket.
  uint64_t records_narrowed = 0;
  double identified_fraction = 0.0;
};

struct ChainResult {
  std::vector<ChainStep> steps;  // one per seed, cumulative
  AttackReport report;
};

// The attacker sees `observed_buckets[i]` for record i and learns the true
// name of the records in `seed_rows` from auxiliary data. `true_names`
// scores the outcome and is never consulted for the inference itself,
// except through `table` to list each touched bucket's candidate names.
absl::StatusOr<ChainResult> BucketReversalChain(
    const std::vector<uint32_t>& observed_buckets,
    const std::vector<std::string>& true_names,
    const std::vector<size_t>& seed_rows, const BucketTable& table);

struct ProbeGroup {
  std::string spec_name;
  HmacTag tag;
  std::vector<uint64_t> rows;
};

// Posting lists holding more than one row, per spec in index order, tags
// ascending. Uses tags only.
std::vector<ProbeGroup> LinkageKeyFrequencyProbe(const LinkIndex& index);

// Attack dictionary of `size` distinct entries: every surname, then every
// given name, then "given surname" pairs in table order. Fewer if the inputs
// cannot supply `size` entries.
std::vector<std::string> ComposeDictionary(
    const std::vector<std::string>& surnames,
    const std::vector<std::string>& given_names, size_t size);

// `kind,target_hex,plaintext` per recovered plaintext. With `redact`, the
// plaintext column holds `sha256:<hex>` of the plaintext instead.
std::string AttackReportCsv(const AttackReport& report, bool redact);
std::string AttackSummary(const AttackReport& report);

}  // namespace pprl

#endif  // PPRL_ATTACKS_H_
