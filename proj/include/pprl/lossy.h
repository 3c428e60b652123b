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

// Lossy many-to-one name encodings: keyed truncated-HMAC buckets and
// frequency-smoothed bucket tables, with the analyses that show how much of
// the name distribution survives them.

#ifndef PPRL_LOSSY_H_
#define PPRL_LOSSY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "pprl/hashcore.h"
#include "pprl/model.h"

namespace pprl {

// Bucket of HMAC(key, name): first 8 tag bytes as a big-endian integer,
// reduced mod n_buckets. The modulo bias is below 2^-50 for any bucket count
// used here.
absl::StatusOr<uint32_t> TruncatedHmacBucket(absl::string_view name,
                                             const HmacKey& key,
                                             uint32_t n_buckets);

struct BucketTable {
  enum class Construction { kTruncatedHmac, kFrequencySmoothed };

  Construction construction = Construction::kTruncatedHmac;
  uint32_t n_buckets = 0;
  absl::flat_hash_map<std::string, uint32_t> mapping;

  std::optional<uint32_t> Lookup(absl::string_view name) const;
  // Names per bucket, each list sorted.
  std::vector<std::vector<std::string>> Members() const;
};

// Maps every value of `freq` with its truncated-HMAC bucket.
absl::StatusOr<BucketTable> BuildTruncatedHmacTable(const FrequencyTable& freq,
                                                    const HmacKey& key,
                                                    uint32_t n_buckets);

struct SmoothedTable {
  BucketTable table;
  std::vector<uint64_t> masses;          // per bucket
  std::vector<uint64_t> distinct_names;  // per bucket
  // Heaviest over lightest bucket mass.
  double max_min_ratio = 0.0;
};

// Greedy smoothing: names in descending frequency order, each to the
// currently lightest bucket (ties to the lowest bucket id). A name is never
// split across buckets. Requires 1 <= n_buckets <= distinct names.
absl::StatusOr<SmoothedTable> BuildSmoothedTable(const FrequencyTable& freq,
                                                 uint32_t n_buckets);

struct BucketStat {
  uint32_t bucket_id = 0;
  uint64_t mass = 0;
  uint64_t distinct_names = 0;
  uint32_t rank = 0;  // 1 = heaviest
};

struct BucketAnalysis {
  // Sorted by descending mass, ties by bucket id.
  std::vector<BucketStat> buckets;
  uint32_t probe_bucket = 0;
  uint32_t probe_rank = 0;
};

// Bucket masses under `freq` and the rank of the bucket holding `probe`.
absl::StatusOr<BucketAnalysis> AnalyzeBuckets(const BucketTable& table,
                                              const FrequencyTable& freq,
                                              absl::string_view probe);

// Mean over mapped names of the number of names sharing their bucket.
double MeanCandidateSetSize(const BucketTable& table);

// How many of the least frequent names must be combined before their mass
// reaches that of the most frequent name.
struct DominantMassMatch {
  std::string dominant_name;
  uint64_t dominant_mass = 0;
  uint64_t tail_names_needed = 0;
  uint64_t tail_mass = 0;
};

absl::StatusOr<DominantMassMatch> MatchDominantMass(const FrequencyTable& freq);

// Bucket CSV (sensitive) `name,bucket_id`, sorted by name.
std::string BucketTableCsv(const BucketTable& table);
// `bucket_id,mass,distinct_names,rank`.
std::string BucketAnalysisCsv(const BucketAnalysis& analysis);

}  // namespace pprl

#endif  // PPRL_LOSSY_H_
