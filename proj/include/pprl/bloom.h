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

// Bloom filters over bi-gram sets and the experiments that compare their
// Dice similarity with the plaintext bi-gram Dice.

#ifndef PPRL_BLOOM_H_
#define PPRL_BLOOM_H_

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "pprl/hashcore.h"

namespace pprl {

// Running mean and variance; Merge implements the parallel combination rule.
class Welford {
 public:
  void Add(double x);
  void Merge(const Welford& other);
  uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  // Sample variance (n - 1 denominator); 0 for fewer than two values.
  double variance() const;
  double stddev() const;

 private:
  uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// The k index functions of a filter.
class BloomFamily {
 public:
  enum class Kind { kUniversal, kDoubleHash };

  // k independent Carter-Wegman functions with range m, drawn from rng.
  static absl::StatusOr<BloomFamily> Universal(uint64_t m, uint32_t k,
                                               std::mt19937_64& rng);
  static absl::StatusOr<BloomFamily> FromUniversal(
      std::vector<UniversalHashParams> members);
  static absl::StatusOr<BloomFamily> DoubleHash(const DoubleHashParams& params);

  Kind kind() const { return kind_; }
  uint64_t m() const { return m_; }
  uint32_t k() const { return k_; }
  const std::vector<UniversalHashParams>& universal() const {
    return universal_;
  }
  const DoubleHashParams& double_hash() const { return double_hash_; }
  std::string Describe() const;

  // Index positions of an arbitrary byte string. Universal functions read
  // inputs of up to 8 bytes as a big-endian integer; longer inputs are first
  // reduced through SHA-256.
  void Indices(absl::string_view element, std::vector<uint64_t>& out) const;
  // Bi-gram fast path; the code is the element's 16-bit big-endian value.
  void IndicesForCode(BigramCode code, std::vector<uint64_t>& out) const;

  friend bool operator==(const BloomFamily& a, const BloomFamily& b);

 private:
  BloomFamily() = default;

  Kind kind_ = Kind::kDoubleHash;
  uint64_t m_ = 0;
  uint32_t k_ = 0;
  std::vector<UniversalHashParams> universal_;
  DoubleHashParams double_hash_;
};

class BloomFilter {
 public:
  explicit BloomFilter(std::shared_ptr<const BloomFamily> family);

  void Insert(absl::string_view element);
  void InsertCode(BigramCode code);
  void InsertBigrams(const BigramSet& set);
  // True if every index of the element is set (false positives possible).
  bool MightContain(absl::string_view element) const;

  bool Test(uint64_t bit) const { return (words_[bit >> 6] >> (bit & 63)) & 1; }
  uint64_t PopCount() const;
  uint64_t size() const { return family_->m(); }
  uint64_t inserted_count() const { return inserted_; }
  const BloomFamily& family() const { return *family_; }
  const std::vector<uint64_t>& words() const { return words_; }
  // '0'/'1' per bit, index 0 first.
  std::string BitString() const;

  friend bool operator==(const BloomFilter& a, const BloomFilter& b) {
    return a.words_ == b.words_ && *a.family_ == *b.family_;
  }

 private:
  void SetAll(const std::vector<uint64_t>& indices);

  std::shared_ptr<const BloomFamily> family_;
  std::vector<uint64_t> words_;
  uint64_t inserted_ = 0;
  mutable std::vector<uint64_t> scratch_;
};

// 2|a AND b| / (|a| + |b|); 0 when both are empty. Filters from different
// families are an error.
absl::StatusOr<double> BloomDice(const BloomFilter& a, const BloomFilter& b);

struct UniformityResult {
  std::vector<uint64_t> histogram;  // filters with each bit set
  double mean = 0.0;
  double stddev = 0.0;              // population stddev over bit positions
};

// Builds n_filters filters, each holding `inserts_per_filter` values drawn
// uniformly from [0, 65536) and serialized as 2 big-endian bytes.
UniformityResult UniformityExperiment(const BloomFamily& family,
                                      uint64_t n_filters,
                                      uint32_t inserts_per_filter,
                                      uint64_t seed);

struct ExtremeExample {
  double bloom_score = 0.0;
  double ngram_score = 0.0;
  std::string name_a;
  std::string name_b;
};

struct OverestimationStats {
  uint64_t total_comparisons = 0;
  uint64_t equal_count = 0;
  uint64_t bloom_greater_count = 0;
  uint64_t ngram_greater_count = 0;
  // Over the bloom-greater population only.
  Welford diff;
  // Highest Bloom scores among pairs sharing no bi-gram.
  std::vector<ExtremeExample> extreme_examples;
  // Pairs where the plaintext Dice exceeded the Bloom Dice, largest excess
  // first.
  std::vector<ExtremeExample> ngram_greater_examples;

  double equal_fraction() const;
  double bloom_greater_fraction() const;
  double ngram_greater_fraction() const;
};

inline constexpr size_t kExtremeExampleCount = 20;

// Cross-compares every unordered pair of `names`. Pair ranges are sharded
// across threads; counts are exact and independent of the shard count.
absl::StatusOr<OverestimationStats> OverestimationExperiment(
    const std::vector<std::string>& names,
    std::shared_ptr<const BloomFamily> family, int threads = 0);

struct SweepRow {
  std::string family;
  uint64_t m = 0;
  uint32_t k = 0;
  OverestimationStats stats;
};

struct SweepConfig {
  std::vector<uint64_t> sizes;  // swept at k = fixed_k
  uint32_t fixed_k = 3;
  std::vector<uint32_t> ks;     // swept at m = fixed_m
  uint64_t fixed_m = 1000;
  bool include_universal = true;
  bool include_double = true;
  HashPair hash_pair = HashPair::kSha1Md5;
};

// Sizes 100..1000 step 100 at k=3 and k 3..30 step 3 at m=1000.
SweepConfig DefaultSweepConfig();

absl::StatusOr<std::vector<SweepRow>> ParameterSweep(
    const std::vector<std::string>& names, const SweepConfig& config,
    uint64_t seed, int threads = 0);

inline constexpr absl::string_view kSweepCsvHeader =
    "family,m,k,total,equal_pct,bloom_greater_pct,mean_diff,std_diff";
std::string SweepCsvRow(const SweepRow& row);

// Deduplicated random sample of `n` names (all of them if fewer).
std::vector<std::string> SampleNames(const std::vector<std::string>& names,
                                     size_t n, uint64_t seed);

}  // namespace pprl

#endif  // PPRL_BLOOM_H_
