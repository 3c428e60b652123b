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


#include "pprl/lossy.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace pprl {
namespace {

HmacKey Key(uint64_t seed) { return HmacKey::FromSeed(seed, "lossy"); }

std::string NameOf(size_t i) { return absl::StrCat("n", i); }

FrequencyTable Uniform(size_t n) {
  std::vector<std::pair<std::string, uint64_t>> e;
  for (size_t i = 0; i < n; ++i) e.push_back({NameOf(i), 1});
  return *FrequencyTable::Create(e);
}

// count(rank r) = floor(c / r).
FrequencyTable Zipf(size_t n, uint64_t c) {
  std::vector<std::pair<std::string, uint64_t>> e;
  for (size_t r = 1; r <= n; ++r) e.push_back({NameOf(r), c / r});
  return *FrequencyTable::Create(e);
}

FrequencyTable BundledSurnames() {
  return testing::BundledConfig(0, 1).last_name_table;
}

// Upper quantile of chi-square via the Wilson-Hilferty approximation.
double ChiSquareQuantile(double df, double z) {
  const double a = 2.0 / (9.0 * df);
  return df * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

TEST(TruncatedHmacBucketTest, DeterministicAndInRange) {
  for (uint32_t n : {2u, 10u, 500u}) {
    for (int i = 0; i < 200; ++i) {
      const uint32_t b = *TruncatedHmacBucket(NameOf(i), Key(1), n);
      EXPECT_LT(b, n);
      EXPECT_EQ(b, *TruncatedHmacBucket(NameOf(i), Key(1), n));
    }
  }
}

TEST(TruncatedHmacBucketTest, MatchesTagPrefixModN) {
  const HmacKey key = Key(2);
  const HmacTag tag = ComputeHmac(key, "smith");
  EXPECT_EQ(*TruncatedHmacBucket("smith", key, 97),
            static_cast<uint32_t>(LoadBigEndian64(tag) % 97));
}

TEST(TruncatedHmacBucketTest, RejectsSingleBucket) {
  EXPECT_FALSE(TruncatedHmacBucket("smith", Key(1), 1).ok());
  EXPECT_FALSE(TruncatedHmacBucket("smith", Key(1), 0).ok());
}

TEST(TruncatedHmacBucketTest, KeysAreDecorrelated) {
  // Contingency table of buckets under two keys; independence gives a
  // chi-square statistic with (n-1)^2 degrees of freedom.
  const uint32_t n = 10;
  const int names = 10000;
  std::vector<std::vector<double>> cells(n, std::vector<double>(n, 0));
  std::vector<double> rows(n, 0), cols(n, 0);
  for (int i = 0; i < names; ++i) {
    const uint32_t a = *TruncatedHmacBucket(NameOf(i), Key(10), n);
    const uint32_t b = *TruncatedHmacBucket(NameOf(i), Key(11), n);
    ++cells[a][b];
    ++rows[a];
    ++cols[b];
  }
  double chi2 = 0.0;
  for (uint32_t a = 0; a < n; ++a) {
    for (uint32_t b = 0; b < n; ++b) {
      const double expected = rows[a] * cols[b] / names;
      chi2 += (cells[a][b] - expected) * (cells[a][b] - expected) / expected;
    }
  }
  EXPECT_LT(chi2, ChiSquareQuantile((n - 1) * (n - 1), 3.09));
}

TEST(BucketTableTest, ManyToOneAndDeterministic) {
  const FrequencyTable freq = BundledSurnames();
  for (uint32_t n : {10u, 50u, 100u, 500u}) {
    BucketTable a = *BuildTruncatedHmacTable(freq, Key(3), n);
    BucketTable b = *BuildTruncatedHmacTable(freq, Key(3), n);
    EXPECT_EQ(a.mapping, b.mapping);
    EXPECT_EQ(a.mapping.size(), freq.size());
    std::vector<std::vector<std::string>> members = a.Members();
    ASSERT_EQ(members.size(), n);
    size_t largest = 0, total = 0;
    for (const auto& m : members) {
      largest = std::max(largest, m.size());
      total += m.size();
      EXPECT_TRUE(std::is_sorted(m.begin(), m.end()));
    }
    EXPECT_EQ(total, freq.size());
    EXPECT_GE(largest, 2u);
  }
}

TEST(AnalyzeBucketsTest, MajorityProbeIsRankOne) {
  std::vector<std::pair<std::string, uint64_t>> e = {{"smith", 1000}};
  for (int i = 0; i < 300; ++i) e.push_back({NameOf(i), 3});
  const FrequencyTable freq = *FrequencyTable::Create(e);
  for (uint32_t n : {2u, 10u, 50u, 100u, 500u}) {
    BucketTable t = *BuildTruncatedHmacTable(freq, Key(4), n);
    BucketAnalysis a = *AnalyzeBuckets(t, freq, "smith");
    EXPECT_EQ(a.probe_rank, 1u);
    EXPECT_EQ(a.buckets.front().bucket_id, a.probe_bucket);
  }
}

TEST(AnalyzeBucketsTest, AbsentProbeIsError) {
  const FrequencyTable freq = Uniform(20);
  BucketTable t = *BuildTruncatedHmacTable(freq, Key(4), 5);
  EXPECT_FALSE(AnalyzeBuckets(t, freq, "nobody").ok());
}

TEST(AnalyzeBucketsTest, UniformMassesWithinMultinomialSpread) {
  const size_t names = 10000;
  const uint32_t n = 10;
  const FrequencyTable freq = Uniform(names);
  BucketTable t = *BuildTruncatedHmacTable(freq, Key(5), n);
  BucketAnalysis a = *AnalyzeBuckets(t, freq, NameOf(0));
  const double p = 1.0 / n;
  const double sd = std::sqrt(names * p * (1 - p));
  uint64_t total = 0;
  for (const BucketStat& s : a.buckets) {
    EXPECT_NEAR(static_cast<double>(s.mass), names * p, 3 * sd);
    total += s.mass;
  }
  EXPECT_EQ(total, names);
  for (size_t i = 0; i < a.buckets.size(); ++i) {
    EXPECT_EQ(a.buckets[i].rank, i + 1);
  }
}

TEST(CandidateSetTest, GrowsAsBucketsShrink) {
  const FrequencyTable freq = BundledSurnames();
  double prev = 0.0;
  for (uint32_t n : {500u, 100u, 50u, 10u}) {
    const double size =
        MeanCandidateSetSize(*BuildTruncatedHmacTable(freq, Key(6), n));
    EXPECT_GE(size, 1.0);
    EXPECT_GT(size, prev);
    prev = size;
  }
}

TEST(CandidateSetTest, HandExample) {
  BucketTable t;
  t.n_buckets = 2;
  t.mapping = {{"a", 0}, {"b", 0}, {"c", 0}, {"d", 1}};
  // (3*3 + 1*1) / 4
  EXPECT_DOUBLE_EQ(MeanCandidateSetSize(t), 2.5);
}

// Lightest-bucket greedy written directly, scanning for the minimum.
std::vector<uint32_t> GreedyOracle(const FrequencyTable& freq, uint32_t n) {
  std::vector<uint64_t> mass(n, 0);
  std::vector<uint32_t> assign(freq.size());
  for (size_t i : freq.RankOrder()) {
    uint32_t best = 0;
    for (uint32_t b = 1; b < n; ++b) {
      if (mass[b] < mass[best]) best = b;
    }
    assign[i] = best;
    mass[best] += freq.count(i);
  }
  return assign;
}

TEST(SmoothedTableTest, MatchesGreedyOracle) {
  const FrequencyTable freq = Zipf(3000, 100000);
  for (uint32_t n : {1u, 7u, 50u}) {
    SmoothedTable s = *BuildSmoothedTable(freq, n);
    std::vector<uint32_t> oracle = GreedyOracle(freq, n);
    for (size_t i = 0; i < freq.size(); ++i) {
      EXPECT_EQ(*s.table.Lookup(freq.value(i)), oracle[i]);
    }
  }
}

TEST(SmoothedTableTest, OneNamePerBucket) {
  const FrequencyTable freq = Zipf(40, 1000);
  SmoothedTable s = *BuildSmoothedTable(freq, 40);
  std::vector<uint64_t> masses = s.masses;
  std::vector<uint64_t> counts;
  for (size_t i = 0; i < freq.size(); ++i) counts.push_back(freq.count(i));
  std::sort(masses.begin(), masses.end());
  std::sort(counts.begin(), counts.end());
  EXPECT_EQ(masses, counts);
  for (uint64_t d : s.distinct_names) EXPECT_EQ(d, 1u);
}

TEST(SmoothedTableTest, DominantNameSetsRatioFloor) {
  std::vector<std::pair<std::string, uint64_t>> e = {{"smith", 9000}};
  for (int i = 0; i < 100; ++i) e.push_back({NameOf(i), 10});
  SmoothedTable s = *BuildSmoothedTable(*FrequencyTable::Create(e), 10);
  // The heaviest bucket holds smith alone; the others share 1000.
  EXPECT_EQ(*std::max_element(s.masses.begin(), s.masses.end()), 9000u);
  EXPECT_GT(s.max_min_ratio, 50.0);
}

TEST(SmoothedTableTest, RejectsBadBucketCounts) {
  const FrequencyTable freq = Uniform(5);
  EXPECT_FALSE(BuildSmoothedTable(freq, 0).ok());
  EXPECT_FALSE(BuildSmoothedTable(freq, 6).ok());
}

TEST(SmoothedTableTest, GreedyMassBound) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t names = 5 + rng() % 300;
    std::vector<std::pair<std::string, uint64_t>> e;
    uint64_t total = 0, heaviest = 0;
    for (size_t i = 0; i < names; ++i) {
      const uint64_t c = 1 + rng() % (trial % 2 ? 10000 : 50);
      e.push_back({NameOf(i), c});
      total += c;
      heaviest = std::max(heaviest, c);
    }
    const uint32_t n = 1 + rng() % names;
    SmoothedTable s = *BuildSmoothedTable(*FrequencyTable::Create(e), n);
    const double mean = static_cast<double>(total) / n;
    const uint64_t max_mass = *std::max_element(s.masses.begin(),
                                                s.masses.end());
    EXPECT_LE(static_cast<double>(max_mass),
              std::max(static_cast<double>(heaviest), 2.0 * mean));
  }
}

TEST(DominantMassTest, HandExample) {
  const FrequencyTable freq = *FrequencyTable::Create(
      {{"smith", 10}, {"a", 4}, {"b", 3}, {"c", 2}, {"d", 2}, {"e", 1}});
  DominantMassMatch m = *MatchDominantMass(freq);
  EXPECT_EQ(m.dominant_name, "smith");
  // Lightest first: e(1) + d(2) + c(2) + b(3) + a(4) = 12 >= 10 after 5.
  EXPECT_EQ(m.tail_names_needed, 5u);
  EXPECT_EQ(m.tail_mass, 12u);
}

TEST(DominantMassTest, TailMassTooSmall) {
  EXPECT_FALSE(MatchDominantMass(
                   *FrequencyTable::Create({{"smith", 10}, {"a", 1}}))
                   .ok());
}

TEST(DominantMassTest, ZipfTailDwarfsMedianBucket) {
  // On a Zipf(1) table the low-frequency names needed to equal the top
  // name outnumber the names in a typical smoothed bucket by two orders of
  // magnitude.
  const FrequencyTable freq = Zipf(20000, 1000000);
  DominantMassMatch m = *MatchDominantMass(freq);
  SmoothedTable s = *BuildSmoothedTable(freq, 500);
  std::vector<uint64_t> distinct = s.distinct_names;
  std::nth_element(distinct.begin(), distinct.begin() + distinct.size() / 2,
                   distinct.end());
  const double median = static_cast<double>(distinct[distinct.size() / 2]);
  EXPECT_GE(static_cast<double>(m.tail_names_needed), 100.0 * median);
}

TEST(CsvTest, BucketTableIsMarkedSensitive) {
  BucketTable t;
  t.n_buckets = 2;
  t.mapping = {{"b", 1}, {"a", 0}};
  const std::string csv = BucketTableCsv(t);
  EXPECT_EQ(csv.rfind("# SENSITIVE", 0), 0u);
  EXPECT_NE(csv.find("name,bucket_id\na,0\nb,1\n"), std::string::npos);
}

}  // namespace
}  // namespace pprl
