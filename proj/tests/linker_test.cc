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


#include "pprl/linker.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "gtest/gtest.h"
#include "pprl/evalbench.h"
#include "pprl/rng.h"
#include "test_util.h"

namespace pprl {
namespace {

using ::pprl::testing::BundledPopulation;
using ::pprl::testing::MakeRecord;
using S = AttributeSelector;

HmacKey TestKey() { return HmacKey::FromSeed(7, "linker"); }

LinkageKeySpec Spec(const std::string& name, std::vector<Field> fields) {
  LinkageKeySpec spec{name, {}};
  for (Field f : fields) spec.attributes.push_back(S::Full(f));
  return spec;
}

// Index over hand-made postings: spec i holds `rows[i]` under the query's tag.
LinkIndex IndexForQuery(const PersonRecord& query, const HmacKey& key,
                        const std::vector<std::vector<uint64_t>>& rows) {
  std::vector<IndexPartition> parts;
  for (size_t i = 0; i < rows.size(); ++i) {
    IndexPartition p;
    p.spec = Spec("s" + std::to_string(i), {Field::kFirst, Field::kYob});
    p.spec.attributes.push_back(S::Initial(Field::kLast));
    // Make each spec distinct so the tags differ between partitions.
    for (size_t j = 0; j < i; ++j) p.spec.attributes.push_back(S::Full(Field::kSex));
    if (!rows[i].empty()) {
      p.postings[*DeriveTag(query, p.spec, key, KeyRole::kQuery)] =
          PostingList(rows[i].begin(), rows[i].end());
    }
    parts.push_back(std::move(p));
  }
  return LinkIndex(key.key_id(), std::move(parts));
}

PersonRecord Query() {
  return MakeRecord(100, "anna", "smith", 1980, Sex::kFemale, "20660940000");
}

TEST(FirstUniqueTest, SelfMatchOnTopSpec) {
  Dataset ds = BundledPopulation(2000, 31);
  const HmacKey key = TestKey();
  LinkIndex index = *BuildIndex(ds, DefaultLinkageKeySpecs(), key);
  DeterministicLinker linker(index, key);
  for (const PersonRecord& r : ds.records) {
    MatchDecision d = linker.LinkFirstUnique(r);
    ASSERT_TRUE(d.matched_row_id.has_value());
    EXPECT_EQ(*d.matched_row_id, r.row_id);
  }
}

TEST(FirstUniqueTest, StopsAtFirstSingleton) {
  const HmacKey key = TestKey();
  LinkIndex index = IndexForQuery(Query(), key, {{1, 2}, {}, {5}, {6}});
  MatchDecision d = DeterministicLinker(index, key).LinkFirstUnique(Query());
  ASSERT_TRUE(d.matched_row_id.has_value());
  EXPECT_EQ(*d.matched_row_id, 5u);
  ASSERT_EQ(d.evidence.size(), 3u);
  EXPECT_EQ(d.evidence[0].outcome, SpecEvidence::Outcome::kMultiple);
  EXPECT_EQ(d.evidence[1].outcome, SpecEvidence::Outcome::kNoMatch);
  EXPECT_EQ(d.evidence[2].outcome, SpecEvidence::Outcome::kUnique);
  EXPECT_EQ(d.queries_issued, 3u);
}

TEST(FirstUniqueTest, OnlyMultiplesMeansNoMatch) {
  const HmacKey key = TestKey();
  LinkIndex index = IndexForQuery(Query(), key, {{1, 2}, {1, 2}, {3, 4}});
  MatchDecision d = DeterministicLinker(index, key).LinkFirstUnique(Query());
  EXPECT_FALSE(d.matched_row_id.has_value());
  EXPECT_EQ(d.evidence.size(), 3u);
}

TEST(FirstUniqueTest, NoSharedTags) {
  const HmacKey key = TestKey();
  LinkIndex index = IndexForQuery(Query(), key, {{}, {}, {}});
  MatchDecision d = DeterministicLinker(index, key).LinkFirstUnique(Query());
  EXPECT_FALSE(d.matched_row_id.has_value());
  for (const SpecEvidence& e : d.evidence) {
    EXPECT_EQ(e.outcome, SpecEvidence::Outcome::kNoMatch);
  }
}

TEST(VotingTest, StrictMajorityWins) {
  const HmacKey key = TestKey();
  std::vector<std::vector<uint64_t>> rows(11, std::vector<uint64_t>{7});
  rows[9] = {9};
  rows[10] = {9};
  LinkIndex index = IndexForQuery(Query(), key, rows);
  MatchDecision d = DeterministicLinker(index, key).LinkVoting(Query(), 1);
  ASSERT_TRUE(d.matched_row_id.has_value());
  EXPECT_EQ(*d.matched_row_id, 7u);
  EXPECT_DOUBLE_EQ(d.score, 9.0);
  EXPECT_EQ(d.tied, 1u);
}

TEST(VotingTest, NoHitsNoMatch) {
  const HmacKey key = TestKey();
  LinkIndex index = IndexForQuery(Query(), key, {{}, {}});
  EXPECT_FALSE(DeterministicLinker(index, key)
                   .LinkVoting(Query(), 1)
                   .matched_row_id.has_value());
}

TEST(VotingTest, TieBreakIsFair) {
  const HmacKey key = TestKey();
  LinkIndex index = IndexForQuery(Query(), key, {{3, 8}, {3, 8}});
  DeterministicLinker linker(index, key);
  const int trials = 10000;
  int picked3 = 0;
  for (int t = 0; t < trials; ++t) {
    MatchDecision d = linker.LinkVoting(Query(), DeriveSeed(t, "tie"));
    ASSERT_TRUE(d.matched_row_id.has_value());
    EXPECT_EQ(d.tied, 2u);
    picked3 += *d.matched_row_id == 3;
  }
  EXPECT_NEAR(picked3 / static_cast<double>(trials), 0.5, 0.02);
}

TEST(VotingTest, InvariantUnderSpecOrder) {
  Dataset ds = BundledPopulation(3000, 32);
  GeneratorConfig config = testing::BundledConfig(3000, 32);
  DistortionContext ctx;
  ctx.meshblock_table = &config.meshblock_table;
  Dataset queries =
      Distort(ds, {DistortionKind::kMeshblockChange, 1.0}, 5, ctx)->dataset;
  const HmacKey key = TestKey();
  std::vector<LinkageKeySpec> specs = DefaultLinkageKeySpecs();
  LinkIndex forward = *BuildIndex(ds, specs, key);
  std::mt19937_64 rng(9);
  std::shuffle(specs.begin(), specs.end(), rng);
  LinkIndex permuted = *BuildIndex(ds, specs, key);
  std::vector<MatchDecision> a = DeterministicLinker(forward, key)
                                     .LinkAll(queries, MatchMethod::kVoting, 4);
  std::vector<MatchDecision> b = DeterministicLinker(permuted, key)
                                     .LinkAll(queries, MatchMethod::kVoting, 4);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].matched_row_id, b[i].matched_row_id);
    EXPECT_EQ(a[i].score, b[i].score);
  }
}

TEST(LinkAllTest, ExactShuffledCopyIsPerfect) {
  Dataset ds = BundledPopulation(5000, 33);
  Dataset queries = Shuffle(ds, 3);
  const HmacKey key = TestKey();
  LinkIndex index = *BuildIndex(ds, DefaultLinkageKeySpecs(), key);
  DeterministicLinker linker(index, key);
  for (MatchMethod m : {MatchMethod::kFirstUnique, MatchMethod::kVoting}) {
    std::vector<MatchDecision> d = linker.LinkAll(queries, m, 1);
    EvalResult r = *Evaluate(d, RowIds(ds), "exact", m);
    EXPECT_EQ(r.precision, 1.0);
    EXPECT_EQ(r.recall_any, 1.0);
    EXPECT_EQ(r.recall_true, 1.0);
  }
}

TEST(LinkAllTest, QueryCountIsSumOfApplicableSpecs) {
  Dataset ds = BundledPopulation(2000, 34);
  const HmacKey key = TestKey();
  const std::vector<LinkageKeySpec> specs = DefaultLinkageKeySpecs();
  LinkIndex index = *BuildIndex(ds, specs, key);
  std::vector<MatchDecision> d =
      DeterministicLinker(index, key).LinkAll(ds, MatchMethod::kVoting, 1);
  uint64_t expected = 0, issued = 0;
  for (const PersonRecord& r : ds.records) {
    for (const LinkageKeySpec& s : specs) expected += SpecApplies(r, s);
  }
  for (const MatchDecision& m : d) issued += m.queries_issued;
  EXPECT_EQ(issued, expected);
  EXPECT_LE(issued, ds.records.size() * specs.size());
}

TEST(LinkAllTest, ResultsIndependentOfThreads) {
  Dataset ds = BundledPopulation(3000, 35);
  const HmacKey key = TestKey();
  LinkIndex index = *BuildIndex(ds, DefaultLinkageKeySpecs(), key);
  DeterministicLinker linker(index, key);
  Dataset q = Shuffle(ds, 1);
  EXPECT_EQ(DecisionsCsv(linker.LinkAll(q, MatchMethod::kVoting, 2, 1)),
            DecisionsCsv(linker.LinkAll(q, MatchMethod::kVoting, 2, 4)));
}

TEST(BlockingTest, PartitionsRows) {
  Dataset ds = BundledPopulation(3000, 36);
  std::vector<Block> blocks = BlockDataset(ds, BlockingStrategy::BySa3());
  size_t total = 0;
  absl::flat_hash_set<uint64_t> seen;
  for (const Block& b : blocks) {
    total += b.row_ids.size();
    for (uint64_t r : b.row_ids) EXPECT_TRUE(seen.insert(r).second);
  }
  EXPECT_EQ(total, ds.records.size());
  EXPECT_TRUE(std::is_sorted(
      blocks.begin(), blocks.end(),
      [](const Block& a, const Block& b) { return a.blocking_key < b.blocking_key; }));
}

TEST(BlockingTest, OneAndTwoBlocks) {
  Dataset ds;
  ds.records.push_back(MakeRecord(1, "a", "b", 1980, Sex::kMale, "20600000001"));
  ds.records.push_back(MakeRecord(2, "c", "d", 1980, Sex::kMale, "20600000002"));
  EXPECT_EQ(BlockDataset(ds, BlockingStrategy::BySa3()).size(), 1u);
  ds.records.push_back(MakeRecord(3, "e", "f", 1980, Sex::kMale, "30700000002"));
  std::vector<Block> blocks = BlockDataset(ds, BlockingStrategy::BySa3());
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].row_ids, (std::vector<uint64_t>{1, 2}));
  EXPECT_EQ(BlockDataset(ds, BlockingStrategy::ByMeshblockPrefix(11)).size(),
            3u);
}

BigramSet Set(std::vector<std::string> grams) {
  std::vector<BigramCode> codes;
  for (const std::string& g : grams) {
    codes.push_back(static_cast<BigramCode>(
        (static_cast<uint8_t>(g[0]) << 8) | static_cast<uint8_t>(g[1])));
  }
  return BigramSet::FromCodes(codes);
}

std::vector<BigramCode> Multi(std::vector<std::string> grams) {
  std::vector<BigramCode> codes;
  for (const std::string& g : grams) {
    codes.push_back(static_cast<BigramCode>(
        (static_cast<uint8_t>(g[0]) << 8) | static_cast<uint8_t>(g[1])));
  }
  std::sort(codes.begin(), codes.end());
  return codes;
}

TEST(SimilarityTest, DiceExamples) {
  EXPECT_DOUBLE_EQ(DiceSets(Set({"ab", "bc"}), Set({"ab", "bc"})), 1.0);
  EXPECT_DOUBLE_EQ(DiceSets(Set({"ab"}), Set({"cd"})), 0.0);
  EXPECT_DOUBLE_EQ(DiceSets(Set({"ab", "bc"}), Set({"ab"})), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(DiceSets(BigramSet(), BigramSet()), 0.0);
}

TEST(SimilarityTest, QgramExamples) {
  EXPECT_DOUBLE_EQ(QgramSimilarity(Multi({"ab", "ab"}), Multi({"ab", "ab"})),
                   1.0);
  EXPECT_DOUBLE_EQ(QgramSimilarity(Multi({"ab"}), Multi({"cd"})), 0.0);
  EXPECT_DOUBLE_EQ(QgramSimilarity(Multi({"ab", "ab", "bc"}),
                                   Multi({"ab", "bc", "cd"})),
                   2.0 / 3.0);
  EXPECT_DOUBLE_EQ(QgramSimilarity({}, {}), 0.0);
}

TEST(SimilarityTest, IdenticalBigramNamesScoreOne) {
  EXPECT_DOUBLE_EQ(DiceSets(*Bigrams("pettit"), *Bigrams("petitt")), 1.0);
}

std::vector<BigramCode> RandomMultiset(std::mt19937_64& rng, size_t n) {
  std::vector<BigramCode> v(n);
  for (BigramCode& c : v) c = static_cast<BigramCode>(rng() % 12);
  std::sort(v.begin(), v.end());
  return v;
}

// Direct evaluation of the q-gram formula with count maps.
double QgramOracle(const std::vector<BigramCode>& a,
                   const std::vector<BigramCode>& b) {
  std::map<BigramCode, int> ca, cb;
  for (BigramCode c : a) ++ca[c];
  for (BigramCode c : b) ++cb[c];
  std::set<BigramCode> keys;
  for (auto& [k, v] : ca) keys.insert(k);
  for (auto& [k, v] : cb) keys.insert(k);
  int dist = 0;
  for (BigramCode k : keys) dist += std::abs(ca[k] - cb[k]);
  const double max = a.size() + b.size();
  return max == 0 ? 0.0 : (max - dist) / max;
}

TEST(SimilarityTest, SymmetricAndMatchesOracle) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 5000; ++i) {
    std::vector<BigramCode> a = RandomMultiset(rng, rng() % 8);
    std::vector<BigramCode> b = RandomMultiset(rng, rng() % 8);
    EXPECT_DOUBLE_EQ(QgramSimilarity(a, b), QgramSimilarity(b, a));
    EXPECT_NEAR(QgramSimilarity(a, b), QgramOracle(a, b), 1e-12);
    BigramSet sa = BigramSet::FromCodes(a), sb = BigramSet::FromCodes(b);
    EXPECT_DOUBLE_EQ(DiceSets(sa, sb), DiceSets(sb, sa));
    if (!a.empty()) EXPECT_DOUBLE_EQ(QgramSimilarity(a, a), 1.0);
  }
}

TEST(SimilarityTest, QgramFallsAsForeignSymbolsAccrete) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    std::vector<BigramCode> a = RandomMultiset(rng, 1 + rng() % 6);
    std::vector<BigramCode> b = a;
    double prev = QgramSimilarity(a, b);
    for (BigramCode extra = 100; extra < 110; ++extra) {
      b.push_back(extra);
      const double now = QgramSimilarity(a, b);
      EXPECT_LT(now, prev);
      prev = now;
    }
  }
}

TEST(BigramMatcherTest, IdenticalMemberMatchesAtOne) {
  Dataset ds = BundledPopulation(500, 37);
  const HmacKey key = TestKey();
  BigramMatcher m = *BigramMatcher::Create(ds, key, {});
  for (size_t i = 0; i < 50; ++i) {
    MatchDecision d = m.Link(ds.records[i]);
    ASSERT_TRUE(d.matched_row_id.has_value());
    EXPECT_DOUBLE_EQ(d.score, 1.0);
  }
}

TEST(BigramMatcherTest, PettitFindsPetitt) {
  Dataset ref;
  ref.records.push_back(
      MakeRecord(1, "john", "petitt", 1980, Sex::kMale, "20600000001"));
  ref.records.push_back(
      MakeRecord(2, "mary", "jones", 1980, Sex::kMale, "20600000002"));
  const HmacKey key = TestKey();
  BigramMatcher m = *BigramMatcher::Create(ref, key, {});
  PersonRecord q =
      MakeRecord(9, "john", "pettit", 1980, Sex::kMale, "20600000001");
  MatchDecision d = m.Link(q);
  ASSERT_TRUE(d.matched_row_id.has_value());
  EXPECT_EQ(*d.matched_row_id, 1u);
  EXPECT_DOUBLE_EQ(d.score, 1.0);
}

TEST(BigramMatcherTest, DisjointNamesScoreZeroAndNoBlockNoWork) {
  Dataset ref;
  ref.records.push_back(
      MakeRecord(1, "abc", "def", 1980, Sex::kMale, "20600000001"));
  const HmacKey key = TestKey();
  BigramMatcher m = *BigramMatcher::Create(ref, key, {});
  MatchDecision d =
      m.Link(MakeRecord(2, "xyz", "uvw", 1980, Sex::kMale, "20600000003"));
  EXPECT_FALSE(d.matched_row_id.has_value());
  EXPECT_DOUBLE_EQ(d.score, 0.0);
  MatchDecision elsewhere =
      m.Link(MakeRecord(3, "abc", "def", 1980, Sex::kMale, "99900000003"));
  EXPECT_FALSE(elsewhere.matched_row_id.has_value());
  EXPECT_EQ(elsewhere.comparisons, 0u);
}

TEST(BigramMatcherTest, ComparisonsEqualBlockSizeTimesQueries) {
  Dataset ds = BundledPopulation(3000, 38);
  const HmacKey key = TestKey();
  BigramMatcher m = *BigramMatcher::Create(ds, key, {});
  absl::flat_hash_map<std::string, size_t> block_size;
  for (const Block& b : m.blocks()) block_size[b.blocking_key] = b.row_ids.size();
  std::vector<MatchDecision> d = m.LinkAll(ds);
  for (size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d[i].comparisons, block_size[ds.records[i].sa3]);
  }
}

TEST(BigramMatcherTest, TransposedPassRecoversSwappedNames) {
  Dataset ref;
  ref.records.push_back(
      MakeRecord(1, "anna", "smith", 1980, Sex::kFemale, "20600000001"));
  ref.records.push_back(
      MakeRecord(2, "bob", "jones", 1980, Sex::kMale, "20600000002"));
  const HmacKey key = TestKey();
  PersonRecord q =
      MakeRecord(1, "smith", "anna", 1980, Sex::kFemale, "20600000001");
  BigramMatcher plain = *BigramMatcher::Create(ref, key, {});
  EXPECT_FALSE(plain.Link(q).matched_row_id.has_value());
  BigramMatcherOptions opts;
  opts.transposed_pass = true;
  BigramMatcher both = *BigramMatcher::Create(ref, key, opts);
  MatchDecision d = both.Link(q);
  ASSERT_TRUE(d.matched_row_id.has_value());
  EXPECT_EQ(*d.matched_row_id, 1u);
}

TEST(BigramMatcherTest, TieGoesToLowestRow) {
  Dataset ref;
  ref.records.push_back(
      MakeRecord(5, "anna", "smith", 1980, Sex::kFemale, "20600000001"));
  ref.records.push_back(
      MakeRecord(3, "anna", "smith", 1970, Sex::kFemale, "20600000002"));
  const HmacKey key = TestKey();
  BigramMatcher m = *BigramMatcher::Create(ref, key, {});
  MatchDecision d =
      m.Link(MakeRecord(9, "anna", "smith", 1990, Sex::kFemale, "20600000009"));
  EXPECT_EQ(d.matched_row_id, 3u);
}

TEST(MatchMethodTest, NamesRoundTrip) {
  for (MatchMethod m : {MatchMethod::kFirstUnique, MatchMethod::kVoting,
                        MatchMethod::kBigramDice, MatchMethod::kBigramQgram}) {
    EXPECT_EQ(*ParseMatchMethod(MatchMethodName(m)), m);
  }
}

}  // namespace
}  // namespace pprl
