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


#include "pprl/linkkeys.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "absl/container/flat_hash_set.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace pprl {
namespace {

using ::pprl::testing::BundledPopulation;
using ::pprl::testing::MakeRecord;
using S = AttributeSelector;

const LinkageKeySpec& SpecNamed(const std::vector<LinkageKeySpec>& specs,
                                const std::string& name) {
  for (const LinkageKeySpec& s : specs) {
    if (s.name == name) return s;
  }
  ADD_FAILURE() << "no spec " << name;
  return specs.front();
}

HmacKey TestKey() { return HmacKey::FromSeed(42, "test"); }

TEST(DefaultSpecsTest, ElevenValidSpecs) {
  const std::vector<LinkageKeySpec> specs = DefaultLinkageKeySpecs();
  EXPECT_EQ(specs.size(), 11u);
  EXPECT_TRUE(ValidateSpecs(specs).ok());
}

TEST(DefaultSpecsTest, SpecTextRoundTrip) {
  std::string text = "# comment\n\n";
  for (const LinkageKeySpec& s : DefaultLinkageKeySpecs()) {
    text += SpecToString(s) + "\n";
  }
  absl::StatusOr<std::vector<LinkageKeySpec>> parsed = ParseSpecText(text);
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  EXPECT_EQ(*parsed, DefaultLinkageKeySpecs());
}

TEST(DeriveTagTest, ComposesHmacOverSerialization) {
  const HmacKey key = TestKey();
  PersonRecord r = MakeRecord(1, "anna", "smith", 1980, Sex::kFemale, "206");
  LinkageKeySpec spec = SpecNamed(DefaultLinkageKeySpecs(),
                                  "ForenameSurnameYoBSex");
  EXPECT_EQ(DeriveTag(r, spec, key),
            ComputeHmac(key, "anna\x1fsmith\x1f" "1980\x1f" "F"));
}

TEST(DeriveTagTest, TransposedMatchesSwappedFullFields) {
  const HmacKey key = TestKey();
  LinkageKeySpec trans{"t", {S::Transposed(Field::kFirst, Field::kLast),
                             S::Full(Field::kYob)}};
  LinkageKeySpec plain{"p", {S::Full(Field::kFirst), S::Full(Field::kLast),
                             S::Full(Field::kYob)}};
  PersonRecord r = MakeRecord(1, "anna", "smith", 1980, Sex::kFemale, "206");
  PersonRecord swapped =
      MakeRecord(2, "smith", "anna", 1980, Sex::kFemale, "206");
  EXPECT_EQ(DeriveTag(r, trans, key), DeriveTag(swapped, plain, key));
  // The query side reads the fields in record order, so a transposed query
  // meets the index tag of the original.
  EXPECT_EQ(DeriveTag(swapped, trans, key, KeyRole::kQuery),
            DeriveTag(r, trans, key, KeyRole::kIndex));
}

TEST(DeriveTagTest, InitialContributesFirstLetter) {
  const HmacKey key = TestKey();
  LinkageKeySpec spec{"i", {S::Initial(Field::kFirst)}};
  PersonRecord r = MakeRecord(1, "anna", "smith", 1980, Sex::kFemale, "206");
  EXPECT_EQ(DeriveTag(r, spec, key), ComputeHmac(key, "a"));
}

TEST(DeriveTagTest, MiddleSpecSkipsRecordsWithoutMiddle) {
  const HmacKey key = TestKey();
  const std::vector<LinkageKeySpec> specs = DefaultLinkageKeySpecs();
  PersonRecord r = MakeRecord(1, "anna", "smith", 1980, Sex::kFemale, "206");
  std::map<std::string, HmacTag> tags = DeriveDigests(r, specs, key);
  EXPECT_EQ(tags.size(), 10u);
  EXPECT_FALSE(tags.contains("MiddleNameSurnameYoBSexMeshblock"));
  r.middle_initial = 'j';
  EXPECT_EQ(DeriveDigests(r, specs, key).size(), 11u);
}

TEST(BuildIndexTest, EmptyDataset) {
  absl::StatusOr<LinkIndex> index =
      BuildIndex(Dataset(), DefaultLinkageKeySpecs(), TestKey());
  ASSERT_TRUE(index.ok());
  ASSERT_EQ(index->size(), 11u);
  for (size_t s = 0; s < index->size(); ++s) {
    EXPECT_TRUE(index->partition(s).postings.empty());
  }
}

TEST(BuildIndexTest, IdenticalRecordsShareAPosting) {
  Dataset ds;
  ds.records.push_back(
      MakeRecord(1, "anna", "smith", 1980, Sex::kFemale, "20660940000"));
  ds.records.push_back(
      MakeRecord(2, "anna", "smith", 1980, Sex::kFemale, "20660940001"));
  absl::StatusOr<LinkIndex> index =
      BuildIndex(ds, DefaultLinkageKeySpecs(), TestKey());
  ASSERT_TRUE(index.ok());
  const IndexPartition& p =
      index->partition(*index->FindSpec("ForenameSurnameYoBSex"));
  ASSERT_EQ(p.postings.size(), 1u);
  EXPECT_EQ(p.postings.begin()->second, (PostingList{1, 2}));
}

TEST(BuildIndexTest, DistinctRecordsGiveSingletonsBruteForce) {
  Dataset ds = BundledPopulation(3000, 21);
  const HmacKey key = TestKey();
  LinkageKeySpec all{"all",
                     {S::Full(Field::kFirst), S::Full(Field::kMiddle),
                      S::Full(Field::kLast), S::Full(Field::kYob),
                      S::Full(Field::kSex), S::Full(Field::kMeshblock)}};
  // Oracle: count records with equal attribute tuples by direct comparison.
  std::map<std::tuple<std::string, char, std::string, int, char, std::string>,
           int>
      tuples;
  // A middle-initial spec does not apply to records without one.
  for (const PersonRecord& r : ds.records) {
    if (!r.middle_initial) continue;
    ++tuples[{r.first_name, *r.middle_initial,
              r.last_name, r.yob, SexCode(r.sex), r.meshblock}];
  }
  uint64_t singletons = 0;
  for (const auto& [t, n] : tuples) singletons += n == 1;
  absl::StatusOr<LinkIndex> index = BuildIndex(ds, {all}, key);
  ASSERT_TRUE(index.ok());
  const IndexPartition& p = index->partition(0);
  EXPECT_EQ(p.postings.size(), tuples.size());
  uint64_t index_singletons = 0;
  for (const auto& [tag, rows] : p.postings) index_singletons += rows.size() == 1;
  EXPECT_EQ(index_singletons, singletons);
}

TEST(BuildIndexTest, DeterministicAcrossThreadCounts) {
  Dataset ds = BundledPopulation(4000, 22);
  absl::StatusOr<LinkIndex> a =
      BuildIndex(ds, DefaultLinkageKeySpecs(), TestKey(), 1);
  absl::StatusOr<LinkIndex> b =
      BuildIndex(ds, DefaultLinkageKeySpecs(), TestKey(), 4);
  absl::StatusOr<LinkIndex> c =
      BuildIndex(ds, DefaultLinkageKeySpecs(), TestKey(), 1);
  ASSERT_TRUE(a.ok() && b.ok() && c.ok());
  EXPECT_EQ(*a, *b);
  EXPECT_EQ(*a, *c);
}

TEST(BuildIndexTest, DifferentKeysShareNoTags) {
  Dataset ds = BundledPopulation(5000, 23);
  LinkIndex a = *BuildIndex(ds, DefaultLinkageKeySpecs(),
                            HmacKey::FromSeed(1, "a"));
  LinkIndex b = *BuildIndex(ds, DefaultLinkageKeySpecs(),
                            HmacKey::FromSeed(2, "b"));
  absl::flat_hash_set<HmacTag, TagHash> tags;
  for (size_t s = 0; s < a.size(); ++s) {
    for (const auto& [tag, rows] : a.partition(s).postings) tags.insert(tag);
  }
  for (size_t s = 0; s < b.size(); ++s) {
    for (const auto& [tag, rows] : b.partition(s).postings) {
      EXPECT_FALSE(tags.contains(tag));
    }
  }
}

TEST(BuildIndexTest, EachRowOncePerPartition) {
  Dataset ds = BundledPopulation(3000, 24);
  LinkIndex index = *BuildIndex(ds, DefaultLinkageKeySpecs(), TestKey());
  for (size_t s = 0; s < index.size(); ++s) {
    const IndexPartition& p = index.partition(s);
    absl::flat_hash_set<uint64_t> rows;
    for (const auto& [tag, list] : p.postings) {
      EXPECT_FALSE(list.empty());
      for (uint64_t r : list) EXPECT_TRUE(rows.insert(r).second);
    }
    EXPECT_EQ(rows.size(), p.contributing_records);
  }
}

LinkIndex HandIndex(std::vector<std::vector<uint64_t>> groups) {
  IndexPartition p;
  p.spec = {"hand", {S::Full(Field::kFirst)}};
  uint8_t next = 0;
  for (const auto& g : groups) {
    HmacTag tag{};
    tag[0] = next++;
    p.postings[tag] = PostingList(g.begin(), g.end());
    p.contributing_records += g.size();
  }
  return LinkIndex("k", {p});
}

TEST(UniquenessTest, AllSingletons) {
  std::vector<SpecUniqueness> u =
      ComputeUniqueness(HandIndex({{1}, {2}, {3}}), 3);
  ASSERT_EQ(u.size(), 1u);
  EXPECT_DOUBLE_EQ(u[0].tag_percent_unique, 100.0);
  EXPECT_DOUBLE_EQ(u[0].record_percent_unique, 100.0);
}

TEST(UniquenessTest, OneSharedTag) {
  std::vector<SpecUniqueness> u =
      ComputeUniqueness(HandIndex({{1, 2, 3, 4}}), 4);
  EXPECT_DOUBLE_EQ(u[0].record_percent_unique, 0.0);
  EXPECT_DOUBLE_EQ(u[0].tag_percent_unique, 0.0);
  EXPECT_EQ(u[0].largest_group_size, 4u);
}

TEST(UniquenessTest, TagAndRecordLevelDiffer) {
  // Tags: 2 of 3 unique; records: 2 of 5 unique.
  std::vector<SpecUniqueness> u =
      ComputeUniqueness(HandIndex({{1}, {2}, {3, 4, 5}}), 10);
  EXPECT_EQ(u[0].total_tags, 3u);
  EXPECT_EQ(u[0].unique_tags, 2u);
  EXPECT_NEAR(u[0].tag_percent_unique, 200.0 / 3.0, 1e-9);
  EXPECT_DOUBLE_EQ(u[0].record_percent_unique, 40.0);
  EXPECT_DOUBLE_EQ(u[0].record_percent_of_dataset, 20.0);
  EXPECT_EQ(u[0].duplicate_group_count, 1u);
}

TEST(PruneTest, FullyUniqueIndexUnchanged) {
  LinkIndex index = HandIndex({{1}, {2}});
  PruneResult r = PruneNonUnique(index, PrunePolicy::DropPostings());
  EXPECT_EQ(r.index, index);
  EXPECT_EQ(r.stats.postings_dropped["hand"], 0u);
}

TEST(PruneTest, DropPostingsRemovesOnlyDuplicates) {
  PruneResult r = PruneNonUnique(HandIndex({{1}, {2, 3}, {4}}),
                                 PrunePolicy::DropPostings());
  EXPECT_EQ(r.index.partition(0).postings.size(), 2u);
  EXPECT_EQ(r.stats.postings_dropped["hand"], 1u);
  EXPECT_EQ(r.stats.rows_dropped["hand"], 2u);
}

TEST(PruneTest, DropPostingsLeavesSingletonsOnRealData) {
  Dataset ds = BundledPopulation(5000, 25);
  LinkIndex index = *BuildIndex(ds, DefaultLinkageKeySpecs(), TestKey());
  PruneResult r = PruneNonUnique(index, PrunePolicy::DropPostings());
  for (size_t s = 0; s < r.index.size(); ++s) {
    for (const auto& [tag, rows] : r.index.partition(s).postings) {
      EXPECT_EQ(rows.size(), 1u);
    }
  }
}

TEST(PruneTest, DropSpecBelowThreshold) {
  // 3 of 5 records unique = 60%, below 90%.
  LinkIndex index = HandIndex({{1}, {2}, {3}, {4, 5}});
  PruneResult r = PruneNonUnique(index, PrunePolicy::DropSpec(90.0));
  EXPECT_EQ(r.index.size(), 0u);
  EXPECT_EQ(r.stats.specs_dropped, std::vector<std::string>{"hand"});
  PruneResult kept = PruneNonUnique(index, PrunePolicy::DropSpec(50.0));
  EXPECT_EQ(kept.index.size(), 1u);
}

TEST(SnapshotTest, RoundTrip) {
  Dataset ds = BundledPopulation(2000, 26);
  LinkIndex index = *BuildIndex(ds, DefaultLinkageKeySpecs(), TestKey());
  const std::string path = testing::TempDir("snapshot") + "/index.snap";
  ASSERT_TRUE(WriteIndexSnapshot(index, path).ok());
  absl::StatusOr<LinkIndex> back = ReadIndexSnapshot(path);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(*back, index);
  EXPECT_EQ(SerializeIndex(*back), SerializeIndex(index));
}

TEST(SnapshotTest, RejectsCorruption) {
  LinkIndex index = HandIndex({{1}, {2, 3}});
  std::string bytes = SerializeIndex(index);
  EXPECT_FALSE(DeserializeIndex(bytes.substr(0, bytes.size() - 3)).ok());
  std::string bad = bytes;
  bad[0] ^= 0x55;
  EXPECT_FALSE(DeserializeIndex(bad).ok());
}

TEST(ExportTest, CsvHoldsNoPlaintext) {
  Dataset ds = BundledPopulation(300, 27);
  LinkIndex index = *BuildIndex(ds, DefaultLinkageKeySpecs(), TestKey());
  const std::string csv = ExportIndexCsv(index);
  EXPECT_EQ(csv.rfind("#", 0), 0u);
  for (const PersonRecord& r : ds.records) {
    if (r.last_name.size() < 5) continue;
    EXPECT_EQ(csv.find(r.last_name), std::string::npos) << r.last_name;
  }
}

}  // namespace
}  // namespace pprl
