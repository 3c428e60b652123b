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


#include "pprl/envelope.h"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "pprl/evalbench.h"
#include "pprl/hashcore.h"
#include "pprl/linkkeys.h"
#include "pprl/linker.h"
#include "pprl/synthgen.h"
#include "test_util.h"

namespace pprl {
namespace {

using ::pprl::testing::BundledPopulation;
using ::pprl::testing::MakeRecord;

EnvelopeRandomness FixedRandomness(uint8_t fill) {
  EnvelopeRandomness r;
  r.fill(fill);
  return r;
}

TEST(EnvelopeTest, RoundTrip) {
  const Keypair kp = Keypair::Generate();
  const std::vector<std::string> fields = {"margaret", "J", "o'brien", "1961",
                                           std::string("\0x", 2), ""};
  absl::StatusOr<std::vector<uint8_t>> blob =
      EnvelopeEncrypt(kp.public_key, fields);
  ASSERT_TRUE(blob.ok()) << blob.status();
  absl::StatusOr<std::vector<std::string>> back = EnvelopeDecrypt(kp, *blob);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(*back, fields);
}

TEST(EnvelopeTest, EmptyFieldList) {
  const Keypair kp = Keypair::FromSeed(1, "empty");
  absl::StatusOr<std::vector<uint8_t>> blob =
      EnvelopeEncrypt(kp.public_key, {}, FixedRandomness(3));
  ASSERT_TRUE(blob.ok());
  EXPECT_TRUE(EnvelopeDecrypt(kp, *blob)->empty());
}

TEST(EnvelopeTest, SameRandomnessIsReproducibleAndFreshRandomnessDiffers) {
  const Keypair kp = Keypair::FromSeed(2, "repro");
  const std::vector<std::string> fields = {"smith"};
  EXPECT_EQ(*EnvelopeEncrypt(kp.public_key, fields, FixedRandomness(1)),
            *EnvelopeEncrypt(kp.public_key, fields, FixedRandomness(1)));
  EXPECT_NE(*EnvelopeEncrypt(kp.public_key, fields, FixedRandomness(1)),
            *EnvelopeEncrypt(kp.public_key, fields, FixedRandomness(2)));
  EXPECT_NE(*EnvelopeEncrypt(kp.public_key, fields),
            *EnvelopeEncrypt(kp.public_key, fields));

  EnvelopeEncryptor a(7), b(7);
  const std::vector<uint8_t> a1 = *a.Encrypt(kp.public_key, fields);
  const std::vector<uint8_t> a2 = *a.Encrypt(kp.public_key, fields);
  EXPECT_NE(a1, a2);
  EXPECT_EQ(a1, *b.Encrypt(kp.public_key, fields));
}

TEST(EnvelopeTest, AnyModifiedByteIsRejected) {
  const Keypair kp = Keypair::FromSeed(3, "tamper");
  const std::vector<uint8_t> blob =
      *EnvelopeEncrypt(kp.public_key, {"anderson", "1970"}, FixedRandomness(9));
  for (size_t i = 0; i < blob.size(); ++i) {
    std::vector<uint8_t> bad = blob;
    bad[i] ^= 0x01;
    EXPECT_FALSE(EnvelopeDecrypt(kp, bad).ok()) << "byte " << i;
  }
}

TEST(EnvelopeTest, TruncatedBlobIsRejected) {
  const Keypair kp = Keypair::FromSeed(4, "truncate");
  const std::vector<uint8_t> blob =
      *EnvelopeEncrypt(kp.public_key, {"anderson"}, FixedRandomness(9));
  for (size_t len : {size_t{0}, size_t{10}, blob.size() - 1}) {
    std::vector<uint8_t> cut(blob.begin(), blob.begin() + len);
    absl::StatusOr<std::vector<std::string>> r = EnvelopeDecrypt(kp, cut);
    EXPECT_FALSE(r.ok());
    EXPECT_EQ(r.status().code(), absl::StatusCode::kDataLoss);
  }
}

TEST(EnvelopeTest, WrongKeyIsPermissionDenied) {
  const Keypair kp = Keypair::FromSeed(5, "right");
  const Keypair other = Keypair::FromSeed(5, "wrong");
  const std::vector<uint8_t> blob =
      *EnvelopeEncrypt(kp.public_key, {"anderson"}, FixedRandomness(9));
  absl::StatusOr<std::vector<std::string>> r = EnvelopeDecrypt(other, blob);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.status().code(), absl::StatusCode::kPermissionDenied);
}

TEST(EnvelopeTest, KeypairFromSeedIsDeterministic) {
  EXPECT_EQ(Keypair::FromSeed(6, "x").private_key,
            Keypair::FromSeed(6, "x").private_key);
  EXPECT_NE(Keypair::FromSeed(6, "x").private_key,
            Keypair::FromSeed(6, "y").private_key);
  EXPECT_NE(Keypair::FromSeed(6, "x").private_key,
            Keypair::FromSeed(7, "x").private_key);
}

TEST(PrivateKeySharingTest, ThresholdRecoversWorkingKey) {
  const Keypair kp = Keypair::FromSeed(8, "custodian");
  const std::vector<uint8_t> blob =
      *EnvelopeEncrypt(kp.public_key, {"nguyen"}, FixedRandomness(4));
  absl::StatusOr<SecretShares> shares = SplitPrivateKey(kp, 3, 5, 8);
  ASSERT_TRUE(shares.ok()) << shares.status();
  ASSERT_EQ(shares->shares.size(), 5u);

  const std::vector<Share> three = {shares->shares[4], shares->shares[1],
                                    shares->shares[2]};
  absl::StatusOr<Keypair> back = RecombinePrivateKey(three, 3);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->private_key, kp.private_key);
  EXPECT_EQ(back->public_key, kp.public_key);
  EXPECT_EQ(EnvelopeDecrypt(*back, blob)->front(), "nguyen");

  const std::vector<Share> two = {shares->shares[0], shares->shares[3]};
  EXPECT_FALSE(RecombinePrivateKey(two, 3).ok());
}

TEST(LinkingFieldsTest, RoundTripWithAndWithoutMiddle) {
  for (std::optional<char> middle : {std::optional<char>(), std::optional('q')}) {
    const PersonRecord r =
        MakeRecord(42, "mary", "smith", 1955, Sex::kFemale, "1234567", middle);
    absl::StatusOr<PersonRecord> back =
        RecordFromLinkingFields(42, RecordLinkingFields(r));
    ASSERT_TRUE(back.ok()) << back.status();
    EXPECT_EQ(*back, r);
  }
  EXPECT_FALSE(RecordFromLinkingFields(1, {"a", "b"}).ok());
}

TEST(LinkageFileTest, RoundTripAndCorruption) {
  const Dataset ds = BundledPopulation(200, 11);
  const Keypair kp = Keypair::FromSeed(11, "file");
  absl::StatusOr<std::vector<EncryptedRecord>> enc =
      EncryptDataset(ds, kp.public_key, 11, "reference", 2);
  ASSERT_TRUE(enc.ok()) << enc.status();
  const std::vector<uint8_t> bytes = SerializeLinkageFile(*enc);
  absl::StatusOr<std::vector<EncryptedRecord>> parsed = ParseLinkageFile(bytes);
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  ASSERT_EQ(parsed->size(), ds.records.size());
  absl::StatusOr<Dataset> plain = DecryptDataset(*parsed, kp, 3);
  ASSERT_TRUE(plain.ok()) << plain.status();
  EXPECT_EQ(plain->records, ds.records);

  std::vector<uint8_t> cut(bytes.begin(), bytes.end() - 1);
  EXPECT_FALSE(ParseLinkageFile(cut).ok());
  std::vector<uint8_t> extra = bytes;
  extra.push_back(0);
  EXPECT_FALSE(ParseLinkageFile(extra).ok());
  std::vector<uint8_t> bad_magic = bytes;
  bad_magic[0] ^= 0xff;
  EXPECT_FALSE(ParseLinkageFile(bad_magic).ok());
  EXPECT_FALSE(DecryptDataset(*parsed, Keypair::FromSeed(11, "other")).ok());
}

TEST(LinkageFileTest, EncryptionIsThreadIndependent) {
  const Dataset ds = BundledPopulation(100, 12);
  const Keypair kp = Keypair::FromSeed(12, "threads");
  EXPECT_EQ(SerializeLinkageFile(*EncryptDataset(ds, kp.public_key, 12, "r", 1)),
            SerializeLinkageFile(*EncryptDataset(ds, kp.public_key, 12, "r", 4)));
}

TEST(ScanForPlaintextTest, FindsPlantedValuesOnly) {
  const std::string hay = "xx--wellington--yy";
  const std::vector<uint8_t> bytes(hay.begin(), hay.end());
  EXPECT_EQ(ScanForPlaintext(bytes, {"wellington", "auckland", "ton"}, 6),
            std::vector<std::string>{"wellington"});
  EXPECT_TRUE(ScanForPlaintext(bytes, {"ton"}, 6).empty());
}

TEST(ScanForPlaintextTest, EncryptedFilesHoldNoIdentifiers) {
  for (uint64_t seed : {21u, 22u, 23u}) {
    const Dataset ds = BundledPopulation(300, seed);
    const Keypair kp = Keypair::FromSeed(seed, "scan");
    const std::vector<uint8_t> bytes =
        SerializeLinkageFile(*EncryptDataset(ds, kp.public_key, seed, "q"));
    std::vector<std::string> values;
    for (const PersonRecord& r : ds.records) {
      values.push_back(r.first_name);
      values.push_back(r.last_name);
      values.push_back(r.meshblock);
    }
    EXPECT_TRUE(ScanForPlaintext(bytes, values, 6).empty()) << "seed " << seed;
  }
}

class PipelineTest : public ::testing::Test {
 protected:
  static constexpr uint64_t kSeed = 31;
  void SetUp() override {
    reference_ = BundledPopulation(1500, kSeed);
    linker_kp_ = Keypair::FromSeed(kSeed, "linker");
  }
  Dataset reference_;
  Keypair linker_kp_;
};

TEST_F(PipelineTest, SelfLinkIsPerfect) {
  const Dataset queries = Shuffle(reference_, kSeed);
  for (MatchMethod m : {MatchMethod::kFirstUnique, MatchMethod::kVoting}) {
    absl::StatusOr<PipelineResult> r =
        PipelineDemo(reference_, queries, linker_kp_, kSeed, m, 2);
    ASSERT_TRUE(r.ok()) << r.status();
    EXPECT_DOUBLE_EQ(r->evaluation.precision, 1.0);
    EXPECT_DOUBLE_EQ(r->evaluation.recall_any, 1.0);
    EXPECT_DOUBLE_EQ(r->evaluation.recall_true, 1.0);
    EXPECT_EQ(r->decisions.size(), queries.records.size());
  }
}

TEST_F(PipelineTest, OutputOrderIsShuffledAndReproducible) {
  absl::StatusOr<PipelineResult> a =
      PipelineDemo(reference_, reference_, linker_kp_, kSeed);
  absl::StatusOr<PipelineResult> b =
      PipelineDemo(reference_, reference_, linker_kp_, kSeed);
  ASSERT_TRUE(a.ok() && b.ok());
  std::vector<uint64_t> order;
  for (const MatchDecision& d : a->decisions) order.push_back(d.query_row_id);
  std::vector<uint64_t> input;
  for (const PersonRecord& r : reference_.records) input.push_back(r.row_id);
  EXPECT_NE(order, input);
  std::vector<uint64_t> order_b;
  for (const MatchDecision& d : b->decisions) order_b.push_back(d.query_row_id);
  EXPECT_EQ(order, order_b);
  EXPECT_EQ(a->reference_file, b->reference_file);
  EXPECT_EQ(a->query_file, b->query_file);
}

TEST_F(PipelineTest, AccuracyEqualsPlaintextLinking) {
  DistortionContext ctx;
  absl::StatusOr<DistortResult> d = Distort(
      reference_, {DistortionKind::kFirstName2LetterTranspose, 1.0}, kSeed,
      ctx);
  ASSERT_TRUE(d.ok()) << d.status();
  const Dataset queries = Shuffle(d->dataset, kSeed);

  absl::StatusOr<PipelineResult> piped =
      PipelineDemo(reference_, queries, linker_kp_, kSeed);
  ASSERT_TRUE(piped.ok()) << piped.status();

  const HmacKey key = HmacKey::FromSeed(kSeed, "pipeline-linker");
  const LinkIndex index =
      *BuildIndex(reference_, DefaultLinkageKeySpecs(), key);
  const std::vector<MatchDecision> plain =
      DeterministicLinker(index, key).LinkAll(queries, MatchMethod::kVoting,
                                              kSeed);
  const EvalResult expected =
      *Evaluate(plain, RowIds(reference_), "pipeline", MatchMethod::kVoting);
  EXPECT_EQ(piped->evaluation.true_matches, expected.true_matches);
  EXPECT_EQ(piped->evaluation.false_matches, expected.false_matches);
  EXPECT_EQ(piped->evaluation.no_matches, expected.no_matches);

  auto by_query = [](std::vector<MatchDecision> v) {
    std::vector<std::pair<uint64_t, std::optional<uint64_t>>> out;
    for (const MatchDecision& m : v) {
      out.push_back({m.query_row_id, m.matched_row_id});
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  EXPECT_EQ(by_query(piped->decisions), by_query(plain));
}

TEST_F(PipelineTest, AnalysisFieldsTravelSeparately) {
  absl::StatusOr<PipelineResult> r =
      PipelineDemo(reference_, reference_, linker_kp_, kSeed);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->analysis_csv.rfind("row_id,sa3\n", 0), 0u);
  EXPECT_EQ(std::count(r->analysis_csv.begin(), r->analysis_csv.end(), '\n'),
            static_cast<long>(reference_.records.size() + 1));
}

TEST_F(PipelineTest, RejectsNonDeterministicMethod) {
  EXPECT_FALSE(PipelineDemo(reference_, reference_, linker_kp_, kSeed,
                            MatchMethod::kBigramDice)
                   .ok());
}

}  // namespace
}  // namespace pprl
