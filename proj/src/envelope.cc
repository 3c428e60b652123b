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

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "pprl/hashcore.h"
#include "pprl/linkkeys.h"
#include "pprl/parallel.h"
#include "pprl/rng.h"

namespace pprl {
namespace {

constexpr char kBlobMagic[8] = {'P', 'P', 'R', 'L', 'E', 'N', 'V', 1};
constexpr char kFileMagic[8] = {'P', 'P', 'R', 'L', 'L', 'N', 'K', 0};
constexpr uint32_t kFileVersion = 1;

constexpr size_t kPkSize = crypto_box_PUBLICKEYBYTES;
constexpr size_t kWrapNonceSize = crypto_box_NONCEBYTES;
constexpr size_t kDataKeySize = crypto_aead_xchacha20poly1305_ietf_KEYBYTES;
constexpr size_t kWrappedKeySize = kDataKeySize + crypto_box_MACBYTES;
constexpr size_t kDataNonceSize = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
constexpr size_t kHeaderSize = sizeof(kBlobMagic) + kPkSize + kWrapNonceSize +
                               kWrappedKeySize + kDataNonceSize;

static_assert(crypto_box_SEEDBYTES == 32);
static_assert(randombytes_SEEDBYTES == 32);

void EnsureSodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) std::abort();
  });
}

void PutU32(uint32_t v, std::vector<uint8_t>& out) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void PutU64(uint64_t v, std::vector<uint8_t>& out) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}
  bool Read(size_t n, std::span<const uint8_t>& out) {
    if (bytes_.size() - pos_ < n) return false;
    out = bytes_.subspan(pos_, n);
    pos_ += n;
    return true;
  }
  bool U32(uint32_t& v) {
    std::span<const uint8_t> b;
    if (!Read(4, b)) return false;
    v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return true;
  }
  bool U64(uint64_t& v) {
    std::span<const uint8_t> b;
    if (!Read(8, b)) return false;
    v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return true;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

std::vector<uint8_t> EncodeFields(const std::vector<std::string>& fields) {
  std::vector<uint8_t> out;
  PutU32(static_cast<uint32_t>(fields.size()), out);
  for (const std::string& f : fields) {
    PutU32(static_cast<uint32_t>(f.size()), out);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

absl::StatusOr<std::vector<std::string>> DecodeFields(
    std::span<const uint8_t> bytes) {
  Reader r(bytes);
  uint32_t count = 0;
  if (!r.U32(count)) return absl::DataLossError("truncated field list");
  std::vector<std::string> fields;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t len = 0;
    std::span<const uint8_t> data;
    if (!r.U32(len) || !r.Read(len, data)) {
      return absl::DataLossError("truncated field");
    }
    fields.emplace_back(reinterpret_cast<const char*>(data.data()), data.size());
  }
  if (!r.done()) return absl::DataLossError("trailing bytes in field list");
  return fields;
}

}  // namespace

Keypair Keypair::Generate() {
  EnsureSodium();
  Keypair kp;
  crypto_box_keypair(kp.public_key.data(), kp.private_key.data());
  return kp;
}

Keypair Keypair::FromSeed(uint64_t seed, absl::string_view label) {
  EnsureSodium();
  std::string material = absl::StrCat("pprl-keypair\x1f", seed, "\x1f", label);
  Digest256 s = Sha256(material);
  Keypair kp;
  crypto_box_seed_keypair(kp.public_key.data(), kp.private_key.data(),
                          s.data());
  return kp;
}

EnvelopeRandomness DeriveEnvelopeRandomness(uint64_t seed,
                                            absl::string_view label,
                                            uint64_t counter) {
  return Sha256(absl::StrCat("pprl-envelope\x1f", seed, "\x1f", label, "\x1f",
                             counter));
}

absl::StatusOr<std::vector<uint8_t>> EnvelopeEncrypt(
    std::span<const uint8_t, Keypair::kKeySize> public_key,
    const std::vector<std::string>& fields,
    const EnvelopeRandomness& randomness) {
  EnsureSodium();
  // Expand the seed into every random value the blob needs.
  uint8_t stream[32 + kDataKeySize + kWrapNonceSize + kDataNonceSize];
  randombytes_buf_deterministic(stream, sizeof(stream), randomness.data());
  const uint8_t* eph_seed = stream;
  const uint8_t* data_key = eph_seed + 32;
  const uint8_t* wrap_nonce = data_key + kDataKeySize;
  const uint8_t* data_nonce = wrap_nonce + kWrapNonceSize;

  uint8_t eph_pk[kPkSize];
  uint8_t eph_sk[crypto_box_SECRETKEYBYTES];
  crypto_box_seed_keypair(eph_pk, eph_sk, eph_seed);

  std::vector<uint8_t> blob(kBlobMagic, kBlobMagic + sizeof(kBlobMagic));
  blob.insert(blob.end(), eph_pk, eph_pk + kPkSize);
  blob.insert(blob.end(), wrap_nonce, wrap_nonce + kWrapNonceSize);
  const size_t wrapped_at = blob.size();
  blob.resize(wrapped_at + kWrappedKeySize);
  if (crypto_box_easy(blob.data() + wrapped_at, data_key, kDataKeySize,
                      wrap_nonce, public_key.data(), eph_sk) != 0) {
    sodium_memzero(stream, sizeof(stream));
    sodium_memzero(eph_sk, sizeof(eph_sk));
    return absl::InvalidArgumentError("recipient public key rejected");
  }
  sodium_memzero(eph_sk, sizeof(eph_sk));
  blob.insert(blob.end(), data_nonce, data_nonce + kDataNonceSize);

  std::vector<uint8_t> plain = EncodeFields(fields);
  const size_t ct_at = blob.size();
  blob.resize(ct_at + plain.size() +
              crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long ct_len = 0;
  // The header is authenticated as associated data.
  crypto_aead_xchacha20poly1305_ietf_encrypt(
      blob.data() + ct_at, &ct_len, plain.data(), plain.size(), blob.data(),
      kHeaderSize, nullptr, data_nonce, data_key);
  blob.resize(ct_at + ct_len);
  sodium_memzero(plain.data(), plain.size());
  sodium_memzero(stream, sizeof(stream));
  return blob;
}

absl::StatusOr<std::vector<uint8_t>> EnvelopeEncrypt(
    std::span<const uint8_t, Keypair::kKeySize> public_key,
    const std::vector<std::string>& fields) {
  EnsureSodium();
  EnvelopeRandomness r;
  randombytes_buf(r.data(), r.size());
  return EnvelopeEncrypt(public_key, fields, r);
}

absl::StatusOr<std::vector<std::string>> EnvelopeDecrypt(
    const Keypair& keypair, std::span<const uint8_t> blob) {
  EnsureSodium();
  if (blob.size() < kHeaderSize + crypto_aead_xchacha20poly1305_ietf_ABYTES) {
    return absl::DataLossError("blob too short");
  }
  if (std::memcmp(blob.data(), kBlobMagic, sizeof(kBlobMagic)) != 0) {
    return absl::DataLossError("bad blob magic or version");
  }
  const uint8_t* eph_pk = blob.data() + sizeof(kBlobMagic);
  const uint8_t* wrap_nonce = eph_pk + kPkSize;
  const uint8_t* wrapped = wrap_nonce + kWrapNonceSize;
  const uint8_t* data_nonce = wrapped + kWrappedKeySize;
  const uint8_t* ct = data_nonce + kDataNonceSize;
  const size_t ct_len = blob.size() - kHeaderSize;

  uint8_t data_key[kDataKeySize];
  if (crypto_box_open_easy(data_key, wrapped, kWrappedKeySize, wrap_nonce,
                           eph_pk, keypair.private_key.data()) != 0) {
    return absl::PermissionDeniedError(
        "cannot unwrap data key: wrong private key or corrupted blob");
  }
  std::vector<uint8_t> plain(ct_len);
  unsigned long long plain_len = 0;
  const int rc = crypto_aead_xchacha20poly1305_ietf_decrypt(
      plain.data(), &plain_len, nullptr, ct, ct_len, blob.data(), kHeaderSize,
      data_nonce, data_key);
  sodium_memzero(data_key, sizeof(data_key));
  if (rc != 0) {
    return absl::DataLossError("authentication failed: blob was modified");
  }
  plain.resize(plain_len);
  absl::StatusOr<std::vector<std::string>> fields = DecodeFields(plain);
  sodium_memzero(plain.data(), plain.size());
  return fields;
}

absl::StatusOr<std::vector<uint8_t>> EnvelopeEncryptor::Encrypt(
    std::span<const uint8_t, Keypair::kKeySize> public_key,
    const std::vector<std::string>& fields) {
  return EnvelopeEncrypt(public_key, fields,
                         DeriveEnvelopeRandomness(seed_, "encryptor",
                                                  counter_++));
}

absl::StatusOr<SecretShares> SplitPrivateKey(const Keypair& keypair,
                                             uint32_t threshold, uint32_t total,
                                             uint64_t seed) {
  std::mt19937_64 rng = MakeRng(seed, "split-key");
  return SplitSecret(std::vector<uint8_t>(keypair.private_key.begin(),
                                          keypair.private_key.end()),
                     threshold, total, rng);
}

absl::StatusOr<Keypair> RecombinePrivateKey(const std::vector<Share>& shares,
                                            uint32_t threshold) {
  EnsureSodium();
  absl::StatusOr<std::vector<uint8_t>> secret =
      RecombineSecret(shares, threshold, Keypair::kKeySize);
  if (!secret.ok()) return secret.status();
  Keypair kp;
  std::copy(secret->begin(), secret->end(), kp.private_key.begin());
  crypto_scalarmult_base(kp.public_key.data(), kp.private_key.data());
  return kp;
}

std::vector<std::string> RecordLinkingFields(const PersonRecord& r) {
  return {r.first_name,
          r.middle_initial.has_value() ? std::string(1, *r.middle_initial)
                                       : std::string(1, kAbsentMarker),
          r.last_name,
          absl::StrCat(r.yob),
          std::string(1, SexCode(r.sex)),
          r.meshblock,
          r.sa3};
}

absl::StatusOr<PersonRecord> RecordFromLinkingFields(
    uint64_t row_id, const std::vector<std::string>& f) {
  if (f.size() != 7) {
    return absl::DataLossError(
        absl::StrCat("row ", row_id, ": expected 7 fields, got ", f.size()));
  }
  PersonRecord r;
  r.row_id = row_id;
  r.first_name = f[0];
  if (f[1].size() != 1) {
    return absl::DataLossError(absl::StrCat("row ", row_id, ": bad middle"));
  }
  if (f[1][0] != kAbsentMarker) r.middle_initial = f[1][0];
  r.last_name = f[2];
  if (!absl::SimpleAtoi(f[3], &r.yob)) {
    return absl::DataLossError(absl::StrCat("row ", row_id, ": bad yob"));
  }
  absl::StatusOr<Sex> sex = ParseSex(f[4]);
  if (!sex.ok()) return sex.status();
  r.sex = *sex;
  r.meshblock = f[5];
  r.sa3 = f[6];
  return r;
}

std::vector<uint8_t> SerializeLinkageFile(
    const std::vector<EncryptedRecord>& records) {
  std::vector<uint8_t> out(kFileMagic, kFileMagic + sizeof(kFileMagic));
  PutU32(kFileVersion, out);
  PutU64(records.size(), out);
  for (const EncryptedRecord& r : records) {
    PutU64(r.row_id, out);
    PutU32(static_cast<uint32_t>(r.blob.size()), out);
    out.insert(out.end(), r.blob.begin(), r.blob.end());
  }
  return out;
}

absl::StatusOr<std::vector<EncryptedRecord>> ParseLinkageFile(
    std::span<const uint8_t> bytes) {
  Reader r(bytes);
  std::span<const uint8_t> magic;
  if (!r.Read(sizeof(kFileMagic), magic) ||
      std::memcmp(magic.data(), kFileMagic, sizeof(kFileMagic)) != 0) {
    return absl::DataLossError("not an encrypted linkage file");
  }
  uint32_t version = 0;
  uint64_t count = 0;
  if (!r.U32(version) || version != kFileVersion) {
    return absl::DataLossError(
        absl::StrCat("unsupported linkage file version ", version));
  }
  if (!r.U64(count)) return absl::DataLossError("truncated record count");
  std::vector<EncryptedRecord> records;
  for (uint64_t i = 0; i < count; ++i) {
    EncryptedRecord rec;
    uint32_t len = 0;
    std::span<const uint8_t> blob;
    if (!r.U64(rec.row_id) || !r.U32(len) || !r.Read(len, blob)) {
      return absl::DataLossError(absl::StrCat("truncated record ", i));
    }
    rec.blob.assign(blob.begin(), blob.end());
    records.push_back(std::move(rec));
  }
  if (!r.done()) return absl::DataLossError("trailing bytes in linkage file");
  return records;
}

absl::StatusOr<std::vector<EncryptedRecord>> EncryptDataset(
    const Dataset& dataset, std::span<const uint8_t, Keypair::kKeySize> pk,
    uint64_t seed, absl::string_view label, int threads) {
  const size_t n = dataset.records.size();
  std::vector<EncryptedRecord> out(n);
  std::vector<absl::Status> errors(ShardCount(n, threads));
  ParallelFor(n, threads, [&](int shard, size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const PersonRecord& rec = dataset.records[i];
      absl::StatusOr<std::vector<uint8_t>> blob = EnvelopeEncrypt(
          pk, RecordLinkingFields(rec),
          DeriveEnvelopeRandomness(seed, label, i));
      if (!blob.ok()) {
        errors[shard] = blob.status();
        return;
      }
      out[i] = {rec.row_id, *std::move(blob)};
    }
  });
  for (const absl::Status& s : errors) {
    if (!s.ok()) return s;
  }
  return out;
}

absl::StatusOr<Dataset> DecryptDataset(
    const std::vector<EncryptedRecord>& records, const Keypair& keypair,
    int threads) {
  const size_t n = records.size();
  Dataset out;
  out.records.resize(n);
  std::vector<absl::Status> errors(ShardCount(n, threads));
  ParallelFor(n, threads, [&](int shard, size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      absl::StatusOr<std::vector<std::string>> fields =
          EnvelopeDecrypt(keypair, records[i].blob);
      if (!fields.ok()) {
        errors[shard] = fields.status();
        return;
      }
      absl::StatusOr<PersonRecord> rec =
          RecordFromLinkingFields(records[i].row_id, *fields);
      if (!rec.ok()) {
        errors[shard] = rec.status();
        return;
      }
      out.records[i] = *std::move(rec);
    }
  });
  for (const absl::Status& s : errors) {
    if (!s.ok()) return s;
  }
  return out;
}

std::vector<std::string> ScanForPlaintext(std::span<const uint8_t> bytes,
                                          const std::vector<std::string>& values,
                                          size_t min_length) {
  // One pass over the bytes per distinct value length.
  std::map<size_t, absl::flat_hash_set<absl::string_view>> by_length;
  for (const std::string& v : values) {
    if (v.size() >= std::max<size_t>(min_length, 1)) {
      by_length[v.size()].insert(v);
    }
  }
  const absl::string_view text(reinterpret_cast<const char*>(bytes.data()),
                               bytes.size());
  absl::flat_hash_set<std::string> found;
  for (const auto& [len, set] : by_length) {
    for (size_t i = 0; i + len <= text.size(); ++i) {
      absl::string_view window = text.substr(i, len);
      if (set.contains(window)) found.insert(std::string(window));
    }
  }
  std::vector<std::string> out(found.begin(), found.end());
  std::sort(out.begin(), out.end());
  return out;
}

absl::StatusOr<PipelineResult> PipelineDemo(const Dataset& reference,
                                            const Dataset& queries,
                                            const Keypair& linker_keypair,
                                            uint64_t seed, MatchMethod method,
                                            int threads) {
  if (method != MatchMethod::kFirstUnique && method != MatchMethod::kVoting) {
    return absl::InvalidArgumentError(
        "pipeline demo links with a deterministic strategy");
  }
  PipelineResult result;
  // Name holders: encrypt linking fields to the linker; analysis fields
  // travel separately.
  absl::StatusOr<std::vector<EncryptedRecord>> ref_enc = EncryptDataset(
      reference, linker_keypair.public_key, seed, "reference", threads);
  if (!ref_enc.ok()) return ref_enc.status();
  absl::StatusOr<std::vector<EncryptedRecord>> query_enc = EncryptDataset(
      queries, linker_keypair.public_key, seed, "queries", threads);
  if (!query_enc.ok()) return query_enc.status();
  result.reference_file = SerializeLinkageFile(*ref_enc);
  result.query_file = SerializeLinkageFile(*query_enc);
  result.analysis_csv = "row_id,sa3\n";
  for (const PersonRecord& r : queries.records) {
    absl::StrAppend(&result.analysis_csv, r.row_id, ",", r.sa3, "\n");
  }

  // Linker: parse the files it received, decrypt, derive keys, link.
  absl::StatusOr<std::vector<EncryptedRecord>> ref_in =
      ParseLinkageFile(result.reference_file);
  if (!ref_in.ok()) return ref_in.status();
  absl::StatusOr<std::vector<EncryptedRecord>> query_in =
      ParseLinkageFile(result.query_file);
  if (!query_in.ok()) return query_in.status();
  absl::StatusOr<Dataset> ref_plain =
      DecryptDataset(*ref_in, linker_keypair, threads);
  if (!ref_plain.ok()) return ref_plain.status();
  absl::StatusOr<Dataset> query_plain =
      DecryptDataset(*query_in, linker_keypair, threads);
  if (!query_plain.ok()) return query_plain.status();

  const HmacKey key = HmacKey::FromSeed(seed, "pipeline-linker");
  absl::StatusOr<LinkIndex> index =
      BuildIndex(*ref_plain, DefaultLinkageKeySpecs(), key, threads);
  if (!index.ok()) return index.status();
  DeterministicLinker linker(*index, key);
  result.decisions = linker.LinkAll(*query_plain, method, seed, threads);

  absl::StatusOr<EvalResult> eval =
      Evaluate(result.decisions, RowIds(reference), "pipeline", method);
  if (!eval.ok()) return eval.status();
  result.evaluation = *eval;

  // Output order must not reveal input order.
  std::mt19937_64 rng = MakeRng(seed, "pipeline:shuffle");
  std::shuffle(result.decisions.begin(), result.decisions.end(), rng);
  return result;
}

}  // namespace pprl
