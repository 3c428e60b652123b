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

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "pprl/parallel.h"

namespace pprl {

std::vector<LinkageKeySpec> DefaultLinkageKeySpecs() {
  using S = AttributeSelector;
  const S first = S::Full(Field::kFirst);
  const S last = S::Full(Field::kLast);
  const S yob = S::Full(Field::kYob);
  const S sex = S::Full(Field::kSex);
  const S mb = S::Full(Field::kMeshblock);
  return {
      {"ForenameSurnameYoBSexSA3", {first, last, yob, sex, S::Full(Field::kSa3)}},
      {"ForenameInitialSurnameInitialYoBSexMeshblock",
       {S::Initial(Field::kFirst), S::Initial(Field::kLast), yob, sex, mb}},
      {"ForenameSurnameYoBMeshblock", {first, last, yob, mb}},
      {"SurnameForenameYoBSexMeshblockTrans",
       {S::Transposed(Field::kFirst, Field::kLast), yob, sex, mb}},
      {"ForenameSurnameYoBSexMeshblock", {first, last, yob, sex, mb}},
      {"ForenameSurnameYoBSex", {first, last, yob, sex}},
      {"ForenameBiSurnameBiYoBSexMeshblock",
       {S::Bigram2(Field::kFirst), S::Bigram2(Field::kLast), yob, sex, mb}},
      {"ForenameSurnameSexMeshblock", {first, last, sex, mb}},
      {"SurnameInitialYoBSexMeshblock",
       {S::Initial(Field::kLast), yob, sex, mb}},
      {"ForenameInitialYoBSexMeshblock",
       {S::Initial(Field::kFirst), yob, sex, mb}},
      {"MiddleNameSurnameYoBSexMeshblock",
       {S::Full(Field::kMiddle), last, yob, sex, mb}},
  };
}

absl::StatusOr<std::vector<LinkageKeySpec>> ParseSpecText(
    absl::string_view content) {
  std::vector<LinkageKeySpec> specs;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(content, '\n')) {
    ++line_no;
    line = absl::StripAsciiWhitespace(line);
    if (line.empty() || line[0] == '#') continue;
    absl::StatusOr<LinkageKeySpec> spec = ParseSpec(line);
    if (!spec.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", spec.status().message()));
    }
    specs.push_back(*std::move(spec));
  }
  if (absl::Status s = ValidateSpecs(specs); !s.ok()) return s;
  return specs;
}

absl::StatusOr<std::vector<LinkageKeySpec>> LoadSpecFile(
    const std::string& path) {
  absl::StatusOr<std::string> content = ReadFileToString(path);
  if (!content.ok()) return content.status();
  return ParseSpecText(*content);
}

std::optional<HmacTag> DeriveTag(const PersonRecord& record,
                                 const LinkageKeySpec& spec,
                                 const HmacKey& key, KeyRole role) {
  if (!SpecApplies(record, spec)) return std::nullopt;
  return ComputeHmac(key, CanonicalSerialize(record, spec, role));
}

std::map<std::string, HmacTag> DeriveDigests(
    const PersonRecord& record, const std::vector<LinkageKeySpec>& specs,
    const HmacKey& key, KeyRole role) {
  std::map<std::string, HmacTag> out;
  for (const LinkageKeySpec& spec : specs) {
    if (std::optional<HmacTag> tag = DeriveTag(record, spec, key, role)) {
      out.emplace(spec.name, *tag);
    }
  }
  return out;
}

std::optional<size_t> LinkIndex::FindSpec(absl::string_view name) const {
  for (size_t i = 0; i < partitions_.size(); ++i) {
    if (partitions_[i].spec.name == name) return i;
  }
  return std::nullopt;
}

std::vector<LinkageKeySpec> LinkIndex::specs() const {
  std::vector<LinkageKeySpec> out;
  out.reserve(partitions_.size());
  for (const IndexPartition& p : partitions_) out.push_back(p.spec);
  return out;
}

absl::StatusOr<LinkIndex> BuildIndex(const Dataset& dataset,
                                     const std::vector<LinkageKeySpec>& specs,
                                     const HmacKey& key, int threads) {
  if (absl::Status s = ValidateSpecs(specs); !s.ok()) return s;
  const size_t n = dataset.records.size();
  const int shards = std::max(ShardCount(n, threads), 1);
  std::vector<std::vector<IndexPartition>> parts(shards);
  ParallelFor(n, threads, [&](int shard, size_t begin, size_t end) {
    std::vector<IndexPartition>& local = parts[shard];
    local.resize(specs.size());
    for (size_t s = 0; s < specs.size(); ++s) {
      local[s].postings.reserve(end - begin);
    }
    for (size_t i = begin; i < end; ++i) {
      const PersonRecord& r = dataset.records[i];
      for (size_t s = 0; s < specs.size(); ++s) {
        std::optional<HmacTag> tag = DeriveTag(r, specs[s], key);
        if (!tag) continue;
        local[s].postings[*tag].push_back(r.row_id);
        ++local[s].contributing_records;
      }
    }
  });
  std::vector<IndexPartition> merged = std::move(parts[0]);
  merged.resize(specs.size());
  for (int shard = 1; shard < shards; ++shard) {
    for (size_t s = 0; s < specs.size(); ++s) {
      IndexPartition& dst = merged[s];
      IndexPartition& src = parts[shard][s];
      dst.contributing_records += src.contributing_records;
      for (auto& [tag, rows] : src.postings) {
        PostingList& list = dst.postings[tag];
        list.insert(list.end(), rows.begin(), rows.end());
      }
    }
  }
  for (size_t s = 0; s < specs.size(); ++s) merged[s].spec = specs[s];
  return LinkIndex(key.key_id(), std::move(merged));
}

std::vector<SpecUniqueness> ComputeUniqueness(const LinkIndex& index,
                                              uint64_t dataset_size) {
  std::vector<SpecUniqueness> out;
  for (size_t s = 0; s < index.size(); ++s) {
    const IndexPartition& p = index.partition(s);
    SpecUniqueness u;
    u.spec_name = p.spec.name;
    u.total_tags = p.postings.size();
    u.contributing_records = p.contributing_records;
    for (const auto& [tag, rows] : p.postings) {
      if (rows.size() == 1) {
        ++u.unique_tags;
      } else {
        ++u.duplicate_group_count;
      }
      u.largest_group_size =
          std::max<uint64_t>(u.largest_group_size, rows.size());
    }
    u.unique_records = u.unique_tags;
    if (u.total_tags > 0) {
      u.tag_percent_unique = 100.0 * static_cast<double>(u.unique_tags) /
                             static_cast<double>(u.total_tags);
    }
    if (u.contributing_records > 0) {
      u.record_percent_unique = 100.0 * static_cast<double>(u.unique_records) /
                                static_cast<double>(u.contributing_records);
    }
    if (dataset_size > 0) {
      u.record_percent_of_dataset = 100.0 *
                                    static_cast<double>(u.unique_records) /
                                    static_cast<double>(dataset_size);
    }
    out.push_back(std::move(u));
  }
  return out;
}

PruneResult PruneNonUnique(const LinkIndex& index, const PrunePolicy& policy) {
  PruneResult result;
  std::vector<IndexPartition> kept;
  if (policy.kind == PrunePolicy::Kind::kDropSpec) {
    std::vector<SpecUniqueness> u = ComputeUniqueness(index, 0);
    for (size_t s = 0; s < index.size(); ++s) {
      if (u[s].record_percent_unique < policy.threshold_percent) {
        result.stats.specs_dropped.push_back(index.partition(s).spec.name);
      } else {
        kept.push_back(index.partition(s));
      }
    }
  } else {
    for (size_t s = 0; s < index.size(); ++s) {
      const IndexPartition& src = index.partition(s);
      IndexPartition dst;
      dst.spec = src.spec;
      uint64_t dropped = 0, rows = 0;
      for (const auto& [tag, list] : src.postings) {
        if (list.size() == 1) {
          dst.postings.emplace(tag, list);
        } else {
          ++dropped;
          rows += list.size();
        }
      }
      dst.contributing_records = src.contributing_records - rows;
      result.stats.postings_dropped[src.spec.name] = dropped;
      result.stats.rows_dropped[src.spec.name] = rows;
      kept.push_back(std::move(dst));
    }
  }
  result.index = LinkIndex(index.key_id(), std::move(kept));
  return result;
}

namespace {

constexpr char kSnapshotMagic[8] = {'P', 'P', 'R', 'L', 'I', 'D', 'X', '\0'};
constexpr uint32_t kSnapshotVersion = 1;

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void PutU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void PutBytes(std::string& out, absl::string_view s) {
  PutU32(out, static_cast<uint32_t>(s.size()));
  out.append(s.data(), s.size());
}

class Reader {
 public:
  explicit Reader(absl::string_view data) : data_(data) {}

  bool U32(uint32_t& v) {
    if (data_.size() < 4) return false;
    v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(data_[i]);
    data_.remove_prefix(4);
    return true;
  }
  bool U64(uint64_t& v) {
    if (data_.size() < 8) return false;
    v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(data_[i]);
    data_.remove_prefix(8);
    return true;
  }
  bool Raw(size_t n, absl::string_view& out) {
    if (data_.size() < n) return false;
    out = data_.substr(0, n);
    data_.remove_prefix(n);
    return true;
  }
  bool Bytes(absl::string_view& out) {
    uint32_t n;
    return U32(n) && Raw(n, out);
  }
  bool done() const { return data_.empty(); }

 private:
  absl::string_view data_;
};

}  // namespace

std::string SerializeIndex(const LinkIndex& index) {
  std::string out(kSnapshotMagic, sizeof(kSnapshotMagic));
  PutU32(out, kSnapshotVersion);
  PutBytes(out, index.key_id());
  PutU32(out, static_cast<uint32_t>(index.size()));
  for (size_t s = 0; s < index.size(); ++s) {
    const IndexPartition& p = index.partition(s);
    PutBytes(out, SpecToString(p.spec));
    PutU64(out, p.contributing_records);
    std::vector<const std::pair<const HmacTag, PostingList>*> entries;
    entries.reserve(p.postings.size());
    for (const auto& e : p.postings) entries.push_back(&e);
    std::sort(entries.begin(), entries.end(),
              [](auto* a, auto* b) { return a->first < b->first; });
    PutU64(out, entries.size());
    for (const auto* e : entries) {
      out.append(reinterpret_cast<const char*>(e->first.data()),
                 e->first.size());
      PutU32(out, static_cast<uint32_t>(e->second.size()));
      for (uint64_t row : e->second) PutU64(out, row);
    }
  }
  return out;
}

absl::StatusOr<LinkIndex> DeserializeIndex(absl::string_view bytes) {
  Reader in(bytes);
  auto corrupt = [](absl::string_view what) {
    return absl::DataLossError(absl::StrCat("corrupt index snapshot: ", what));
  };
  absl::string_view magic;
  if (!in.Raw(sizeof(kSnapshotMagic), magic) ||
      magic != absl::string_view(kSnapshotMagic, sizeof(kSnapshotMagic))) {
    return corrupt("bad magic");
  }
  uint32_t version;
  if (!in.U32(version)) return corrupt("truncated header");
  if (version != kSnapshotVersion) {
    return absl::UnimplementedError(
        absl::StrCat("unsupported snapshot version ", version));
  }
  absl::string_view key_id;
  uint32_t n_parts;
  if (!in.Bytes(key_id) || !in.U32(n_parts)) return corrupt("truncated header");
  std::vector<IndexPartition> parts;
  for (uint32_t s = 0; s < n_parts; ++s) {
    absl::string_view spec_text;
    IndexPartition p;
    uint64_t n_entries;
    if (!in.Bytes(spec_text) || !in.U64(p.contributing_records) ||
        !in.U64(n_entries)) {
      return corrupt("truncated partition header");
    }
    absl::StatusOr<LinkageKeySpec> spec = ParseSpec(spec_text);
    if (!spec.ok()) return corrupt(spec.status().message());
    p.spec = *std::move(spec);
    p.postings.reserve(n_entries);
    for (uint64_t e = 0; e < n_entries; ++e) {
      absl::string_view tag_bytes;
      uint32_t n_rows;
      if (!in.Raw(sizeof(HmacTag), tag_bytes) || !in.U32(n_rows) ||
          n_rows == 0) {
        return corrupt("truncated entry");
      }
      HmacTag tag;
      std::memcpy(tag.data(), tag_bytes.data(), tag.size());
      PostingList rows;
      for (uint32_t r = 0; r < n_rows; ++r) {
        uint64_t row;
        if (!in.U64(row)) return corrupt("truncated posting list");
        rows.push_back(row);
      }
      p.postings.emplace(tag, std::move(rows));
    }
    parts.push_back(std::move(p));
  }
  if (!in.done()) return corrupt("trailing bytes");
  return LinkIndex(std::string(key_id), std::move(parts));
}

absl::Status WriteIndexSnapshot(const LinkIndex& index,
                                const std::string& path) {
  return WriteStringToFile(path, SerializeIndex(index));
}

absl::StatusOr<LinkIndex> ReadIndexSnapshot(const std::string& path) {
  absl::StatusOr<std::string> bytes = ReadFileToString(path);
  if (!bytes.ok()) return bytes.status();
  return DeserializeIndex(*bytes);
}

std::string ExportIndexCsv(const LinkIndex& index) {
  std::string out =
      "# SENSITIVE: linkage tags with row ids; do not distribute\n"
      "spec,tag_hex,row_id\n";
  for (size_t s = 0; s < index.size(); ++s) {
    const IndexPartition& p = index.partition(s);
    std::vector<const std::pair<const HmacTag, PostingList>*> entries;
    for (const auto& e : p.postings) entries.push_back(&e);
    std::sort(entries.begin(), entries.end(),
              [](auto* a, auto* b) { return a->first < b->first; });
    for (const auto* e : entries) {
      std::string hex = HexEncode(e->first);
      for (uint64_t row : e->second) {
        absl::StrAppend(&out, p.spec.name, ",", hex, ",", row, "\n");
      }
    }
  }
  return out;
}

}  // namespace pprl
