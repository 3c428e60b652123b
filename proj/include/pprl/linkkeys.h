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

// HMAC linkage keys over attribute subsets and the inverted index that maps
// each tag back to the rows that produced it.

#ifndef PPRL_LINKKEYS_H_
#define PPRL_LINKKEYS_H_

#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/container/inlined_vector.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "pprl/hashcore.h"
#include "pprl/model.h"

namespace pprl {

// The eleven identifiers of the evaluation, highest-precision first. This
// order is the first-unique hierarchy.
std::vector<LinkageKeySpec> DefaultLinkageKeySpecs();

// One `name=sel;sel` spec per line; blank lines and `#` comments skipped.
absl::StatusOr<std::vector<LinkageKeySpec>> ParseSpecText(
    absl::string_view content);
absl::StatusOr<std::vector<LinkageKeySpec>> LoadSpecFile(
    const std::string& path);

// Tag for one spec, or nullopt when the spec does not apply to the record
// (missing middle initial).
std::optional<HmacTag> DeriveTag(const PersonRecord& record,
                                 const LinkageKeySpec& spec,
                                 const HmacKey& key,
                                 KeyRole role = KeyRole::kIndex);

// One tag per applicable spec, keyed by spec name.
std::map<std::string, HmacTag> DeriveDigests(
    const PersonRecord& record, const std::vector<LinkageKeySpec>& specs,
    const HmacKey& key, KeyRole role = KeyRole::kIndex);

// Tags are uniformly distributed, so their leading bytes already make a good
// hash.
struct TagHash {
  size_t operator()(const HmacTag& tag) const {
    size_t h;
    std::memcpy(&h, tag.data(), sizeof(h));
    return h;
  }
};

using PostingList = absl::InlinedVector<uint64_t, 1>;

struct IndexPartition {
  LinkageKeySpec spec;
  absl::flat_hash_map<HmacTag, PostingList, TagHash> postings;
  // Records that produced a tag for this spec.
  uint64_t contributing_records = 0;

  friend bool operator==(const IndexPartition&,
                         const IndexPartition&) = default;
};

class LinkIndex {
 public:
  LinkIndex() = default;
  LinkIndex(std::string key_id, std::vector<IndexPartition> partitions)
      : key_id_(std::move(key_id)), partitions_(std::move(partitions)) {}

  // Identifier of the key the tags were computed with; not secret.
  const std::string& key_id() const { return key_id_; }
  size_t size() const { return partitions_.size(); }
  const IndexPartition& partition(size_t i) const { return partitions_[i]; }
  std::vector<IndexPartition>& mutable_partitions() { return partitions_; }
  // Spec index by name, or nullopt.
  std::optional<size_t> FindSpec(absl::string_view name) const;
  std::vector<LinkageKeySpec> specs() const;

  // Posting list for `tag` in partition `spec_index`, or null.
  const PostingList* Lookup(size_t spec_index, const HmacTag& tag) const {
    const auto& p = partitions_[spec_index].postings;
    auto it = p.find(tag);
    return it == p.end() ? nullptr : &it->second;
  }

  friend bool operator==(const LinkIndex&, const LinkIndex&) = default;

 private:
  std::string key_id_;
  std::vector<IndexPartition> partitions_;
};

// Builds one partition per spec. Records are sharded by range across
// `threads` workers and merged in shard order, so posting lists keep dataset
// order regardless of the thread count.
absl::StatusOr<LinkIndex> BuildIndex(const Dataset& dataset,
                                     const std::vector<LinkageKeySpec>& specs,
                                     const HmacKey& key, int threads = 0);

struct SpecUniqueness {
  std::string spec_name;
  // Tag level: distinct tags and those held by exactly one row.
  uint64_t total_tags = 0;
  uint64_t unique_tags = 0;
  double tag_percent_unique = 100.0;
  // Record level: rows whose tag no other row shares. The percentage is over
  // contributing records; the dataset-wide share is reported alongside.
  uint64_t contributing_records = 0;
  uint64_t unique_records = 0;
  double record_percent_unique = 100.0;
  double record_percent_of_dataset = 100.0;
  uint64_t duplicate_group_count = 0;
  uint64_t largest_group_size = 0;
};

std::vector<SpecUniqueness> ComputeUniqueness(const LinkIndex& index,
                                              uint64_t dataset_size);

struct PrunePolicy {
  enum class Kind { kDropPostings, kDropSpec };
  Kind kind = Kind::kDropPostings;
  // Record-level percent below which kDropSpec removes a partition.
  double threshold_percent = 0.0;

  static PrunePolicy DropPostings() { return {Kind::kDropPostings, 0.0}; }
  static PrunePolicy DropSpec(double threshold_percent) {
    return {Kind::kDropSpec, threshold_percent};
  }
};

struct PruneStats {
  // Per spec name: posting lists removed and row references they held.
  std::map<std::string, uint64_t> postings_dropped;
  std::map<std::string, uint64_t> rows_dropped;
  std::vector<std::string> specs_dropped;
};

struct PruneResult {
  LinkIndex index;
  PruneStats stats;
};

PruneResult PruneNonUnique(const LinkIndex& index, const PrunePolicy& policy);

// Binary snapshot: magic, version, key id, then per partition the spec text
// and its (tag, postings) entries sorted by tag.
absl::Status WriteIndexSnapshot(const LinkIndex& index,
                                const std::string& path);
absl::StatusOr<LinkIndex> ReadIndexSnapshot(const std::string& path);
std::string SerializeIndex(const LinkIndex& index);
absl::StatusOr<LinkIndex> DeserializeIndex(absl::string_view bytes);

// Debug export `spec,tag_hex,row_id`, prefixed by a sensitivity marker line.
std::string ExportIndexCsv(const LinkIndex& index);

}  // namespace pprl

#endif  // PPRL_LINKKEYS_H_
