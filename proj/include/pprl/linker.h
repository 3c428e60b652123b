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

// Linking strategies: hierarchical first-unique and voting over a LinkIndex,
// plus a blocked matcher that compares HMAC-encoded bi-grams.

#ifndef PPRL_LINKER_H_
#define PPRL_LINKER_H_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "pprl/hashcore.h"
#include "pprl/linkkeys.h"
#include "pprl/model.h"

namespace pprl {

enum class MatchMethod { kFirstUnique, kVoting, kBigramDice, kBigramQgram };

absl::string_view MatchMethodName(MatchMethod method);
absl::StatusOr<MatchMethod> ParseMatchMethod(absl::string_view name);

struct SpecEvidence {
  enum class Outcome { kNotApplicable, kNoMatch, kUnique, kMultiple };
  uint32_t spec_index = 0;
  Outcome outcome = Outcome::kNoMatch;
  // Posting-list length.
  uint32_t count = 0;
};

struct MatchDecision {
  uint64_t query_row_id = 0;
  std::optional<uint64_t> matched_row_id;
  MatchMethod method = MatchMethod::kFirstUnique;
  // Deterministic strategies: one entry per spec consulted, in order.
  std::vector<SpecEvidence> evidence;
  // Votes for the winner (voting) or similarity (bi-gram matchers).
  double score = 0.0;
  // Rows sharing the top vote count; > 1 means a random tie-break happened.
  uint32_t tied = 0;
  // Index lookups performed.
  uint64_t queries_issued = 0;
  // Pairwise similarity evaluations performed.
  uint64_t comparisons = 0;
};

// Compact evidence text, e.g. `N;M2;U` or `score=0.9167`.
std::string EvidenceString(const MatchDecision& decision);

class DeterministicLinker {
 public:
  // The index's partition order is the hierarchy. `key` must be the key the
  // index was built with.
  DeterministicLinker(const LinkIndex& index, const HmacKey& key)
      : index_(index), key_(key) {}

  // Walks the hierarchy and stops at the first spec whose posting list has
  // exactly one row.
  MatchDecision LinkFirstUnique(const PersonRecord& query) const;

  // Counts every row returned by any spec; the most frequent wins and ties
  // are broken uniformly at random from a stream derived from
  // (tiebreak_seed, query row id).
  MatchDecision LinkVoting(const PersonRecord& query,
                           uint64_t tiebreak_seed) const;

  // Links every query in parallel; decisions come back in query order.
  std::vector<MatchDecision> LinkAll(const Dataset& queries, MatchMethod method,
                                     uint64_t tiebreak_seed,
                                     int threads = 0) const;

 private:
  const LinkIndex& index_;
  const HmacKey& key_;
};

struct Block {
  std::string blocking_key;
  std::vector<uint64_t> row_ids;
};

struct BlockingStrategy {
  enum class Kind { kBySa3, kByMeshblockPrefix };
  Kind kind = Kind::kBySa3;
  int prefix_len = 0;

  static BlockingStrategy BySa3() { return {Kind::kBySa3, 0}; }
  static BlockingStrategy ByMeshblockPrefix(int len) {
    return {Kind::kByMeshblockPrefix, len};
  }
};

std::string BlockingKey(const PersonRecord& record,
                        const BlockingStrategy& strategy);

// Partitions the dataset; blocks sorted by key, rows in dataset order.
std::vector<Block> BlockDataset(const Dataset& dataset,
                                const BlockingStrategy& strategy);

// 2|a ∩ b| / (|a| + |b|) over sorted, duplicate-free ranges; 0 when both are
// empty.
template <typename T>
double DiceSorted(std::span<const T> a, std::span<const T> b) {
  if (a.empty() && b.empty()) return 0.0;
  size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  return 2.0 * static_cast<double>(common) /
         static_cast<double>(a.size() + b.size());
}

// (max - Σ|count_a(g) - count_b(g)|) / max with max = |a| + |b|, over sorted
// multisets; 0 when both are empty.
template <typename T>
double QgramSorted(std::span<const T> a, std::span<const T> b) {
  const size_t max = a.size() + b.size();
  if (max == 0) return 0.0;
  // Σ|ca - cb| = |a| + |b| - 2 Σ min(ca, cb), and Σ min is the size of the
  // multiset intersection.
  size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  const size_t dist = max - 2 * common;
  return static_cast<double>(max - dist) / static_cast<double>(max);
}

double DiceSets(const BigramSet& a, const BigramSet& b);
double QgramSimilarity(const std::vector<BigramCode>& a,
                       const std::vector<BigramCode>& b);

struct BigramMatcherOptions {
  MatchMethod scoring = MatchMethod::kBigramDice;
  double threshold = 0.8;
  // Also score the query with first and last names swapped and keep the
  // better of the two. Doubles the work.
  bool transposed_pass = false;
  BlockingStrategy blocking = BlockingStrategy::BySa3();
};

// Each name is represented by HMAC(key, bi-gram) for its padded bi-grams,
// kept as sorted 64-bit tag prefixes. Fields are scored independently and
// combined by unweighted mean.
class BigramMatcher {
 public:
  static absl::StatusOr<BigramMatcher> Create(const Dataset& reference,
                                              const HmacKey& key,
                                              const BigramMatcherOptions& options);

  const std::vector<Block>& blocks() const { return blocks_; }
  const BigramMatcherOptions& options() const { return options_; }

  // Compares the query with every member of its block (by blocking key). No
  // block means no match with zero comparisons.
  MatchDecision Link(const PersonRecord& query) const;

  std::vector<MatchDecision> LinkAll(const Dataset& queries,
                                     int threads = 0) const;

 private:
  struct EncodedName {
    std::vector<uint64_t> set;       // unique tags
    std::vector<uint64_t> multiset;  // with multiplicity
  };
  struct Member {
    uint64_t row_id;
    EncodedName first;
    EncodedName last;
  };

  BigramMatcher(const HmacKey& key, BigramMatcherOptions options)
      : key_(&key), options_(options) {}

  EncodedName Encode(absl::string_view name) const;
  double FieldScore(const EncodedName& a, const EncodedName& b) const;

  const HmacKey* key_;
  BigramMatcherOptions options_;
  // HMAC tag prefix for every possible bi-gram code.
  std::vector<uint64_t> code_tags_;
  std::vector<Block> blocks_;
  absl::flat_hash_map<std::string, size_t> block_lookup_;
  std::vector<std::vector<Member>> members_;
};

// Decisions CSV rows: `query_row_id,matched_row_id,method,score_or_evidence`.
std::string DecisionsCsv(const std::vector<MatchDecision>& decisions);

}  // namespace pprl

#endif  // PPRL_LINKER_H_
