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

#include "pprl/attacks.h"

#include <algorithm>
#include <chrono>
#include <span>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "pprl/parallel.h"

namespace pprl {
namespace {

std::string ToBytes(std::span<const uint8_t> bytes) {
  return std::string(reinterpret_cast<const char*>(bytes.data()),
                     bytes.size());
}

std::string HexOf(absl::string_view bytes) {
  return HexEncode(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()));
}

double MillisSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

std::string Sha256Encoder::Encode(absl::string_view name) const {
  return ToBytes(Sha256(name));
}

std::string HmacEncoder::Encode(absl::string_view name) const {
  return ToBytes(ComputeHmac(key_, name));
}

std::string HmacEncoder::Describe() const {
  return absl::StrCat("hmac-sha256(key_id=", key_.key_id(), ")");
}

std::string EncodeBucketId(uint32_t bucket) {
  std::string out(4, '\0');
  for (int i = 0; i < 4; ++i) out[i] = static_cast<char>(bucket >> (24 - 8 * i));
  return out;
}

std::string TruncatedHmacBucketEncoder::Encode(absl::string_view name) const {
  // n_buckets >= 2 is checked by the caller; fall back to bucket 0.
  absl::StatusOr<uint32_t> b = TruncatedHmacBucket(name, key_, n_buckets_);
  return EncodeBucketId(b.ok() ? *b : 0);
}

std::string TruncatedHmacBucketEncoder::Describe() const {
  return absl::StrCat("truncated-hmac(key_id=", key_.key_id(),
                      ",buckets=", n_buckets_, ")");
}

absl::string_view AttackKindName(AttackKind kind) {
  switch (kind) {
    case AttackKind::kDictionary:
      return "dictionary";
    case AttackKind::kFrequency:
      return "frequency";
    case AttackKind::kBucketReversal:
      return "bucket_reversal";
    case AttackKind::kLinkageKeyProbe:
      return "linkage_key_probe";
  }
  return "unknown";
}

AttackReport DictionaryAttack(const std::vector<std::string>& targets,
                              const std::vector<std::string>& dictionary,
                              const NameEncoder& encoder, int threads) {
  const auto start = std::chrono::steady_clock::now();
  AttackReport report;
  report.kind = AttackKind::kDictionary;
  // Target -> position of its first occurrence.
  absl::flat_hash_map<std::string, size_t> target_pos;
  std::vector<std::string> distinct;
  for (const std::string& t : targets) {
    if (target_pos.emplace(t, distinct.size()).second) distinct.push_back(t);
  }
  report.attempted = distinct.size();

  const int shards = ShardCount(dictionary.size(), threads);
  // Per shard: (target position, dictionary index) hits.
  std::vector<std::vector<std::pair<size_t, size_t>>> hits(shards);
  ParallelFor(dictionary.size(), threads,
              [&](int shard, size_t begin, size_t end) {
                for (size_t i = begin; i < end; ++i) {
                  auto it = target_pos.find(encoder.Encode(dictionary[i]));
                  if (it != target_pos.end()) {
                    hits[shard].push_back({it->second, i});
                  }
                }
              });
  report.encodings = dictionary.size();

  std::vector<std::vector<std::string>> found(distinct.size());
  for (const auto& shard_hits : hits) {
    for (const auto& [pos, i] : shard_hits) {
      if (std::find(found[pos].begin(), found[pos].end(), dictionary[i]) ==
          found[pos].end()) {
        found[pos].push_back(dictionary[i]);
      }
    }
  }
  for (size_t pos = 0; pos < distinct.size(); ++pos) {
    if (found[pos].empty()) continue;
    report.recoveries.push_back({distinct[pos], std::move(found[pos])});
  }
  report.recovered = report.recoveries.size();
  report.wall_ms = MillisSince(start);
  return report;
}

bool VerifyRecoveries(const AttackReport& report, const NameEncoder& encoder) {
  if (report.recovered > report.attempted) return false;
  for (const Recovery& r : report.recoveries) {
    for (const std::string& p : r.plaintexts) {
      if (encoder.Encode(p) != r.target) return false;
    }
  }
  return true;
}

FrequencyAttackResult FrequencyAttack(const std::vector<std::string>& tags,
                                      const FrequencyTable& public_freq,
                                      size_t top_k) {
  const auto start = std::chrono::steady_clock::now();
  absl::flat_hash_map<std::string, uint64_t> counts;
  for (const std::string& t : tags) ++counts[t];
  std::vector<std::pair<std::string, uint64_t>> ranked(counts.begin(),
                                                       counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<size_t> names = public_freq.RankOrder();

  FrequencyAttackResult result;
  const size_t n = std::min({top_k, ranked.size(), names.size()});
  for (size_t r = 0; r < n; ++r) {
    RankAlignment a;
    a.rank = static_cast<uint32_t>(r + 1);
    a.tag = ranked[r].first;
    a.observed_count = ranked[r].second;
    a.guessed_name = public_freq.value(names[r]);
    a.public_count = public_freq.count(names[r]);
    result.report.recoveries.push_back({a.tag, {a.guessed_name}});
    result.alignment.push_back(std::move(a));
  }
  result.report.kind = AttackKind::kFrequency;
  result.report.attempted = n;
  // Unverified guesses; AlignmentAccuracy scores them.
  result.report.recovered = n;
  result.report.wall_ms = MillisSince(start);
  return result;
}

double AlignmentAccuracy(const std::vector<RankAlignment>& alignment,
                         const NameEncoder& encoder, size_t top_k) {
  const size_t n = std::min(top_k, alignment.size());
  if (n == 0) return 0.0;
  size_t correct = 0;
  for (size_t r = 0; r < n; ++r) {
    if (encoder.Encode(alignment[r].guessed_name) == alignment[r].tag) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

absl::StatusOr<ChainResult> BucketReversalChain(
    const std::vector<uint32_t>& observed_buckets,
    const std::vector<std::string>& true_names,
    const std::vector<size_t>& seed_rows, const BucketTable& table) {
  if (observed_buckets.size() != true_names.size()) {
    return absl::InvalidArgumentError(
        "observed buckets and names differ in length");
  }
  const auto start = std::chrono::steady_clock::now();
  ChainResult result;
  result.report.kind = AttackKind::kBucketReversal;
  result.report.attempted = seed_rows.size();

  // Records per name and per bucket, for scoring.
  absl::flat_hash_map<std::string, uint64_t> per_name;
  std::vector<uint64_t> per_bucket(table.n_buckets, 0);
  for (size_t i = 0; i < observed_buckets.size(); ++i) {
    if (observed_buckets[i] >= table.n_buckets) {
      return absl::InvalidArgumentError(
          absl::StrCat("record ", i, " has bucket ", observed_buckets[i],
                       " outside the table"));
    }
    ++per_name[true_names[i]];
    ++per_bucket[observed_buckets[i]];
  }
  const std::vector<std::vector<std::string>> members = table.Members();

  absl::flat_hash_set<std::pair<std::string, uint32_t>> pairs;
  absl::flat_hash_set<std::string> pinned_names;
  absl::flat_hash_set<uint32_t> touched;
  ChainStep step;
  for (size_t row : seed_rows) {
    if (row >= observed_buckets.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("seed row ", row, " out of range"));
    }
    const std::string& name = true_names[row];
    const uint32_t bucket = observed_buckets[row];
    if (pairs.insert({name, bucket}).second) {
      result.report.recoveries.push_back(
          {EncodeBucketId(bucket), members[bucket]});
    }
    if (pinned_names.insert(name).second) {
      step.records_identified += per_name[name];
    }
    if (touched.insert(bucket).second) {
      step.records_narrowed += per_bucket[bucket];
    }
    ++step.seeds;
    step.pairs_confirmed = pairs.size();
    step.buckets_touched = touched.size();
    step.identified_fraction =
        observed_buckets.empty()
            ? 0.0
            : static_cast<double>(step.records_identified) /
                  static_cast<double>(observed_buckets.size());
    result.steps.push_back(step);
  }
  result.report.recovered = pairs.size();
  result.report.wall_ms = MillisSince(start);
  return result;
}

std::vector<ProbeGroup> LinkageKeyFrequencyProbe(const LinkIndex& index) {
  std::vector<ProbeGroup> out;
  for (size_t s = 0; s < index.size(); ++s) {
    const IndexPartition& p = index.partition(s);
    std::vector<ProbeGroup> groups;
    for (const auto& [tag, rows] : p.postings) {
      if (rows.size() < 2) continue;
      groups.push_back({p.spec.name, tag, {rows.begin(), rows.end()}});
    }
    std::sort(groups.begin(), groups.end(),
              [](const ProbeGroup& a, const ProbeGroup& b) {
                return a.tag < b.tag;
              });
    for (ProbeGroup& g : groups) out.push_back(std::move(g));
  }
  return out;
}

std::vector<std::string> ComposeDictionary(
    const std::vector<std::string>& surnames,
    const std::vector<std::string>& given_names, size_t size) {
  std::vector<std::string> out;
  absl::flat_hash_set<std::string> seen;
  auto add = [&](std::string s) {
    if (out.size() < size && seen.insert(s).second) out.push_back(std::move(s));
  };
  for (const std::string& s : surnames) add(s);
  for (const std::string& g : given_names) add(g);
  for (size_t i = 0; out.size() < size && i < given_names.size(); ++i) {
    for (size_t j = 0; out.size() < size && j < surnames.size(); ++j) {
      add(absl::StrCat(given_names[i], " ", surnames[j]));
    }
  }
  return out;
}

std::string AttackReportCsv(const AttackReport& report, bool redact) {
  std::string out = "kind,target_hex,plaintext\n";
  for (const Recovery& r : report.recoveries) {
    for (const std::string& p : r.plaintexts) {
      absl::StrAppend(&out, AttackKindName(report.kind), ",", HexOf(r.target),
                      ",", redact ? absl::StrCat("sha256:", Sha256Hex(p)) : p,
                      "\n");
    }
  }
  return out;
}

std::string AttackSummary(const AttackReport& report) {
  return absl::StrFormat(
      "%s attack: %d of %d targets recovered, %d encodings, %.1f ms",
      AttackKindName(report.kind), report.recovered, report.attempted,
      report.encodings, report.wall_ms);
}

}  // namespace pprl
