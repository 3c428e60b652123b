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
#include <functional>
#include <queue>

#include "absl/strings/str_cat.h"

namespace pprl {

absl::StatusOr<uint32_t> TruncatedHmacBucket(absl::string_view name,
                                             const HmacKey& key,
                                             uint32_t n_buckets) {
  if (n_buckets < 2) {
    return absl::InvalidArgumentError("need at least 2 buckets");
  }
  return static_cast<uint32_t>(LoadBigEndian64(ComputeHmac(key, name)) %
                               n_buckets);
}

std::optional<uint32_t> BucketTable::Lookup(absl::string_view name) const {
  auto it = mapping.find(name);
  if (it == mapping.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<std::string>> BucketTable::Members() const {
  std::vector<std::vector<std::string>> out(n_buckets);
  for (const auto& [name, bucket] : mapping) out[bucket].push_back(name);
  for (auto& names : out) std::sort(names.begin(), names.end());
  return out;
}

absl::StatusOr<BucketTable> BuildTruncatedHmacTable(const FrequencyTable& freq,
                                                    const HmacKey& key,
                                                    uint32_t n_buckets) {
  if (n_buckets < 2) {
    return absl::InvalidArgumentError("need at least 2 buckets");
  }
  BucketTable table;
  table.construction = BucketTable::Construction::kTruncatedHmac;
  table.n_buckets = n_buckets;
  table.mapping.reserve(freq.size());
  for (size_t i = 0; i < freq.size(); ++i) {
    table.mapping[freq.value(i)] = *TruncatedHmacBucket(freq.value(i), key,
                                                        n_buckets);
  }
  return table;
}

absl::StatusOr<SmoothedTable> BuildSmoothedTable(const FrequencyTable& freq,
                                                 uint32_t n_buckets) {
  if (n_buckets < 1 || n_buckets > freq.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "bucket count ", n_buckets, " must lie in [1, ", freq.size(), "]"));
  }
  SmoothedTable out;
  out.table.construction = BucketTable::Construction::kFrequencySmoothed;
  out.table.n_buckets = n_buckets;
  out.table.mapping.reserve(freq.size());
  out.masses.assign(n_buckets, 0);
  out.distinct_names.assign(n_buckets, 0);
  using Entry = std::pair<uint64_t, uint32_t>;  // (mass, bucket)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> lightest;
  for (uint32_t b = 0; b < n_buckets; ++b) lightest.push({0, b});
  for (size_t i : freq.RankOrder()) {
    auto [mass, bucket] = lightest.top();
    lightest.pop();
    out.table.mapping[freq.value(i)] = bucket;
    out.masses[bucket] = mass + freq.count(i);
    ++out.distinct_names[bucket];
    lightest.push({out.masses[bucket], bucket});
  }
  auto [lo, hi] = std::minmax_element(out.masses.begin(), out.masses.end());
  out.max_min_ratio = *lo == 0 ? std::numeric_limits<double>::infinity()
                               : static_cast<double>(*hi) /
                                     static_cast<double>(*lo);
  return out;
}

absl::StatusOr<BucketAnalysis> AnalyzeBuckets(const BucketTable& table,
                                              const FrequencyTable& freq,
                                              absl::string_view probe) {
  std::optional<size_t> probe_index = freq.Find(probe);
  std::optional<uint32_t> probe_bucket = table.Lookup(probe);
  if (!probe_index.has_value() || !probe_bucket.has_value()) {
    return absl::NotFoundError(
        absl::StrCat("probe '", probe, "' is not in the table"));
  }
  std::vector<BucketStat> stats(table.n_buckets);
  for (uint32_t b = 0; b < table.n_buckets; ++b) stats[b].bucket_id = b;
  for (size_t i = 0; i < freq.size(); ++i) {
    std::optional<uint32_t> b = table.Lookup(freq.value(i));
    if (!b.has_value()) continue;
    stats[*b].mass += freq.count(i);
    ++stats[*b].distinct_names;
  }
  std::sort(stats.begin(), stats.end(),
            [](const BucketStat& a, const BucketStat& b) {
              if (a.mass != b.mass) return a.mass > b.mass;
              return a.bucket_id < b.bucket_id;
            });
  BucketAnalysis analysis;
  for (uint32_t r = 0; r < stats.size(); ++r) {
    stats[r].rank = r + 1;
    if (stats[r].bucket_id == *probe_bucket) analysis.probe_rank = r + 1;
  }
  analysis.probe_bucket = *probe_bucket;
  analysis.buckets = std::move(stats);
  return analysis;
}

double MeanCandidateSetSize(const BucketTable& table) {
  if (table.mapping.empty()) return 0.0;
  std::vector<uint64_t> sizes(table.n_buckets, 0);
  for (const auto& [name, bucket] : table.mapping) ++sizes[bucket];
  // Each bucket of size s contributes s names with candidate set s.
  double sum = 0.0;
  for (uint64_t s : sizes) sum += static_cast<double>(s) * static_cast<double>(s);
  return sum / static_cast<double>(table.mapping.size());
}

absl::StatusOr<DominantMassMatch> MatchDominantMass(const FrequencyTable& freq) {
  if (freq.size() < 2) {
    return absl::InvalidArgumentError("need at least two names");
  }
  std::vector<size_t> order = freq.RankOrder();
  DominantMassMatch out;
  out.dominant_name = freq.value(order[0]);
  out.dominant_mass = freq.count(order[0]);
  for (size_t r = order.size() - 1; r >= 1; --r) {
    out.tail_mass += freq.count(order[r]);
    ++out.tail_names_needed;
    if (out.tail_mass >= out.dominant_mass) return out;
  }
  return absl::FailedPreconditionError(
      "all other names together do not reach the dominant mass");
}

std::string BucketTableCsv(const BucketTable& table) {
  std::vector<std::pair<std::string, uint32_t>> rows(table.mapping.begin(),
                                                     table.mapping.end());
  std::sort(rows.begin(), rows.end());
  std::string out =
      "# SENSITIVE: name to bucket correspondence\nname,bucket_id\n";
  for (const auto& [name, bucket] : rows) {
    absl::StrAppend(&out, name, ",", bucket, "\n");
  }
  return out;
}

std::string BucketAnalysisCsv(const BucketAnalysis& analysis) {
  std::string out = "bucket_id,mass,distinct_names,rank\n";
  for (const BucketStat& s : analysis.buckets) {
    absl::StrAppend(&out, s.bucket_id, ",", s.mass, ",", s.distinct_names, ",",
                    s.rank, "\n");
  }
  return out;
}

}  // namespace pprl
