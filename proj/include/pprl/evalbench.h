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

// Precision/recall accounting and the linking performance harness.

#ifndef PPRL_EVALBENCH_H_
#define PPRL_EVALBENCH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/container/flat_hash_set.h"
#include "absl/status/statusor.h"
#include "pprl/linker.h"
#include "pprl/synthgen.h"

namespace pprl {

struct EvalResult {
  std::string distortion;
  MatchMethod method = MatchMethod::kFirstUnique;
  uint64_t n_queries = 0;
  uint64_t true_matches = 0;
  uint64_t false_matches = 0;
  uint64_t no_matches = 0;
  // true / (true + false); 1.0 when no decision was made.
  double precision = 1.0;
  // Convention A: queries that received any decision / all queries.
  double recall_any = 0.0;
  // Convention B: true matches / all queries.
  double recall_true = 0.0;
};

// Ground truth is row-id identity between the query and the reference
// copy. A decision naming a row outside `reference_rows` is an error.
absl::StatusOr<EvalResult> Evaluate(
    const std::vector<MatchDecision>& decisions,
    const absl::flat_hash_set<uint64_t>& reference_rows,
    std::string distortion, MatchMethod method);

absl::flat_hash_set<uint64_t> RowIds(const Dataset& dataset);

inline constexpr absl::string_view kEvalCsvHeader =
    "distortion,method,precision,recall,n_queries,n_no_match,recall_true";
std::string EvalCsvRow(const EvalResult& r);

struct PerfResult {
  uint64_t n_records = 0;
  uint64_t n_specs = 0;
  uint64_t n_queries_issued = 0;
  // Best of the repetitions, end to end (generate, index, link).
  double wall_ms = 0.0;
  double generate_ms = 0.0;
  double index_ms = 0.0;
  double link_ms = 0.0;
  double qps = 0.0;
  uint64_t peak_posting_length = 0;
  int threads = 1;
};

// Runs generate -> index -> link (self-link of a shuffled copy) at n_records
// using the tables in `base` and reports the fastest of `repetitions` runs.
// Table loading is excluded from the timing.
absl::StatusOr<PerfResult> PerfBenchmark(const GeneratorConfig& base,
                                         uint64_t n_records,
                                         const std::vector<LinkageKeySpec>& specs,
                                         MatchMethod strategy, uint64_t seed,
                                         int threads = 1, int repetitions = 3);

inline constexpr absl::string_view kPerfCsvHeader =
    "n_records,n_queries,wall_ms,qps,threads";
std::string PerfCsvRow(const PerfResult& r);

// Work comparison inside one block: the same queries linked by the
// deterministic index and by the bi-gram cross-comparison.
struct ComparisonGap {
  uint64_t block_size = 0;
  uint64_t n_queries = 0;
  uint64_t deterministic_queries = 0;
  uint64_t bigram_comparisons = 0;
  double ratio = 0.0;
};

absl::StatusOr<ComparisonGap> MeasureComparisonGap(
    const Dataset& block_members, const Dataset& queries,
    const std::vector<LinkageKeySpec>& specs, const HmacKey& key);

}  // namespace pprl

#endif  // PPRL_EVALBENCH_H_
