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

// Synthetic population generator and the distortion suite used to build
// duplicate datasets for linkage evaluation.

#ifndef PPRL_SYNTHGEN_H_
#define PPRL_SYNTHGEN_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include "absl/strings/string_view.h"
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "pprl/model.h"

namespace pprl {

// Joint (year of birth, sex) distribution of the population.
class DemographicTable {
 public:
  struct Cell {
    int yob;
    Sex sex;
    uint64_t count;
  };

  static absl::StatusOr<DemographicTable> Create(std::vector<Cell> cells);

  const std::vector<Cell>& cells() const { return cells_; }
  uint64_t total() const { return total_; }
  const Cell& Sample(std::mt19937_64& rng) const;

 private:
  std::vector<Cell> cells_;
  std::vector<uint64_t> cumulative_;
  uint64_t total_ = 0;
};

// CSV `yob,sex,count` with header.
absl::StatusOr<DemographicTable> ParseDemographicTable(absl::string_view content);
absl::StatusOr<DemographicTable> LoadDemographicTable(const std::string& path);

struct GeneratorConfig {
  uint64_t population_size = 0;
  uint64_t seed = 0;
  FrequencyTable last_name_table;
  FirstNameTables first_name_tables;
  FrequencyTable meshblock_table;
  // Optional joint YoB/sex distribution. Without it YoB is uniform over
  // yob_range and sex is a fair coin.
  std::optional<DemographicTable> demographics;
  std::pair<int, int> yob_range = {kDefaultYobMin, kDefaultYobMax};
  int middle_name_yob_offset = 20;
  // Share of records that carry a middle initial.
  double middle_initial_rate = 0.8;
  int sa3_digits = kDefaultSa3Digits;

  absl::Status Validate() const;
  RecordConstraints constraints() const {
    return {yob_range.first, yob_range.second, sa3_digits};
  }
};

// Reads a key=value generator config. Table paths are resolved relative to
// the config file's directory. Recognized keys: population_size, seed,
// surnames, first_names, meshblocks, demographics, yob_min, yob_max,
// middle_name_yob_offset, middle_initial_rate, sa3_digits.
absl::StatusOr<GeneratorConfig> LoadGeneratorConfig(const std::string& path);

// Builds the population. Row ids run 1..population_size.
absl::StatusOr<Dataset> Generate(const GeneratorConfig& config);

enum class DistortionKind {
  kChangeGender,
  kChangeMiddleInitial,
  kChangeYob,
  kFirstLastTranspose,
  kMeshblockChange,
  kRemoveAddMiddleInitial,
  kLastName2LetterTranspose,
  kFirstName2LetterTranspose,
  kExact,
};

// Labels follow the evaluation table: changeGender, changeInitial,
// changeYOB, firstLastTranspose, meshblockChange, removeAddInitial,
// lastName2LetterTranspose, firstName2LetterTranspose, exact.
absl::string_view DistortionName(DistortionKind kind);
absl::StatusOr<DistortionKind> ParseDistortionKind(absl::string_view name);
std::vector<DistortionKind> AllDistortionKinds();

struct DistortionSpec {
  DistortionKind kind = DistortionKind::kExact;
  double probability = 1.0;
};

// Inputs some distortions need beyond the record itself.
struct DistortionContext {
  // Required by kMeshblockChange.
  const FrequencyTable* meshblock_table = nullptr;
  int yob_min = kDefaultYobMin;
  int yob_max = kDefaultYobMax;
  int sa3_digits = kDefaultSa3Digits;
};

struct DistortResult {
  Dataset dataset;
  // Records the distortion changed.
  uint64_t applied = 0;
  // Records selected for distortion that could not be changed, e.g. names
  // too short for an inner-letter transposition.
  uint64_t skipped = 0;
};

// Applies `spec` independently to each record. The random stream is derived
// from (seed, distortion name).
absl::StatusOr<DistortResult> Distort(const Dataset& dataset,
                                      const DistortionSpec& spec, uint64_t seed,
                                      const DistortionContext& context = {});

// Swaps one adjacent pair of distinct letters drawn uniformly from the inner
// positions 1..len-2 (never the first or last character). nullopt if the
// name is shorter than 4 or has no such pair.
std::optional<std::string> TransposeInnerLetters(absl::string_view name,
                                                 std::mt19937_64& rng);

// Reproducible permutation of the records.
Dataset Shuffle(const Dataset& dataset, uint64_t seed);

}  // namespace pprl

#endif  // PPRL_SYNTHGEN_H_
