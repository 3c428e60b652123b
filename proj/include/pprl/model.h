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

// Domain types shared by every module: person records, frequency tables,
// datasets, attribute selectors and the canonical byte encoding that linkage
// keys are computed over.

#ifndef PPRL_MODEL_H_
#define PPRL_MODEL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include "absl/strings/string_view.h"
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace pprl {

absl::StatusOr<std::string> ReadFileToString(const std::string& path);
absl::Status WriteStringToFile(const std::string& path,
                               absl::string_view content);

// Flat `key=value` text; blank lines and `#` comments ignored, duplicate
// keys rejected.
absl::StatusOr<std::map<std::string, std::string>> ParseKeyValueText(
    absl::string_view content);

enum class Sex { kMale, kFemale };

char SexCode(Sex sex);
absl::StatusOr<Sex> ParseSex(absl::string_view code);

inline constexpr int kDefaultYobMin = 1916;
inline constexpr int kDefaultYobMax = 2016;
inline constexpr int kDefaultSa3Digits = 3;

// Separates fields inside a canonical encoding. Never valid inside a value.
inline constexpr char kFieldSeparator = '\x1f';
// Stands in for an absent middle initial.
inline constexpr char kAbsentMarker = '\x1e';

struct PersonRecord {
  uint64_t row_id = 0;
  std::string first_name;
  std::optional<char> middle_initial;
  std::string last_name;
  int yob = 0;
  Sex sex = Sex::kFemale;
  std::string meshblock;
  std::string sa3;

  friend bool operator==(const PersonRecord&, const PersonRecord&) = default;
};

// Leading `digits` characters of the meshblock code (the whole code if it is
// shorter).
std::string DeriveSa3(absl::string_view meshblock, int digits = kDefaultSa3Digits);

// Lowercases and trims a name as done at ingestion.
std::string NormalizeName(absl::string_view name);

// True if `value` may appear inside a CSV field and a canonical encoding.
bool IsValidFieldValue(absl::string_view value);

struct RecordConstraints {
  int yob_min = kDefaultYobMin;
  int yob_max = kDefaultYobMax;
  int sa3_digits = kDefaultSa3Digits;
};

absl::Status ValidateRecord(const PersonRecord& record,
                            const RecordConstraints& constraints = {});

// A discrete distribution over string values.
class FrequencyTable {
 public:
  FrequencyTable() = default;

  // Rejects duplicate or invalid values. Zero counts are kept but never
  // sampled.
  static absl::StatusOr<FrequencyTable> Create(
      std::vector<std::pair<std::string, uint64_t>> entries);

  size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  uint64_t total() const { return total_; }
  const std::string& value(size_t i) const { return values_[i]; }
  uint64_t count(size_t i) const { return counts_[i]; }
  double Probability(size_t i) const;
  std::optional<size_t> Find(absl::string_view value) const;

  // Draws an entry index with probability count/total. Requires total > 0.
  size_t SampleIndex(std::mt19937_64& rng) const;
  const std::string& Sample(std::mt19937_64& rng) const {
    return values_[SampleIndex(rng)];
  }

  // Entry indices ordered by descending count, ties by value.
  std::vector<size_t> RankOrder() const;

 private:
  std::vector<std::string> values_;
  std::vector<uint64_t> counts_;
  std::vector<uint64_t> cumulative_;
  absl::flat_hash_map<std::string, size_t> lookup_;
  uint64_t total_ = 0;
};

// CSV `value,count` with header.
absl::StatusOr<FrequencyTable> LoadFrequencyTable(const std::string& path);
absl::StatusOr<FrequencyTable> ParseFrequencyTable(absl::string_view content);

// First-name distributions keyed by (year of birth, sex).
class FirstNameTables {
 public:
  absl::Status Add(int yob, Sex sex, FrequencyTable table);
  bool empty() const { return tables_.empty(); }

  // Table for the nearest available year with this sex; ties go to the
  // earlier year. Null if no table exists for the sex.
  const FrequencyTable* Lookup(int yob, Sex sex) const;

  // Every name across all tables, by descending summed count, ties by name.
  std::vector<std::string> DistinctValues() const;

 private:
  std::map<std::pair<Sex, int>, FrequencyTable> tables_;
};

// CSV `yob,sex,value,count` with header.
absl::StatusOr<FirstNameTables> LoadFirstNameTables(const std::string& path);
absl::StatusOr<FirstNameTables> ParseFirstNameTables(absl::string_view content);

struct Dataset {
  std::vector<PersonRecord> records;
  std::string provenance;
};

inline constexpr absl::string_view kDatasetHeader =
    "row_id,first_name,middle_initial,last_name,yob,sex,meshblock,sa3";

// Parses the CSV schema above. Leading `#` comment lines are skipped.
absl::StatusOr<Dataset> ParseDataset(absl::string_view content,
                                     const RecordConstraints& constraints = {});
absl::StatusOr<Dataset> LoadDataset(const std::string& path,
                                    const RecordConstraints& constraints = {});

// Header line (optionally preceded by `comment` as a `# ...` line) and one
// row per record.
std::string SerializeDataset(const Dataset& dataset,
                             absl::string_view comment = {});
absl::Status WriteDataset(const Dataset& dataset, const std::string& path,
                          absl::string_view comment = {});

enum class Field { kFirst, kMiddle, kLast, kYob, kSex, kMeshblock, kSa3 };

absl::string_view FieldName(Field field);
absl::StatusOr<Field> ParseField(absl::string_view name);

struct AttributeSelector {
  enum class Kind { kFull, kInitial, kBigram2, kTransposed };

  Kind kind = Kind::kFull;
  Field field = Field::kFirst;
  // Second field; only meaningful for kTransposed.
  Field other = Field::kLast;

  static AttributeSelector Full(Field f) { return {Kind::kFull, f, f}; }
  static AttributeSelector Initial(Field f) { return {Kind::kInitial, f, f}; }
  static AttributeSelector Bigram2(Field f) { return {Kind::kBigram2, f, f}; }
  static AttributeSelector Transposed(Field a, Field b) {
    return {Kind::kTransposed, a, b};
  }

  friend bool operator==(const AttributeSelector&,
                         const AttributeSelector&) = default;
};

// Text forms: `last`, `initial(first)`, `bi(last)`, `trans(first,last)`.
std::string SelectorToString(const AttributeSelector& selector);
absl::StatusOr<AttributeSelector> ParseSelector(absl::string_view text);

struct LinkageKeySpec {
  std::string name;
  std::vector<AttributeSelector> attributes;

  friend bool operator==(const LinkageKeySpec&,
                         const LinkageKeySpec&) = default;
};

// `name=sel;sel;...`
std::string SpecToString(const LinkageKeySpec& spec);
absl::StatusOr<LinkageKeySpec> ParseSpec(absl::string_view line);

// Validates a whole spec set: non-empty attribute lists and unique names.
absl::Status ValidateSpecs(const std::vector<LinkageKeySpec>& specs);

// Which side of a link a record is encoded for. Transposed selectors emit
// (b, a) when indexing and (a, b) when querying, so a query whose two fields
// were swapped lands on the indexed record.
enum class KeyRole { kIndex, kQuery };

// True when every selector can be evaluated; false only when a selector
// needs the middle initial and the record has none.
bool SpecApplies(const PersonRecord& record, const LinkageKeySpec& spec);

// Selected values joined by kFieldSeparator. An absent middle initial is
// encoded as kAbsentMarker.
std::string CanonicalSerialize(const PersonRecord& record,
                               const LinkageKeySpec& spec,
                               KeyRole role = KeyRole::kIndex);

}  // namespace pprl

#endif  // PPRL_MODEL_H_
