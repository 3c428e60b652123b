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

#include "pprl/synthgen.h"

#include <algorithm>
#include <filesystem>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "pprl/rng.h"

namespace pprl {

absl::StatusOr<DemographicTable> DemographicTable::Create(
    std::vector<Cell> cells) {
  DemographicTable t;
  for (const Cell& c : cells) {
    t.total_ += c.count;
    t.cumulative_.push_back(t.total_);
  }
  if (t.total_ == 0) {
    return absl::InvalidArgumentError("demographic table has zero mass");
  }
  t.cells_ = std::move(cells);
  return t;
}

const DemographicTable::Cell& DemographicTable::Sample(
    std::mt19937_64& rng) const {
  std::uniform_int_distribution<uint64_t> dist(0, total_ - 1);
  uint64_t u = dist(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return cells_[static_cast<size_t>(it - cumulative_.begin())];
}

absl::StatusOr<DemographicTable> ParseDemographicTable(
    absl::string_view content) {
  std::vector<DemographicTable::Cell> cells;
  bool header_seen = false;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(content, '\n')) {
    ++line_no;
    line = absl::StripAsciiWhitespace(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "yob,sex,count") {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": expected header yob,sex,count"));
      }
      header_seen = true;
      continue;
    }
    std::vector<absl::string_view> cols = absl::StrSplit(line, ',');
    DemographicTable::Cell cell{};
    if (cols.size() != 3 || !absl::SimpleAtoi(cols[0], &cell.yob) ||
        !absl::SimpleAtoi(cols[2], &cell.count)) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": malformed demographic row"));
    }
    absl::StatusOr<Sex> sex = ParseSex(cols[1]);
    if (!sex.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", sex.status().message()));
    }
    cell.sex = *sex;
    cells.push_back(cell);
  }
  if (!header_seen) return absl::InvalidArgumentError("missing header");
  return DemographicTable::Create(std::move(cells));
}

absl::StatusOr<DemographicTable> LoadDemographicTable(const std::string& path) {
  absl::StatusOr<std::string> content = ReadFileToString(path);
  if (!content.ok()) return content.status();
  absl::StatusOr<DemographicTable> t = ParseDemographicTable(*content);
  if (!t.ok()) {
    return absl::Status(t.status().code(),
                        absl::StrCat(path, ": ", t.status().message()));
  }
  return t;
}

absl::Status GeneratorConfig::Validate() const {
  if (last_name_table.total() == 0) {
    return absl::FailedPreconditionError("last-name table is empty");
  }
  if (first_name_tables.empty()) {
    return absl::FailedPreconditionError("first-name tables are empty");
  }
  if (meshblock_table.total() == 0) {
    return absl::FailedPreconditionError("meshblock table is empty");
  }
  if (yob_range.first >= yob_range.second) {
    return absl::FailedPreconditionError("yob range is degenerate");
  }
  if (middle_initial_rate < 0.0 || middle_initial_rate > 1.0) {
    return absl::FailedPreconditionError("middle_initial_rate outside [0,1]");
  }
  if (sa3_digits < 1) return absl::FailedPreconditionError("sa3_digits < 1");
  if (demographics.has_value()) {
    bool any = std::any_of(
        demographics->cells().begin(), demographics->cells().end(),
        [&](const DemographicTable::Cell& c) {
          return c.count > 0 && c.yob >= yob_range.first &&
                 c.yob <= yob_range.second;
        });
    if (!any) {
      return absl::FailedPreconditionError(
          "demographic table has no mass inside the yob range");
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<GeneratorConfig> LoadGeneratorConfig(const std::string& path) {
  absl::StatusOr<std::string> content = ReadFileToString(path);
  if (!content.ok()) return content.status();
  absl::StatusOr<std::map<std::string, std::string>> kv =
      ParseKeyValueText(*content);
  if (!kv.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", kv.status().message()));
  }
  const std::filesystem::path base =
      std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return (fp.is_absolute() ? fp : base / fp).string();
  };
  GeneratorConfig config;
  bool have_surnames = false, have_first = false, have_mesh = false;
  for (const auto& [key, value] : *kv) {
    auto bad = [&, &key = key] {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": invalid value for ", key));
    };
    if (key == "population_size") {
      if (!absl::SimpleAtoi(value, &config.population_size)) return bad();
    } else if (key == "seed") {
      if (!absl::SimpleAtoi(value, &config.seed)) return bad();
    } else if (key == "yob_min") {
      if (!absl::SimpleAtoi(value, &config.yob_range.first)) return bad();
    } else if (key == "yob_max") {
      if (!absl::SimpleAtoi(value, &config.yob_range.second)) return bad();
    } else if (key == "middle_name_yob_offset") {
      if (!absl::SimpleAtoi(value, &config.middle_name_yob_offset)) {
        return bad();
      }
    } else if (key == "middle_initial_rate") {
      if (!absl::SimpleAtod(value, &config.middle_initial_rate)) return bad();
    } else if (key == "sa3_digits") {
      if (!absl::SimpleAtoi(value, &config.sa3_digits)) return bad();
    } else if (key == "surnames") {
      absl::StatusOr<FrequencyTable> t = LoadFrequencyTable(resolve(value));
      if (!t.ok()) return t.status();
      config.last_name_table = *std::move(t);
      have_surnames = true;
    } else if (key == "first_names") {
      absl::StatusOr<FirstNameTables> t = LoadFirstNameTables(resolve(value));
      if (!t.ok()) return t.status();
      config.first_name_tables = *std::move(t);
      have_first = true;
    } else if (key == "meshblocks") {
      absl::StatusOr<FrequencyTable> t = LoadFrequencyTable(resolve(value));
      if (!t.ok()) return t.status();
      config.meshblock_table = *std::move(t);
      have_mesh = true;
    } else if (key == "demographics") {
      absl::StatusOr<DemographicTable> t = LoadDemographicTable(resolve(value));
      if (!t.ok()) return t.status();
      config.demographics = *std::move(t);
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": unknown key '", key, "'"));
    }
  }
  if (!have_surnames || !have_first || !have_mesh) {
    return absl::InvalidArgumentError(absl::StrCat(
        path, ": surnames, first_names and meshblocks are all required"));
  }
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  return config;
}

absl::StatusOr<Dataset> Generate(const GeneratorConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  Dataset dataset;
  dataset.provenance = "original";
  dataset.records.reserve(config.population_size);
  std::mt19937_64 rng = MakeRng(config.seed, "generate");
  std::uniform_int_distribution<int> yob_dist(config.yob_range.first,
                                              config.yob_range.second);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution has_middle(config.middle_initial_rate);
  for (uint64_t i = 0; i < config.population_size; ++i) {
    PersonRecord r;
    r.row_id = i + 1;
    if (config.demographics.has_value()) {
      // Rejection keeps the conditional distribution inside the yob range.
      const DemographicTable::Cell* cell;
      do {
        cell = &config.demographics->Sample(rng);
      } while (cell->yob < config.yob_range.first ||
               cell->yob > config.yob_range.second);
      r.yob = cell->yob;
      r.sex = cell->sex;
    } else {
      r.yob = yob_dist(rng);
      r.sex = coin(rng) ? Sex::kMale : Sex::kFemale;
    }
    const FrequencyTable* first =
        config.first_name_tables.Lookup(r.yob, r.sex);
    if (first == nullptr) {
      return absl::FailedPreconditionError(absl::StrCat(
          "no first-name table for sex ", std::string(1, SexCode(r.sex))));
    }
    r.first_name = first->Sample(rng);
    if (has_middle(rng)) {
      const FrequencyTable* middle = config.first_name_tables.Lookup(
          r.yob - config.middle_name_yob_offset, r.sex);
      const std::string& name = middle->Sample(rng);
      if (absl::ascii_islower(static_cast<unsigned char>(name[0]))) {
        r.middle_initial = name[0];
      }
    }
    r.last_name = config.last_name_table.Sample(rng);
    r.meshblock = config.meshblock_table.Sample(rng);
    r.sa3 = DeriveSa3(r.meshblock, config.sa3_digits);
    dataset.records.push_back(std::move(r));
  }
  return dataset;
}

absl::string_view DistortionName(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::kChangeGender:
      return "changeGender";
    case DistortionKind::kChangeMiddleInitial:
      return "changeInitial";
    case DistortionKind::kChangeYob:
      return "changeYOB";
    case DistortionKind::kFirstLastTranspose:
      return "firstLastTranspose";
    case DistortionKind::kMeshblockChange:
      return "meshblockChange";
    case DistortionKind::kRemoveAddMiddleInitial:
      return "removeAddInitial";
    case DistortionKind::kLastName2LetterTranspose:
      return "lastName2LetterTranspose";
    case DistortionKind::kFirstName2LetterTranspose:
      return "firstName2LetterTranspose";
    case DistortionKind::kExact:
      return "exact";
  }
  return "unknown";
}

std::vector<DistortionKind> AllDistortionKinds() {
  return {DistortionKind::kChangeMiddleInitial,
          DistortionKind::kFirstLastTranspose,
          DistortionKind::kExact,
          DistortionKind::kLastName2LetterTranspose,
          DistortionKind::kRemoveAddMiddleInitial,
          DistortionKind::kFirstName2LetterTranspose,
          DistortionKind::kMeshblockChange,
          DistortionKind::kChangeGender,
          DistortionKind::kChangeYob};
}

absl::StatusOr<DistortionKind> ParseDistortionKind(absl::string_view name) {
  for (DistortionKind k : AllDistortionKinds()) {
    if (absl::EqualsIgnoreCase(DistortionName(k), name)) return k;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown distortion '", name, "'"));
}

std::optional<std::string> TransposeInnerLetters(absl::string_view name,
                                                 std::mt19937_64& rng) {
  if (name.size() < 4) return std::nullopt;
  std::vector<size_t> candidates;
  for (size_t i = 1; i + 2 < name.size(); ++i) {
    if (name[i] != name[i + 1]) candidates.push_back(i);
  }
  if (candidates.empty()) return std::nullopt;
  std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
  size_t i = candidates[pick(rng)];
  std::string out(name);
  std::swap(out[i], out[i + 1]);
  return out;
}

namespace {

char RandomLetterOtherThan(std::mt19937_64& rng, std::optional<char> avoid) {
  std::uniform_int_distribution<int> letter(0, 25);
  char c;
  do {
    c = static_cast<char>('a' + letter(rng));
  } while (avoid.has_value() && c == *avoid);
  return c;
}

// Returns true if the record changed.
bool ApplyDistortion(PersonRecord& r, DistortionKind kind,
                     const DistortionContext& ctx, std::mt19937_64& rng) {
  switch (kind) {
    case DistortionKind::kExact:
      return false;
    case DistortionKind::kChangeGender:
      r.sex = r.sex == Sex::kMale ? Sex::kFemale : Sex::kMale;
      return true;
    case DistortionKind::kChangeMiddleInitial:
      r.middle_initial = RandomLetterOtherThan(rng, r.middle_initial);
      return true;
    case DistortionKind::kRemoveAddMiddleInitial:
      if (r.middle_initial.has_value()) {
        r.middle_initial.reset();
      } else {
        r.middle_initial = RandomLetterOtherThan(rng, std::nullopt);
      }
      return true;
    case DistortionKind::kChangeYob: {
      std::uniform_int_distribution<int> year(ctx.yob_min, ctx.yob_max);
      int y;
      do {
        y = year(rng);
      } while (y == r.yob);
      r.yob = y;
      return true;
    }
    case DistortionKind::kFirstLastTranspose:
      if (r.first_name == r.last_name) return false;
      std::swap(r.first_name, r.last_name);
      return true;
    case DistortionKind::kMeshblockChange: {
      const FrequencyTable& table = *ctx.meshblock_table;
      if (table.size() < 2) return false;
      std::string mb;
      do {
        mb = table.Sample(rng);
      } while (mb == r.meshblock);
      r.meshblock = std::move(mb);
      r.sa3 = DeriveSa3(r.meshblock, ctx.sa3_digits);
      return true;
    }
    case DistortionKind::kLastName2LetterTranspose:
    case DistortionKind::kFirstName2LetterTranspose: {
      std::string& name = kind == DistortionKind::kLastName2LetterTranspose
                              ? r.last_name
                              : r.first_name;
      std::optional<std::string> t = TransposeInnerLetters(name, rng);
      if (!t.has_value()) return false;
      name = *std::move(t);
      return true;
    }
  }
  return false;
}

}  // namespace

absl::StatusOr<DistortResult> Distort(const Dataset& dataset,
                                      const DistortionSpec& spec, uint64_t seed,
                                      const DistortionContext& context) {
  if (spec.probability < 0.0 || spec.probability > 1.0) {
    return absl::InvalidArgumentError("distortion probability outside [0,1]");
  }
  if (spec.kind == DistortionKind::kMeshblockChange &&
      (context.meshblock_table == nullptr ||
       context.meshblock_table->total() == 0)) {
    return absl::FailedPreconditionError(
        "meshblockChange needs the meshblock table");
  }
  if (context.yob_min >= context.yob_max) {
    return absl::InvalidArgumentError("yob range is degenerate");
  }
  DistortResult result;
  result.dataset.records = dataset.records;
  result.dataset.provenance =
      absl::StrCat("distorted:", DistortionName(spec.kind));
  std::mt19937_64 rng =
      MakeRng(seed, absl::StrCat("distort:", DistortionName(spec.kind)));
  std::bernoulli_distribution select(spec.probability);
  for (PersonRecord& r : result.dataset.records) {
    if (spec.probability < 1.0 && !select(rng)) continue;
    if (spec.kind == DistortionKind::kExact) continue;
    if (ApplyDistortion(r, spec.kind, context, rng)) {
      ++result.applied;
    } else {
      ++result.skipped;
    }
  }
  return result;
}

Dataset Shuffle(const Dataset& dataset, uint64_t seed) {
  Dataset out = dataset;
  std::mt19937_64 rng = MakeRng(seed, "shuffle");
  std::shuffle(out.records.begin(), out.records.end(), rng);
  return out;
}

}  // namespace pprl
