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

#include "pprl/model.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace pprl {
namespace {

// Iterates the lines of `content`, dropping a trailing '\r' from each.
std::vector<absl::string_view> SplitLines(absl::string_view content) {
  std::vector<absl::string_view> lines = absl::StrSplit(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (absl::string_view& line : lines) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  }
  return lines;
}

// Index of the first line that is not a `#` comment.
size_t SkipComments(const std::vector<absl::string_view>& lines) {
  size_t i = 0;
  while (i < lines.size() && !lines[i].empty() && lines[i][0] == '#') ++i;
  return i;
}

absl::Status LineError(size_t line_no, absl::string_view field,
                       absl::string_view what) {
  return absl::InvalidArgumentError(
      absl::StrCat("line ", line_no, ", field ", field, ": ", what));
}

absl::Status ExpectHeader(const std::vector<absl::string_view>& lines,
                          size_t index, absl::string_view expected) {
  if (index >= lines.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("missing header, expected '", expected, "'"));
  }
  if (absl::StripAsciiWhitespace(lines[index]) != expected) {
    return absl::InvalidArgumentError(absl::StrCat(
        "line ", index + 1, ": header '", lines[index], "' does not match '",
        expected, "'"));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<std::string> ReadFileToString(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

absl::Status WriteStringToFile(const std::string& path,
                               absl::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::StatusOr<std::map<std::string, std::string>> ParseKeyValueText(
    absl::string_view content) {
  std::map<std::string, std::string> out;
  std::vector<absl::string_view> lines = SplitLines(content);
  for (size_t i = 0; i < lines.size(); ++i) {
    absl::string_view line = absl::StripAsciiWhitespace(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", i + 1, ": expected key=value"));
    }
    std::string key(absl::StripAsciiWhitespace(line.substr(0, eq)));
    std::string value(absl::StripAsciiWhitespace(line.substr(eq + 1)));
    if (key.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", i + 1, ": empty key"));
    }
    if (!out.emplace(key, std::move(value)).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", i + 1, ": duplicate key '", key, "'"));
    }
  }
  return out;
}

char SexCode(Sex sex) { return sex == Sex::kMale ? 'M' : 'F'; }

absl::StatusOr<Sex> ParseSex(absl::string_view code) {
  if (code == "M" || code == "m") return Sex::kMale;
  if (code == "F" || code == "f") return Sex::kFemale;
  return absl::InvalidArgumentError(absl::StrCat("sex must be M or F, got '",
                                                 code, "'"));
}

std::string DeriveSa3(absl::string_view meshblock, int digits) {
  size_t n = std::min(meshblock.size(), static_cast<size_t>(std::max(digits, 0)));
  return std::string(meshblock.substr(0, n));
}

std::string NormalizeName(absl::string_view name) {
  return absl::AsciiStrToLower(absl::StripAsciiWhitespace(name));
}

bool IsValidFieldValue(absl::string_view value) {
  for (char c : value) {
    if (c == kFieldSeparator || c == kAbsentMarker || c == ',' || c == '\n' ||
        c == '\r') {
      return false;
    }
  }
  return true;
}

absl::Status ValidateRecord(const PersonRecord& r,
                            const RecordConstraints& constraints) {
  auto check_name = [](absl::string_view field,
                       absl::string_view value) -> absl::Status {
    if (value.empty()) {
      return absl::InvalidArgumentError(absl::StrCat(field, " is empty"));
    }
    if (!IsValidFieldValue(value)) {
      return absl::InvalidArgumentError(
          absl::StrCat(field, " contains a reserved character"));
    }
    for (char c : value) {
      if (absl::ascii_isupper(static_cast<unsigned char>(c))) {
        return absl::InvalidArgumentError(
            absl::StrCat(field, " is not lowercase"));
      }
    }
    return absl::OkStatus();
  };
  if (absl::Status s = check_name("first_name", r.first_name); !s.ok()) {
    return s;
  }
  if (absl::Status s = check_name("last_name", r.last_name); !s.ok()) return s;
  if (r.middle_initial.has_value() &&
      !absl::ascii_islower(static_cast<unsigned char>(*r.middle_initial))) {
    return absl::InvalidArgumentError(
        "middle_initial must be a single lowercase letter");
  }
  if (r.yob < constraints.yob_min || r.yob > constraints.yob_max) {
    return absl::InvalidArgumentError(absl::StrCat(
        "yob ", r.yob, " outside [", constraints.yob_min, ", ",
        constraints.yob_max, "]"));
  }
  if (r.meshblock.empty() || !IsValidFieldValue(r.meshblock)) {
    return absl::InvalidArgumentError("meshblock is empty or malformed");
  }
  if (r.sa3 != DeriveSa3(r.meshblock, constraints.sa3_digits)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sa3 '", r.sa3, "' is not derived from meshblock '",
                     r.meshblock, "'"));
  }
  return absl::OkStatus();
}

absl::StatusOr<FrequencyTable> FrequencyTable::Create(
    std::vector<std::pair<std::string, uint64_t>> entries) {
  FrequencyTable t;
  t.values_.reserve(entries.size());
  t.counts_.reserve(entries.size());
  t.cumulative_.reserve(entries.size());
  for (auto& [value, count] : entries) {
    if (value.empty() || !IsValidFieldValue(value)) {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid table value '", value, "'"));
    }
    if (!t.lookup_.emplace(value, t.values_.size()).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate table value '", value, "'"));
    }
    t.total_ += count;
    t.values_.push_back(std::move(value));
    t.counts_.push_back(count);
    t.cumulative_.push_back(t.total_);
  }
  return t;
}

double FrequencyTable::Probability(size_t i) const {
  return total_ == 0 ? 0.0
                     : static_cast<double>(counts_[i]) /
                           static_cast<double>(total_);
}

std::optional<size_t> FrequencyTable::Find(absl::string_view value) const {
  auto it = lookup_.find(value);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

size_t FrequencyTable::SampleIndex(std::mt19937_64& rng) const {
  std::uniform_int_distribution<uint64_t> dist(0, total_ - 1);
  uint64_t u = dist(rng);
  // First cumulative bound strictly above u; zero-count entries share their
  // predecessor's bound and are never selected.
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<size_t>(it - cumulative_.begin());
}

std::vector<size_t> FrequencyTable::RankOrder() const {
  std::vector<size_t> order(values_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (counts_[a] != counts_[b]) return counts_[a] > counts_[b];
    return values_[a] < values_[b];
  });
  return order;
}

absl::StatusOr<FrequencyTable> ParseFrequencyTable(absl::string_view content) {
  std::vector<absl::string_view> lines = SplitLines(content);
  size_t i = SkipComments(lines);
  if (absl::Status s = ExpectHeader(lines, i, "value,count"); !s.ok()) return s;
  std::vector<std::pair<std::string, uint64_t>> entries;
  for (++i; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<absl::string_view> cols = absl::StrSplit(lines[i], ',');
    if (cols.size() != 2) return LineError(i + 1, "row", "expected 2 columns");
    uint64_t count = 0;
    if (!absl::SimpleAtoi(cols[1], &count)) {
      return LineError(i + 1, "count", "not a non-negative integer");
    }
    entries.emplace_back(NormalizeName(cols[0]), count);
  }
  return FrequencyTable::Create(std::move(entries));
}

absl::StatusOr<FrequencyTable> LoadFrequencyTable(const std::string& path) {
  absl::StatusOr<std::string> content = ReadFileToString(path);
  if (!content.ok()) return content.status();
  absl::StatusOr<FrequencyTable> table = ParseFrequencyTable(*content);
  if (!table.ok()) {
    return absl::Status(table.status().code(),
                        absl::StrCat(path, ": ", table.status().message()));
  }
  return table;
}

absl::Status FirstNameTables::Add(int yob, Sex sex, FrequencyTable table) {
  if (!tables_.emplace(std::make_pair(sex, yob), std::move(table)).second) {
    return absl::AlreadyExistsError(
        absl::StrCat("duplicate first-name table for ", yob, "/",
                     std::string(1, SexCode(sex))));
  }
  return absl::OkStatus();
}

const FrequencyTable* FirstNameTables::Lookup(int yob, Sex sex) const {
  auto hi = tables_.lower_bound({sex, yob});
  const FrequencyTable* best = nullptr;
  int best_distance = 0;
  if (hi != tables_.end() && hi->first.first == sex) {
    best = &hi->second;
    best_distance = hi->first.second - yob;
  }
  if (hi != tables_.begin()) {
    auto lo = std::prev(hi);
    if (lo->first.first == sex) {
      int d = yob - lo->first.second;
      if (best == nullptr || d <= best_distance) best = &lo->second;
    }
  }
  return best;
}

std::vector<std::string> FirstNameTables::DistinctValues() const {
  std::map<std::string, uint64_t> totals;
  for (const auto& [key, table] : tables_) {
    for (size_t i = 0; i < table.size(); ++i) {
      totals[table.value(i)] += table.count(i);
    }
  }
  std::vector<std::pair<std::string, uint64_t>> sorted(totals.begin(),
                                                       totals.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  std::vector<std::string> out;
  out.reserve(sorted.size());
  for (auto& [name, count] : sorted) out.push_back(std::move(name));
  return out;
}

absl::StatusOr<FirstNameTables> ParseFirstNameTables(absl::string_view content) {
  std::vector<absl::string_view> lines = SplitLines(content);
  size_t i = SkipComments(lines);
  if (absl::Status s = ExpectHeader(lines, i, "yob,sex,value,count");
      !s.ok()) {
    return s;
  }
  std::map<std::pair<int, Sex>, std::vector<std::pair<std::string, uint64_t>>>
      grouped;
  for (++i; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<absl::string_view> cols = absl::StrSplit(lines[i], ',');
    if (cols.size() != 4) return LineError(i + 1, "row", "expected 4 columns");
    int yob = 0;
    if (!absl::SimpleAtoi(cols[0], &yob)) {
      return LineError(i + 1, "yob", "not an integer");
    }
    absl::StatusOr<Sex> sex = ParseSex(cols[1]);
    if (!sex.ok()) return LineError(i + 1, "sex", sex.status().message());
    uint64_t count = 0;
    if (!absl::SimpleAtoi(cols[3], &count)) {
      return LineError(i + 1, "count", "not a non-negative integer");
    }
    grouped[{yob, *sex}].emplace_back(NormalizeName(cols[2]), count);
  }
  FirstNameTables tables;
  for (auto& [key, entries] : grouped) {
    absl::StatusOr<FrequencyTable> t = FrequencyTable::Create(std::move(entries));
    if (!t.ok()) return t.status();
    if (t->total() == 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "first-name table ", key.first, " has zero total count"));
    }
    if (absl::Status s = tables.Add(key.first, key.second, *std::move(t));
        !s.ok()) {
      return s;
    }
  }
  return tables;
}

absl::StatusOr<FirstNameTables> LoadFirstNameTables(const std::string& path) {
  absl::StatusOr<std::string> content = ReadFileToString(path);
  if (!content.ok()) return content.status();
  absl::StatusOr<FirstNameTables> tables = ParseFirstNameTables(*content);
  if (!tables.ok()) {
    return absl::Status(tables.status().code(),
                        absl::StrCat(path, ": ", tables.status().message()));
  }
  return tables;
}

absl::StatusOr<Dataset> ParseDataset(absl::string_view content,
                                     const RecordConstraints& constraints) {
  std::vector<absl::string_view> lines = SplitLines(content);
  size_t i = SkipComments(lines);
  if (absl::Status s = ExpectHeader(lines, i, kDatasetHeader); !s.ok()) {
    return s;
  }
  Dataset dataset;
  absl::flat_hash_set<uint64_t> seen;
  for (++i; i < lines.size(); ++i) {
    const size_t line_no = i + 1;
    if (lines[i].empty()) continue;
    std::vector<absl::string_view> cols = absl::StrSplit(lines[i], ',');
    if (cols.size() != 8) {
      return LineError(line_no, "row",
                       absl::StrCat("expected 8 columns, got ", cols.size()));
    }
    PersonRecord r;
    if (!absl::SimpleAtoi(cols[0], &r.row_id)) {
      return LineError(line_no, "row_id", "not a non-negative integer");
    }
    if (!seen.insert(r.row_id).second) {
      return LineError(line_no, "row_id",
                       absl::StrCat("duplicate row_id ", r.row_id));
    }
    r.first_name = NormalizeName(cols[1]);
    std::string middle = NormalizeName(cols[2]);
    if (middle.size() > 1) {
      return LineError(line_no, "middle_initial", "more than one character");
    }
    if (!middle.empty()) r.middle_initial = middle[0];
    r.last_name = NormalizeName(cols[3]);
    if (!absl::SimpleAtoi(cols[4], &r.yob)) {
      return LineError(line_no, "yob", "not an integer");
    }
    absl::StatusOr<Sex> sex = ParseSex(cols[5]);
    if (!sex.ok()) return LineError(line_no, "sex", sex.status().message());
    r.sex = *sex;
    r.meshblock = std::string(absl::StripAsciiWhitespace(cols[6]));
    r.sa3 = std::string(absl::StripAsciiWhitespace(cols[7]));
    if (absl::Status s = ValidateRecord(r, constraints); !s.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", s.message()));
    }
    dataset.records.push_back(std::move(r));
  }
  return dataset;
}

absl::StatusOr<Dataset> LoadDataset(const std::string& path,
                                    const RecordConstraints& constraints) {
  absl::StatusOr<std::string> content = ReadFileToString(path);
  if (!content.ok()) return content.status();
  absl::StatusOr<Dataset> dataset = ParseDataset(*content, constraints);
  if (!dataset.ok()) {
    return absl::Status(dataset.status().code(),
                        absl::StrCat(path, ": ", dataset.status().message()));
  }
  dataset->provenance = path;
  return dataset;
}

std::string SerializeDataset(const Dataset& dataset, absl::string_view comment) {
  std::string out;
  out.reserve(64 * (dataset.records.size() + 1));
  if (!comment.empty()) absl::StrAppend(&out, "# ", comment, "\n");
  absl::StrAppend(&out, kDatasetHeader, "\n");
  for (const PersonRecord& r : dataset.records) {
    absl::StrAppend(&out, r.row_id, ",", r.first_name, ",",
                    r.middle_initial ? std::string(1, *r.middle_initial) : "",
                    ",", r.last_name, ",", r.yob, ",",
                    std::string(1, SexCode(r.sex)), ",", r.meshblock, ",",
                    r.sa3, "\n");
  }
  return out;
}

absl::Status WriteDataset(const Dataset& dataset, const std::string& path,
                          absl::string_view comment) {
  return WriteStringToFile(path, SerializeDataset(dataset, comment));
}

absl::string_view FieldName(Field field) {
  switch (field) {
    case Field::kFirst:
      return "first";
    case Field::kMiddle:
      return "middle";
    case Field::kLast:
      return "last";
    case Field::kYob:
      return "yob";
    case Field::kSex:
      return "sex";
    case Field::kMeshblock:
      return "meshblock";
    case Field::kSa3:
      return "sa3";
  }
  return "unknown";
}

absl::StatusOr<Field> ParseField(absl::string_view name) {
  for (Field f : {Field::kFirst, Field::kMiddle, Field::kLast, Field::kYob,
                  Field::kSex, Field::kMeshblock, Field::kSa3}) {
    if (FieldName(f) == name) return f;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown field '", name, "'"));
}

std::string SelectorToString(const AttributeSelector& s) {
  switch (s.kind) {
    case AttributeSelector::Kind::kFull:
      return std::string(FieldName(s.field));
    case AttributeSelector::Kind::kInitial:
      return absl::StrCat("initial(", FieldName(s.field), ")");
    case AttributeSelector::Kind::kBigram2:
      return absl::StrCat("bi(", FieldName(s.field), ")");
    case AttributeSelector::Kind::kTransposed:
      return absl::StrCat("trans(", FieldName(s.field), ",",
                          FieldName(s.other), ")");
  }
  return "?";
}

absl::StatusOr<AttributeSelector> ParseSelector(absl::string_view text) {
  text = absl::StripAsciiWhitespace(text);
  size_t open = text.find('(');
  if (open == absl::string_view::npos) {
    absl::StatusOr<Field> f = ParseField(text);
    if (!f.ok()) return f.status();
    return AttributeSelector::Full(*f);
  }
  if (text.back() != ')') {
    return absl::InvalidArgumentError(
        absl::StrCat("selector '", text, "' lacks closing parenthesis"));
  }
  absl::string_view fn = text.substr(0, open);
  absl::string_view args = text.substr(open + 1, text.size() - open - 2);
  std::vector<absl::string_view> parts =
      absl::StrSplit(args, ',', absl::SkipWhitespace());
  std::vector<Field> fields;
  for (absl::string_view p : parts) {
    absl::StatusOr<Field> f = ParseField(absl::StripAsciiWhitespace(p));
    if (!f.ok()) return f.status();
    fields.push_back(*f);
  }
  if (fn == "trans") {
    if (fields.size() != 2 || fields[0] == fields[1]) {
      return absl::InvalidArgumentError(
          "trans() takes two distinct fields");
    }
    return AttributeSelector::Transposed(fields[0], fields[1]);
  }
  if (fields.size() != 1) {
    return absl::InvalidArgumentError(
        absl::StrCat(fn, "() takes exactly one field"));
  }
  if (fn == "initial") return AttributeSelector::Initial(fields[0]);
  if (fn == "bi") return AttributeSelector::Bigram2(fields[0]);
  return absl::InvalidArgumentError(
      absl::StrCat("unknown selector function '", fn, "'"));
}

std::string SpecToString(const LinkageKeySpec& spec) {
  std::vector<std::string> parts;
  for (const AttributeSelector& s : spec.attributes) {
    parts.push_back(SelectorToString(s));
  }
  return absl::StrCat(spec.name, "=", absl::StrJoin(parts, ";"));
}

absl::StatusOr<LinkageKeySpec> ParseSpec(absl::string_view line) {
  size_t eq = line.find('=');
  if (eq == absl::string_view::npos) {
    return absl::InvalidArgumentError(
        absl::StrCat("spec '", line, "' must look like name=sel;sel"));
  }
  LinkageKeySpec spec;
  spec.name = std::string(absl::StripAsciiWhitespace(line.substr(0, eq)));
  if (spec.name.empty()) return absl::InvalidArgumentError("empty spec name");
  for (absl::string_view sel :
       absl::StrSplit(line.substr(eq + 1), ';', absl::SkipWhitespace())) {
    absl::StatusOr<AttributeSelector> s = ParseSelector(sel);
    if (!s.ok()) return s.status();
    spec.attributes.push_back(*s);
  }
  if (spec.attributes.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("spec ", spec.name, " has no attributes"));
  }
  return spec;
}

absl::Status ValidateSpecs(const std::vector<LinkageKeySpec>& specs) {
  absl::flat_hash_set<std::string> names;
  for (const LinkageKeySpec& spec : specs) {
    if (spec.attributes.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("spec ", spec.name, " has no attributes"));
    }
    if (!names.insert(spec.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate spec name ", spec.name));
    }
  }
  return absl::OkStatus();
}

namespace {

bool UsesMiddle(const AttributeSelector& s) {
  return s.field == Field::kMiddle ||
         (s.kind == AttributeSelector::Kind::kTransposed &&
          s.other == Field::kMiddle);
}

void AppendField(const PersonRecord& r, Field f, std::string& out) {
  switch (f) {
    case Field::kFirst:
      out += r.first_name;
      return;
    case Field::kMiddle:
      out.push_back(r.middle_initial ? *r.middle_initial : kAbsentMarker);
      return;
    case Field::kLast:
      out += r.last_name;
      return;
    case Field::kYob:
      absl::StrAppend(&out, r.yob);
      return;
    case Field::kSex:
      out.push_back(SexCode(r.sex));
      return;
    case Field::kMeshblock:
      out += r.meshblock;
      return;
    case Field::kSa3:
      out += r.sa3;
      return;
  }
}

void AppendPrefix(const PersonRecord& r, Field f, size_t n, std::string& out) {
  std::string full;
  AppendField(r, f, full);
  out.append(full, 0, std::min(n, full.size()));
}

}  // namespace

bool SpecApplies(const PersonRecord& record, const LinkageKeySpec& spec) {
  if (record.middle_initial.has_value()) return true;
  return std::none_of(spec.attributes.begin(), spec.attributes.end(),
                      UsesMiddle);
}

std::string CanonicalSerialize(const PersonRecord& record,
                               const LinkageKeySpec& spec, KeyRole role) {
  std::string out;
  out.reserve(48);
  bool first = true;
  auto sep = [&] {
    if (!first) out.push_back(kFieldSeparator);
    first = false;
  };
  for (const AttributeSelector& s : spec.attributes) {
    switch (s.kind) {
      case AttributeSelector::Kind::kFull:
        sep();
        AppendField(record, s.field, out);
        break;
      case AttributeSelector::Kind::kInitial:
        sep();
        AppendPrefix(record, s.field, 1, out);
        break;
      case AttributeSelector::Kind::kBigram2:
        sep();
        AppendPrefix(record, s.field, 2, out);
        break;
      case AttributeSelector::Kind::kTransposed: {
        Field a = role == KeyRole::kIndex ? s.other : s.field;
        Field b = role == KeyRole::kIndex ? s.field : s.other;
        sep();
        AppendField(record, a, out);
        sep();
        AppendField(record, b, out);
        break;
      }
    }
  }
  return out;
}

}  // namespace pprl
