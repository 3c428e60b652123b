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

#include "pprl/cli.h"

#include <algorithm>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "pprl/attacks.h"
#include "pprl/bloom.h"
#include "pprl/envelope.h"
#include "pprl/evalbench.h"
#include "pprl/linker.h"
#include "pprl/linkkeys.h"
#include "pprl/lossy.h"
#include "pprl/parallel.h"
#include "pprl/rng.h"

#ifndef PPRL_VERSION
#define PPRL_VERSION "dev"
#endif
#ifndef PPRL_DEFAULT_CONFIG
#define PPRL_DEFAULT_CONFIG "data/desk.conf"
#endif

namespace pprl {
namespace {

namespace fs = std::filesystem;

// Min bytes for a name to count in the ciphertext scan; shorter strings
// occur in random bytes by chance at demo file sizes.
constexpr size_t kScanMinLength = 6;

absl::StatusOr<GeneratorConfig> LoadConfig(const RunContext& ctx) {
  absl::StatusOr<GeneratorConfig> config = LoadGeneratorConfig(ctx.config_path);
  if (!config.ok()) return config.status();
  config->seed = ctx.seed;
  return config;
}

uint64_t PopulationSize(const RunContext& ctx, const GeneratorConfig& config) {
  return ctx.scale == Scale::kPaper ? ctx.preset().population
                                    : config.population_size;
}

std::vector<std::string> TableValues(const FrequencyTable& table) {
  std::vector<std::string> out;
  out.reserve(table.size());
  for (size_t i : table.RankOrder()) out.push_back(table.value(i));
  return out;
}

std::string TagPrefix(const HmacTag& tag) {
  return HexEncode(std::span<const uint8_t>(tag.data(), 8));
}

std::string BytesHexPrefix(absl::string_view bytes, size_t n) {
  const size_t len = std::min(n, bytes.size());
  return HexEncode(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(bytes.data()), len));
}

std::string MaybeRedact(const RunContext& ctx, const std::string& plaintext) {
  return ctx.redact ? absl::StrCat("sha256:", Sha256Hex(plaintext)) : plaintext;
}

absl::Status WriteBinary(const std::string& path,
                         const std::vector<uint8_t>& bytes) {
  return WriteStringToFile(
      path, absl::string_view(reinterpret_cast<const char*>(bytes.data()),
                              bytes.size()));
}

bool Wants(const std::vector<std::string>& list, absl::string_view item) {
  return std::find(list.begin(), list.end(), item) != list.end();
}

// "queries_exact.csv" -> "exact".
std::string QueryLabel(const std::string& path) {
  std::string stem = fs::path(path).stem().string();
  absl::string_view label = stem;
  absl::ConsumePrefix(&label, "queries_");
  return std::string(label);
}

double Median(std::vector<uint64_t> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? static_cast<double>(v[n / 2])
                    : 0.5 * static_cast<double>(v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

absl::StatusOr<Scale> ParseScale(absl::string_view name) {
  if (name == "desk") return Scale::kDesk;
  if (name == "paper") return Scale::kPaper;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown scale '", name, "' (desk|paper)"));
}

ScalePreset PresetFor(Scale scale) {
  ScalePreset p;
  p.uniformity_filters = 500000;
  p.uniformity_inserts = 5;
  p.universal_draws = 5;
  p.dictionary_size = 400000;
  p.dictionary_targets = 1000;
  p.frequency_draws = 100000;
  p.frequency_trials = 10;
  p.lossy_trials = 10;
  p.bloom_names = 10000;
  if (scale == Scale::kDesk) {
    p.population = 100000;
    p.sweep_names = 4000;
    p.small_population = 10000;
  } else {
    p.population = 2900000;
    p.sweep_names = 10000;
    p.small_population = 100000;
  }
  return p;
}

std::string RunContext::OutputHeader() const {
  return absl::StrCat("# config_digest=", config_digest, " seed=", seed,
                      " version=", PPRL_VERSION);
}

std::string RunContext::OutPath(absl::string_view name) const {
  return (fs::path(out_dir) / std::string(name)).string();
}

absl::Status FinalizeContext(RunContext& ctx, absl::string_view parameters) {
  if (ctx.config_path.empty()) ctx.config_path = PPRL_DEFAULT_CONFIG;
  absl::StatusOr<std::string> content = ReadFileToString(ctx.config_path);
  if (!content.ok()) return content.status();
  const std::string material = absl::StrCat(
      *content, "\x1f", parameters, "\x1f",
      ctx.scale == Scale::kDesk ? "desk" : "paper", "\x1f", ctx.seed);
  ctx.config_digest = Sha256Hex(material).substr(0, 16);
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", ctx.out_dir, ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::Status WriteReport(const RunContext& ctx, absl::string_view name,
                         absl::string_view body) {
  return WriteStringToFile(ctx.OutPath(name),
                           absl::StrCat(ctx.OutputHeader(), "\n", body));
}

absl::StatusOr<HmacKey> ResolveKey(const RunContext& ctx) {
  if (ctx.key_file.has_value()) {
    absl::StatusOr<std::vector<HmacKey>> keys = ReadKeyFile(*ctx.key_file);
    if (!keys.ok()) return keys.status();
    if (keys->empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat(*ctx.key_file, " holds no key"));
    }
    return keys->front();
  }
  return HmacKey::FromSeed(ctx.seed, "linkage");
}

absl::Status CmdGenerate(const RunContext& ctx, const GenerateOptions& opts) {
  absl::StatusOr<GeneratorConfig> config = LoadConfig(ctx);
  if (!config.ok()) return config.status();
  config->population_size = opts.size.value_or(PopulationSize(ctx, *config));
  absl::StatusOr<Dataset> population = Generate(*config);
  if (!population.ok()) return population.status();
  const std::string comment(absl::StripPrefix(ctx.OutputHeader(), "# "));
  if (absl::Status s =
          WriteDataset(*population, ctx.OutPath("population.csv"), comment);
      !s.ok()) {
    return s;
  }

  std::vector<DistortionKind> kinds;
  if (opts.distortions.empty()) {
    kinds = AllDistortionKinds();
  } else {
    for (const std::string& name : opts.distortions) {
      absl::StatusOr<DistortionKind> k = ParseDistortionKind(name);
      if (!k.ok()) return k.status();
      kinds.push_back(*k);
    }
  }
  DistortionContext dctx;
  dctx.meshblock_table = &config->meshblock_table;
  dctx.yob_min = config->yob_range.first;
  dctx.yob_max = config->yob_range.second;
  dctx.sa3_digits = config->sa3_digits;
  std::string summary = "distortion,applied,skipped\n";
  for (DistortionKind kind : kinds) {
    absl::StatusOr<DistortResult> d =
        Distort(*population, {kind, opts.rate}, ctx.seed, dctx);
    if (!d.ok()) return d.status();
    const std::string name(DistortionName(kind));
    Dataset queries =
        Shuffle(d->dataset, DeriveSeed(ctx.seed, absl::StrCat("shuffle:", name)));
    if (absl::Status s = WriteDataset(
            queries, ctx.OutPath(absl::StrCat("queries_", name, ".csv")),
            comment);
        !s.ok()) {
      return s;
    }
    absl::StrAppend(&summary, name, ",", d->applied, ",", d->skipped, "\n");
  }
  std::cout << "generated " << population->records.size() << " records and "
            << kinds.size() << " query copies in " << ctx.out_dir << "\n";
  return WriteReport(ctx, "generate_summary.csv", summary);
}

absl::Status CmdDerive(const RunContext& ctx, const DeriveOptions& opts) {
  const std::string data_path =
      opts.data.empty() ? ctx.OutPath("population.csv") : opts.data;
  absl::StatusOr<Dataset> data = LoadDataset(data_path);
  if (!data.ok()) return data.status();
  std::vector<LinkageKeySpec> specs = DefaultLinkageKeySpecs();
  if (opts.specs_file.has_value()) {
    absl::StatusOr<std::vector<LinkageKeySpec>> loaded =
        LoadSpecFile(*opts.specs_file);
    if (!loaded.ok()) return loaded.status();
    specs = *std::move(loaded);
  }
  absl::StatusOr<HmacKey> key = ResolveKey(ctx);
  if (!key.ok()) return key.status();
  absl::StatusOr<LinkIndex> index = BuildIndex(*data, specs, *key, ctx.threads);
  if (!index.ok()) return index.status();

  std::string uniq =
      "spec,total_tags,unique_tags,tag_percent_unique,contributing_records,"
      "unique_records,record_percent_unique,record_percent_of_dataset,"
      "duplicate_groups,largest_group\n";
  for (const SpecUniqueness& u :
       ComputeUniqueness(*index, data->records.size())) {
    absl::StrAppend(
        &uniq,
        absl::StrFormat("%s,%d,%d,%.4f,%d,%d,%.4f,%.4f,%d,%d\n", u.spec_name,
                        u.total_tags, u.unique_tags, u.tag_percent_unique,
                        u.contributing_records, u.unique_records,
                        u.record_percent_unique, u.record_percent_of_dataset,
                        u.duplicate_group_count, u.largest_group_size));
  }
  if (absl::Status s = WriteReport(ctx, "uniqueness.csv", uniq); !s.ok()) {
    return s;
  }

  LinkIndex final_index = *std::move(index);
  if (opts.prune != "none") {
    PrunePolicy policy;
    absl::string_view prune = opts.prune;
    if (prune == "postings") {
      policy = PrunePolicy::DropPostings();
    } else if (absl::ConsumePrefix(&prune, "spec:")) {
      double pct = 0;
      if (!absl::SimpleAtod(prune, &pct)) {
        return absl::InvalidArgumentError(
            absl::StrCat("bad prune threshold '", prune, "'"));
      }
      policy = PrunePolicy::DropSpec(pct);
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown prune policy '", opts.prune, "' (none|postings|spec:<pct>)"));
    }
    PruneResult pruned = PruneNonUnique(final_index, policy);
    std::string stats = "spec,postings_dropped,rows_dropped,spec_dropped\n";
    for (const auto& [name, count] : pruned.stats.postings_dropped) {
      absl::StrAppend(&stats, name, ",", count, ",",
                      pruned.stats.rows_dropped[name], ",",
                      Wants(pruned.stats.specs_dropped, name) ? 1 : 0, "\n");
    }
    for (const std::string& name : pruned.stats.specs_dropped) {
      if (!pruned.stats.postings_dropped.contains(name)) {
        absl::StrAppend(&stats, name, ",0,0,1\n");
      }
    }
    if (absl::Status s = WriteReport(ctx, "prune_stats.csv", stats); !s.ok()) {
      return s;
    }
    final_index = std::move(pruned.index);
  }
  std::cout << "indexed " << data->records.size() << " records under "
            << final_index.size() << " specs\n";
  return WriteIndexSnapshot(final_index, ctx.OutPath("index.snap"));
}

absl::Status CmdLink(const RunContext& ctx, const LinkOptions& opts) {
  const std::string index_path =
      opts.index.empty() ? ctx.OutPath("index.snap") : opts.index;
  absl::StatusOr<LinkIndex> index = ReadIndexSnapshot(index_path);
  if (!index.ok()) return index.status();
  absl::StatusOr<HmacKey> key = ResolveKey(ctx);
  if (!key.ok()) return key.status();
  if (index->key_id() != key->key_id()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "key mismatch suspected: index built with key id '", index->key_id(),
        "', linking with '", key->key_id(), "'"));
  }
  const std::string ref_path =
      opts.reference.empty() ? ctx.OutPath("population.csv") : opts.reference;
  absl::StatusOr<Dataset> reference = LoadDataset(ref_path);
  if (!reference.ok()) return reference.status();
  const absl::flat_hash_set<uint64_t> reference_rows = RowIds(*reference);

  std::vector<std::string> query_paths = opts.queries;
  if (query_paths.empty()) {
    for (DistortionKind kind : AllDistortionKinds()) {
      std::string p =
          ctx.OutPath(absl::StrCat("queries_", DistortionName(kind), ".csv"));
      if (fs::exists(p)) query_paths.push_back(p);
    }
    if (query_paths.empty()) {
      return absl::NotFoundError(
          absl::StrCat("no query files given or found in ", ctx.out_dir));
    }
  }
  std::vector<MatchMethod> methods;
  for (const std::string& m : opts.methods) {
    absl::StatusOr<MatchMethod> method = ParseMatchMethod(m);
    if (!method.ok()) return method.status();
    methods.push_back(*method);
  }

  DeterministicLinker linker(*index, *key);
  std::optional<BigramMatcher> dice_matcher;
  std::optional<BigramMatcher> qgram_matcher;
  std::string eval_csv = absl::StrCat(kEvalCsvHeader, "\n");
  for (const std::string& path : query_paths) {
    absl::StatusOr<Dataset> queries = LoadDataset(path);
    if (!queries.ok()) return queries.status();
    const std::string label = QueryLabel(path);
    for (MatchMethod method : methods) {
      std::vector<MatchDecision> decisions;
      if (method == MatchMethod::kFirstUnique ||
          method == MatchMethod::kVoting) {
        decisions = linker.LinkAll(*queries, method, ctx.seed, ctx.threads);
        bool any_tag_matched = false;
        for (const MatchDecision& d : decisions) {
          for (const SpecEvidence& e : d.evidence) {
            if (e.outcome == SpecEvidence::Outcome::kUnique ||
                e.outcome == SpecEvidence::Outcome::kMultiple) {
              any_tag_matched = true;
            }
          }
        }
        if (!decisions.empty() && !any_tag_matched) {
          return absl::FailedPreconditionError(absl::StrCat(
              "key mismatch suspected: none of ", decisions.size(),
              " queries in ", path,
              " matched any linkage key tag; was the index built with "
              "this key?"));
        }
      } else {
        std::optional<BigramMatcher>& slot =
            method == MatchMethod::kBigramDice ? dice_matcher : qgram_matcher;
        if (!slot.has_value()) {
          BigramMatcherOptions options;
          options.scoring = method;
          absl::StatusOr<BigramMatcher> m =
              BigramMatcher::Create(*reference, *key, options);
          if (!m.ok()) return m.status();
          slot.emplace(*std::move(m));
        }
        decisions = slot->LinkAll(*queries, ctx.threads);
      }
      absl::StatusOr<EvalResult> eval =
          Evaluate(decisions, reference_rows, label, method);
      if (!eval.ok()) return eval.status();
      absl::StrAppend(&eval_csv, EvalCsvRow(*eval), "\n");
      if (absl::Status s = WriteReport(
              ctx,
              absl::StrCat("decisions_", label, "_", MatchMethodName(method),
                           ".csv"),
              DecisionsCsv(decisions));
          !s.ok()) {
        return s;
      }
      std::cout << absl::StrFormat("%-26s %-12s precision=%.4f recall=%.4f\n",
                                   label, MatchMethodName(method),
                                   eval->precision, eval->recall_any);
    }
  }
  return WriteReport(ctx, "eval.csv", eval_csv);
}

absl::Status CmdBloom(const RunContext& ctx, const BloomOptions& opts) {
  absl::StatusOr<GeneratorConfig> config = LoadConfig(ctx);
  if (!config.ok()) return config.status();
  const ScalePreset preset = ctx.preset();
  const std::vector<std::string> all_names =
      TableValues(config->last_name_table);

  if (Wants(opts.experiments, "uniformity")) {
    const uint64_t filters = opts.filters.value_or(preset.uniformity_filters);
    std::string csv = "family,draw,m,k,filters,inserts,mean,stddev\n";
    DoubleHashParams dp{101, 3, DoubleHashEnhancement::kPlain,
                        HashPair::kSha1Md5};
    absl::StatusOr<BloomFamily> dh = BloomFamily::DoubleHash(dp);
    if (!dh.ok()) return dh.status();
    UniformityResult d = UniformityExperiment(
        *dh, filters, preset.uniformity_inserts, ctx.seed);
    absl::StrAppend(&csv, absl::StrFormat("%s,0,101,3,%d,%d,%.4f,%.4f\n",
                                          dh->Describe(), filters,
                                          preset.uniformity_inserts, d.mean,
                                          d.stddev));
    std::vector<double> universal;
    for (uint32_t draw = 0; draw < preset.universal_draws; ++draw) {
      std::mt19937_64 rng =
          MakeRng(ctx.seed, absl::StrCat("uniformity:universal:", draw));
      absl::StatusOr<BloomFamily> u = BloomFamily::Universal(101, 3, rng);
      if (!u.ok()) return u.status();
      UniformityResult r = UniformityExperiment(
          *u, filters, preset.uniformity_inserts, ctx.seed);
      universal.push_back(r.stddev);
      absl::StrAppend(&csv, absl::StrFormat("%s,%d,101,3,%d,%d,%.4f,%.4f\n",
                                            u->Describe(), draw, filters,
                                            preset.uniformity_inserts, r.mean,
                                            r.stddev));
    }
    std::sort(universal.begin(), universal.end());
    const double median = universal.empty() ? 0.0 : universal[universal.size() / 2];
    std::cout << absl::StrFormat(
        "uniformity: double-hash stddev %.1f, universal median %.1f, ratio "
        "%.2f\n",
        d.stddev, median, median > 0 ? d.stddev / median : 0.0);
    if (absl::Status s = WriteReport(ctx, "uniformity.csv", csv); !s.ok()) {
      return s;
    }
  }

  if (Wants(opts.experiments, "overestimation")) {
    const std::vector<std::string> names = SampleNames(
        all_names, opts.names.value_or(preset.bloom_names), ctx.seed);
    std::string csv = absl::StrCat(kSweepCsvHeader, "\n");
    std::string examples = "family,m,kind,bloom_score,ngram_score,name_a,name_b\n";
    std::vector<std::shared_ptr<const BloomFamily>> families;
    for (uint64_t m : {uint64_t{100}, uint64_t{101}}) {
      absl::StatusOr<BloomFamily> f = BloomFamily::DoubleHash(
          {m, 3, DoubleHashEnhancement::kPlain, HashPair::kSha1Md5});
      if (!f.ok()) return f.status();
      families.push_back(std::make_shared<const BloomFamily>(*std::move(f)));
    }
    std::mt19937_64 rng = MakeRng(ctx.seed, "overestimation:universal");
    absl::StatusOr<BloomFamily> u = BloomFamily::Universal(100, 3, rng);
    if (!u.ok()) return u.status();
    families.push_back(std::make_shared<const BloomFamily>(*std::move(u)));
    for (const auto& family : families) {
      absl::StatusOr<OverestimationStats> stats =
          OverestimationExperiment(names, family, ctx.threads);
      if (!stats.ok()) return stats.status();
      absl::StrAppend(&csv,
                      SweepCsvRow({family->Describe(), family->m(),
                                   family->k(), *stats}),
                      "\n");
      auto emit = [&](const std::vector<ExtremeExample>& list,
                      absl::string_view kind) {
        for (const ExtremeExample& e : list) {
          absl::StrAppend(&examples,
                          absl::StrFormat("%s,%d,%s,%.4f,%.4f,%s,%s\n",
                                          family->Describe(), family->m(),
                                          kind, e.bloom_score, e.ngram_score,
                                          e.name_a, e.name_b));
        }
      };
      emit(stats->extreme_examples, "no_shared_bigram");
      emit(stats->ngram_greater_examples, "ngram_greater");
      std::cout << absl::StrFormat(
          "overestimation %s m=%d: bloom>ngram %.4f, mean diff %.4f, sd "
          "%.4f\n",
          family->Describe(), family->m(), stats->bloom_greater_fraction(),
          stats->diff.mean(), stats->diff.stddev());
    }
    if (absl::Status s = WriteReport(ctx, "overestimation.csv", csv);
        !s.ok()) {
      return s;
    }
    if (absl::Status s = WriteReport(ctx, "extreme_examples.csv", examples);
        !s.ok()) {
      return s;
    }
  }

  if (Wants(opts.experiments, "sweep")) {
    const std::vector<std::string> names =
        SampleNames(all_names, preset.sweep_names, ctx.seed);
    absl::StatusOr<std::vector<SweepRow>> rows =
        ParameterSweep(names, DefaultSweepConfig(), ctx.seed, ctx.threads);
    if (!rows.ok()) return rows.status();
    std::string csv = absl::StrCat(kSweepCsvHeader, "\n");
    for (const SweepRow& row : *rows) {
      absl::StrAppend(&csv, SweepCsvRow(row), "\n");
    }
    std::cout << "sweep: " << rows->size() << " configurations\n";
    if (absl::Status s = WriteReport(ctx, "sweep.csv", csv); !s.ok()) return s;
  }
  return absl::OkStatus();
}

absl::Status CmdAttack(const RunContext& ctx, const AttackOptions& opts) {
  absl::StatusOr<GeneratorConfig> config = LoadConfig(ctx);
  if (!config.ok()) return config.status();
  const ScalePreset preset = ctx.preset();
  const FrequencyTable& surnames = config->last_name_table;
  std::string summary;

  if (Wants(opts.attacks, "dictionary")) {
    std::vector<std::string> dictionary;
    if (opts.dictionary_file.has_value()) {
      absl::StatusOr<std::string> content =
          ReadFileToString(*opts.dictionary_file);
      if (!content.ok()) return content.status();
      for (absl::string_view line : absl::StrSplit(*content, '\n')) {
        line = absl::StripAsciiWhitespace(line);
        if (!line.empty()) dictionary.emplace_back(line);
      }
    } else {
      dictionary = ComposeDictionary(TableValues(surnames),
                                     config->first_name_tables.DistinctValues(),
                                     preset.dictionary_size);
    }
    // Distinct surnames drawn by frequency, hashed without a key.
    std::mt19937_64 rng = MakeRng(ctx.seed, "attack:targets");
    absl::flat_hash_set<std::string> chosen;
    std::vector<std::string> targets;
    const size_t want = std::min(preset.dictionary_targets, surnames.size());
    Sha256Encoder encoder;
    while (targets.size() < want) {
      const std::string& name = surnames.Sample(rng);
      if (chosen.insert(name).second) targets.push_back(encoder.Encode(name));
    }
    AttackReport report =
        DictionaryAttack(targets, dictionary, encoder, ctx.threads);
    const bool verified = VerifyRecoveries(report, encoder);
    absl::StrAppend(&summary, AttackSummary(report), ", dictionary ",
                    dictionary.size(), ", verified=", verified ? "yes" : "no",
                    "\n");
    if (absl::Status s = WriteReport(ctx, "attack_dictionary.csv",
                                     AttackReportCsv(report, ctx.redact));
        !s.ok()) {
      return s;
    }
  }

  if (Wants(opts.attacks, "frequency")) {
    std::string csv =
        "trial,rank,tag_prefix,observed_count,guess,public_count,correct\n";
    uint32_t rank1_correct = 0;
    for (uint32_t t = 0; t < preset.frequency_trials; ++t) {
      HmacEncoder encoder(
          HmacKey::FromSeed(ctx.seed, absl::StrCat("frequency:trial:", t)));
      std::mt19937_64 rng =
          MakeRng(ctx.seed, absl::StrCat("frequency:draws:", t));
      std::vector<std::string> tags;
      tags.reserve(preset.frequency_draws);
      for (uint64_t i = 0; i < preset.frequency_draws; ++i) {
        tags.push_back(encoder.Encode(surnames.Sample(rng)));
      }
      FrequencyAttackResult result = FrequencyAttack(tags, surnames, 10);
      for (const RankAlignment& a : result.alignment) {
        const bool correct = encoder.Encode(a.guessed_name) == a.tag;
        if (a.rank == 1 && correct) ++rank1_correct;
        absl::StrAppend(&csv, t, ",", a.rank, ",", BytesHexPrefix(a.tag, 8),
                        ",", a.observed_count, ",",
                        MaybeRedact(ctx, a.guessed_name), ",", a.public_count,
                        ",", correct ? 1 : 0, "\n");
      }
    }
    absl::StrAppend(&summary, "frequency attack: rank-1 identified in ",
                    rank1_correct, " of ", preset.frequency_trials,
                    " trials without the key\n");
    if (absl::Status s = WriteReport(ctx, "attack_frequency.csv", csv);
        !s.ok()) {
      return s;
    }
  }

  if (Wants(opts.attacks, "chain")) {
    const HmacKey key = HmacKey::FromSeed(ctx.seed, "chain");
    absl::StatusOr<BucketTable> table =
        BuildTruncatedHmacTable(surnames, key, opts.chain_buckets);
    if (!table.ok()) return table.status();
    std::mt19937_64 rng = MakeRng(ctx.seed, "chain:records");
    std::vector<std::string> names;
    std::vector<uint32_t> observed;
    for (uint64_t i = 0; i < preset.frequency_draws; ++i) {
      names.push_back(surnames.Sample(rng));
      observed.push_back(*table->Lookup(names.back()));
    }
    // Auxiliary re-identifications: one record for each of the most common
    // names.
    std::vector<size_t> seeds;
    for (size_t idx : surnames.RankOrder()) {
      if (seeds.size() >= opts.chain_seeds) break;
      auto it = std::find(names.begin(), names.end(), surnames.value(idx));
      if (it != names.end()) seeds.push_back(it - names.begin());
    }
    absl::StatusOr<ChainResult> chain =
        BucketReversalChain(observed, names, seeds, *table);
    if (!chain.ok()) return chain.status();
    std::string csv =
        "seeds,pairs_confirmed,buckets_touched,records_identified,"
        "records_narrowed,identified_fraction\n";
    for (const ChainStep& s : chain->steps) {
      absl::StrAppend(&csv, absl::StrFormat("%d,%d,%d,%d,%d,%.6f\n", s.seeds,
                                            s.pairs_confirmed,
                                            s.buckets_touched,
                                            s.records_identified,
                                            s.records_narrowed,
                                            s.identified_fraction));
    }
    absl::StrAppend(&summary, AttackSummary(chain->report), "\n");
    if (absl::Status s = WriteReport(ctx, "attack_chain.csv", csv); !s.ok()) {
      return s;
    }
  }

  if (Wants(opts.attacks, "probe")) {
    config->population_size = preset.small_population;
    absl::StatusOr<Dataset> data = Generate(*config);
    if (!data.ok()) return data.status();
    absl::StatusOr<HmacKey> key = ResolveKey(ctx);
    if (!key.ok()) return key.status();
    absl::StatusOr<LinkIndex> index =
        BuildIndex(*data, DefaultLinkageKeySpecs(), *key, ctx.threads);
    if (!index.ok()) return index.status();
    std::string csv = "phase,spec,tag_prefix,group_size\n";
    const std::vector<ProbeGroup> before = LinkageKeyFrequencyProbe(*index);
    const std::vector<ProbeGroup> after = LinkageKeyFrequencyProbe(
        PruneNonUnique(*index, PrunePolicy::DropPostings()).index);
    for (const auto& [phase, groups] :
         {std::pair{"before_prune", &before}, std::pair{"after_prune", &after}}) {
      for (const ProbeGroup& g : *groups) {
        absl::StrAppend(&csv, phase, ",", g.spec_name, ",", TagPrefix(g.tag),
                        ",", g.rows.size(), "\n");
      }
    }
    absl::StrAppend(&summary, "linkage key probe: ", before.size(),
                    " duplicate groups before pruning, ", after.size(),
                    " after\n");
    if (absl::Status s = WriteReport(ctx, "attack_probe.csv", csv); !s.ok()) {
      return s;
    }
  }
  std::cout << summary;
  // Timings vary run to run, so the summary is not a CSV report.
  return WriteStringToFile(ctx.OutPath("attack_summary.txt"),
                           absl::StrCat(ctx.OutputHeader(), "\n", summary));
}

absl::Status CmdLossy(const RunContext& ctx, const LossyOptions& opts) {
  absl::StatusOr<GeneratorConfig> config = LoadConfig(ctx);
  if (!config.ok()) return config.status();
  const FrequencyTable& surnames = config->last_name_table;
  const uint32_t trials = opts.trials.value_or(ctx.preset().lossy_trials);
  const std::string probe =
      opts.probe.value_or(surnames.value(surnames.RankOrder().front()));

  std::string ranks =
      "trial,n_buckets,probe_rank,probe_mass,top_mass,mean_candidate_set\n";
  uint32_t rank1 = 0;
  for (uint32_t t = 0; t < trials; ++t) {
    const HmacKey key =
        HmacKey::FromSeed(ctx.seed, absl::StrCat("lossy:trial:", t));
    for (uint32_t n : opts.buckets) {
      absl::StatusOr<BucketTable> table =
          BuildTruncatedHmacTable(surnames, key, n);
      if (!table.ok()) return table.status();
      absl::StatusOr<BucketAnalysis> a =
          AnalyzeBuckets(*table, surnames, probe);
      if (!a.ok()) return a.status();
      uint64_t probe_mass = 0;
      for (const BucketStat& s : a->buckets) {
        if (s.bucket_id == a->probe_bucket) probe_mass = s.mass;
      }
      if (a->probe_rank == 1) ++rank1;
      absl::StrAppend(&ranks, absl::StrFormat("%d,%d,%d,%d,%d,%.2f\n", t, n,
                                              a->probe_rank, probe_mass,
                                              a->buckets.front().mass,
                                              MeanCandidateSetSize(*table)));
      if (t == 0) {
        if (absl::Status s = WriteReport(
                ctx, absl::StrCat("lossy_buckets_", n, ".csv"),
                BucketAnalysisCsv(*a));
            !s.ok()) {
          return s;
        }
      }
    }
  }
  std::cout << "lossy: probe bucket ranked first in " << rank1 << " of "
            << trials * opts.buckets.size() << " (trial, bucket count) runs\n";
  if (absl::Status s = WriteReport(ctx, "lossy_rank.csv", ranks); !s.ok()) {
    return s;
  }

  absl::StatusOr<DominantMassMatch> dominant = MatchDominantMass(surnames);
  if (!dominant.ok()) return dominant.status();
  std::string smoothing =
      "n_buckets,max_min_ratio,min_distinct,median_distinct,max_distinct,"
      "dominant_tail_names,tail_to_median_ratio\n";
  for (uint32_t n : opts.buckets) {
    absl::StatusOr<SmoothedTable> st = BuildSmoothedTable(surnames, n);
    if (!st.ok()) return st.status();
    const double median = Median(st->distinct_names);
    absl::StrAppend(
        &smoothing,
        absl::StrFormat(
            "%d,%.4f,%d,%.1f,%d,%d,%.2f\n", n, st->max_min_ratio,
            *std::min_element(st->distinct_names.begin(),
                              st->distinct_names.end()),
            median,
            *std::max_element(st->distinct_names.begin(),
                              st->distinct_names.end()),
            dominant->tail_names_needed,
            median > 0 ? static_cast<double>(dominant->tail_names_needed) /
                             median
                       : 0.0));
    // The smoothed table is the secret artifact of this mode.
    if (absl::Status s =
            WriteReport(ctx, absl::StrCat("smoothed_table_", n, ".csv"),
                        BucketTableCsv(st->table));
        !s.ok()) {
      return s;
    }
  }
  std::cout << "lossy: matching the dominant name's mass takes "
            << dominant->tail_names_needed << " of the rarest names\n";
  return WriteReport(ctx, "lossy_smoothing.csv", smoothing);
}

absl::Status CmdEnvelope(const RunContext& ctx, const EnvelopeOptions& opts) {
  absl::StatusOr<GeneratorConfig> config = LoadConfig(ctx);
  if (!config.ok()) return config.status();
  config->population_size = opts.size.value_or(ctx.preset().small_population);
  absl::StatusOr<Dataset> reference = Generate(*config);
  if (!reference.ok()) return reference.status();
  const Dataset queries =
      Shuffle(*reference, DeriveSeed(ctx.seed, "envelope:queries"));
  const Keypair linker = Keypair::FromSeed(ctx.seed, "linker");

  absl::StatusOr<PipelineResult> result = PipelineDemo(
      *reference, queries, linker, ctx.seed, MatchMethod::kVoting, ctx.threads);
  if (!result.ok()) return result.status();
  if (absl::Status s =
          WriteBinary(ctx.OutPath("linkage_reference.bin"),
                      result->reference_file);
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteBinary(ctx.OutPath("linkage_queries.bin"),
                                   result->query_file);
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteReport(ctx, "envelope_analysis.csv",
                                   result->analysis_csv);
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteReport(ctx, "envelope_decisions.csv",
                                   DecisionsCsv(result->decisions));
      !s.ok()) {
    return s;
  }

  // Custodian checks on the linker's private key.
  absl::StatusOr<SecretShares> shares =
      SplitPrivateKey(linker, opts.threshold, opts.custodians, ctx.seed);
  if (!shares.ok()) return shares.status();
  const std::vector<Share> enough(shares->shares.begin(),
                                  shares->shares.begin() + opts.threshold);
  absl::StatusOr<Keypair> rebuilt = RecombinePrivateKey(enough, opts.threshold);
  const bool recombine_ok =
      rebuilt.ok() && rebuilt->private_key == linker.private_key &&
      rebuilt->public_key == linker.public_key;
  const std::vector<Share> too_few(enough.begin(), enough.end() - 1);
  const bool below_threshold_fails =
      !RecombinePrivateKey(too_few, opts.threshold).ok();

  std::vector<std::string> names;
  for (const PersonRecord& r : reference->records) {
    names.push_back(r.first_name);
    names.push_back(r.last_name);
  }
  const size_t leaks =
      ScanForPlaintext(result->reference_file, names, kScanMinLength).size() +
      ScanForPlaintext(result->query_file, names, kScanMinLength).size();

  std::string checks = "check,value\n";
  absl::StrAppend(&checks, "records,", reference->records.size(), "\n");
  absl::StrAppend(&checks, "precision,",
                  absl::StrFormat("%.6f", result->evaluation.precision), "\n");
  absl::StrAppend(&checks, "recall,",
                  absl::StrFormat("%.6f", result->evaluation.recall_any), "\n");
  absl::StrAppend(&checks, "threshold,", opts.threshold, "\n");
  absl::StrAppend(&checks, "custodians,", opts.custodians, "\n");
  absl::StrAppend(&checks, "recombine_at_threshold,", recombine_ok ? 1 : 0,
                  "\n");
  absl::StrAppend(&checks, "below_threshold_rejected,",
                  below_threshold_fails ? 1 : 0, "\n");
  absl::StrAppend(&checks, "plaintext_names_found,", leaks, "\n");
  std::cout << absl::StrFormat(
      "envelope: %d records, precision %.4f recall %.4f, plaintext hits %d\n",
      reference->records.size(), result->evaluation.precision,
      result->evaluation.recall_any, leaks);
  return WriteReport(ctx, "envelope_checks.csv", checks);
}

absl::Status CmdRepro(const RunContext& ctx) {
  if (absl::Status s = CmdGenerate(ctx, {}); !s.ok()) return s;
  if (absl::Status s = CmdDerive(ctx, {}); !s.ok()) return s;
  if (absl::Status s = CmdLink(ctx, {}); !s.ok()) return s;
  if (absl::Status s = CmdBloom(ctx, {}); !s.ok()) return s;
  if (absl::Status s = CmdAttack(ctx, {}); !s.ok()) return s;
  if (absl::Status s = CmdLossy(ctx, {}); !s.ok()) return s;
  return CmdEnvelope(ctx, {});
}

int RunCli(int argc, char** argv) {
  CLI::App app{"Record linkage privacy experiments"};
  app.require_subcommand(1);
  // Subcommands inherit this, so global flags may follow the subcommand.
  app.fallthrough();
  app.set_version_flag("--version", PPRL_VERSION);

  RunContext ctx;
  std::optional<uint64_t> seed;
  std::string scale = "desk";
  app.add_option("--config", ctx.config_path, "Generator config (key=value)");
  app.add_option("--seed", seed, "Master seed (default: config seed)");
  app.add_option("--scale", scale, "Experiment scale: desk|paper");
  app.add_option("--out", ctx.out_dir, "Output directory");
  app.add_option("--threads", ctx.threads, "Worker threads (0 = all cores)");
  app.add_flag("--redact", ctx.redact,
               "Replace recovered plaintexts with their SHA-256");
  app.add_option("--key-file", ctx.key_file, "HMAC key file (key_id:hex)");

  GenerateOptions gen;
  CLI::App* generate = app.add_subcommand("generate", "Synthetic datasets");
  generate->add_option("--size", gen.size, "Population size");
  generate->add_option("--distortions", gen.distortions,
                       "Distortions to apply (default all)")
      ->delimiter(',');
  generate->add_option("--rate", gen.rate, "Per-record distortion rate");

  DeriveOptions der;
  CLI::App* derive = app.add_subcommand("derive", "Linkage key index");
  derive->add_option("--data", der.data, "Dataset CSV");
  derive->add_option("--specs", der.specs_file, "Spec file (name=sel;sel)");
  derive->add_option("--prune", der.prune, "none|postings|spec:<percent>");

  LinkOptions lnk;
  CLI::App* link = app.add_subcommand("link", "Link query datasets");
  link->add_option("--index", lnk.index, "Index snapshot");
  link->add_option("--reference", lnk.reference, "Reference dataset CSV");
  link->add_option("--queries", lnk.queries, "Query dataset CSVs")
      ->delimiter(',');
  link->add_option("--methods", lnk.methods,
                   "first_unique,voting,bigram_dice,bigram_qgram")
      ->delimiter(',');

  BloomOptions blm;
  CLI::App* bloom = app.add_subcommand("bloom", "Bloom filter experiments");
  bloom->add_option("--experiments", blm.experiments,
                    "uniformity,overestimation,sweep")
      ->delimiter(',');
  bloom->add_option("--names", blm.names, "Over-estimation name sample size");
  bloom->add_option("--filters", blm.filters, "Uniformity filter count");

  AttackOptions atk;
  CLI::App* attack = app.add_subcommand("attack", "Attack demonstrations");
  attack->add_option("--attacks", atk.attacks,
                     "dictionary,frequency,chain,probe")
      ->delimiter(',');
  attack->add_option("--dictionary", atk.dictionary_file,
                     "Dictionary file, one name per line");
  attack->add_option("--chain-buckets", atk.chain_buckets, "Bucket count");
  attack->add_option("--chain-seeds", atk.chain_seeds, "Re-identified seeds");

  LossyOptions lsy;
  CLI::App* lossy = app.add_subcommand("lossy", "Lossy bucket encodings");
  lossy->add_option("--buckets", lsy.buckets, "Bucket counts")->delimiter(',');
  lossy->add_option("--trials", lsy.trials, "Keyed trials");
  lossy->add_option("--probe", lsy.probe, "Probe name (default: most common)");

  EnvelopeOptions env;
  CLI::App* envelope = app.add_subcommand("envelope", "Encrypted pipeline demo");
  envelope->add_option("--size", env.size, "Records");
  envelope->add_option("--threshold", env.threshold, "Shares to recombine");
  envelope->add_option("--custodians", env.custodians, "Shares issued");

  CLI::App* repro = app.add_subcommand("repro", "Run every experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  auto fail = [](const absl::Status& s) {
    std::cerr << "error: " << absl::StatusCodeToString(s.code()) << ": "
              << s.message() << "\n";
    return 1;
  };
  absl::StatusOr<Scale> parsed_scale = ParseScale(scale);
  if (!parsed_scale.ok()) return fail(parsed_scale.status());
  ctx.scale = *parsed_scale;
  if (ctx.config_path.empty()) ctx.config_path = PPRL_DEFAULT_CONFIG;
  if (seed.has_value()) {
    ctx.seed = *seed;
  } else {
    absl::StatusOr<std::string> content = ReadFileToString(ctx.config_path);
    if (!content.ok()) return fail(content.status());
    absl::StatusOr<std::map<std::string, std::string>> kv =
        ParseKeyValueText(*content);
    if (!kv.ok()) return fail(kv.status());
    auto it = kv->find("seed");
    if (it != kv->end() && !absl::SimpleAtoi(it->second, &ctx.seed)) {
      return fail(absl::InvalidArgumentError("config seed is not a number"));
    }
  }
  if (ctx.threads > 0) SetDefaultThreads(ctx.threads);

  // Parameters that shape the outputs, for the config digest.
  std::vector<std::string> params;
  CLI::App* chosen = app.get_subcommands().front();
  params.push_back(chosen->get_name());
  for (const CLI::Option* opt : chosen->get_options()) {
    if (opt->count() > 0) {
      params.push_back(absl::StrCat(opt->get_name(), "=",
                                    absl::StrJoin(opt->results(), ",")));
    }
  }
  if (absl::Status s = FinalizeContext(ctx, absl::StrJoin(params, ";"));
      !s.ok()) {
    return fail(s);
  }

  absl::Status status;
  if (chosen == generate) {
    status = CmdGenerate(ctx, gen);
  } else if (chosen == derive) {
    status = CmdDerive(ctx, der);
  } else if (chosen == link) {
    status = CmdLink(ctx, lnk);
  } else if (chosen == bloom) {
    status = CmdBloom(ctx, blm);
  } else if (chosen == attack) {
    status = CmdAttack(ctx, atk);
  } else if (chosen == lossy) {
    status = CmdLossy(ctx, lsy);
  } else if (chosen == envelope) {
    status = CmdEnvelope(ctx, env);
  } else if (chosen == repro) {
    status = CmdRepro(ctx);
  }
  return status.ok() ? 0 : fail(status);
}

}  // namespace pprl
