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

// Command-line driver: one subcommand per experiment plus `repro`, which
// chains them into a full report bundle.

#ifndef PPRL_CLI_H_
#define PPRL_CLI_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "pprl/hashcore.h"
#include "pprl/synthgen.h"

namespace pprl {

enum class Scale { kDesk, kPaper };
absl::StatusOr<Scale> ParseScale(absl::string_view name);

// Experiment sizes for a scale.
struct ScalePreset {
  uint64_t population = 0;
  size_t bloom_names = 0;
  size_t sweep_names = 0;
  uint64_t uniformity_filters = 0;
  uint32_t uniformity_inserts = 5;
  uint32_t universal_draws = 5;
  size_t dictionary_size = 0;
  size_t dictionary_targets = 0;
  uint64_t frequency_draws = 0;
  uint32_t frequency_trials = 0;
  uint32_t lossy_trials = 0;
  // Population for the envelope demo and the posting probe.
  uint64_t small_population = 0;
};
ScalePreset PresetFor(Scale scale);

// State shared by every subcommand.
struct RunContext {
  std::string config_path;
  uint64_t seed = 0;
  Scale scale = Scale::kDesk;
  std::string out_dir = "out";
  int threads = 0;
  bool redact = false;
  std::optional<std::string> key_file;
  // Hex digest over the config file bytes and the effective parameters.
  std::string config_digest;

  ScalePreset preset() const { return PresetFor(scale); }
  // `# config_digest=... seed=... version=...`, without newline.
  std::string OutputHeader() const;
  std::string OutPath(absl::string_view name) const;
};

// Fills config_digest from the config file and `parameters`.
absl::Status FinalizeContext(RunContext& ctx, absl::string_view parameters);

// Writes `body` to the output directory with the header line first.
absl::Status WriteReport(const RunContext& ctx, absl::string_view name,
                         absl::string_view body);

// The first key of --key-file, else an experiment key derived from the seed.
absl::StatusOr<HmacKey> ResolveKey(const RunContext& ctx);

struct GenerateOptions {
  std::optional<uint64_t> size;
  std::vector<std::string> distortions;  // empty = all
  double rate = 1.0;
};
absl::Status CmdGenerate(const RunContext& ctx, const GenerateOptions& opts);

struct DeriveOptions {
  std::string data;  // default <out>/population.csv
  std::optional<std::string> specs_file;
  std::string prune = "none";  // none | postings | spec:<percent>
};
absl::Status CmdDerive(const RunContext& ctx, const DeriveOptions& opts);

struct LinkOptions {
  std::string index;      // default <out>/index.snap
  std::string reference;  // default <out>/population.csv
  std::vector<std::string> queries;
  std::vector<std::string> methods = {"first_unique", "voting"};
};
absl::Status CmdLink(const RunContext& ctx, const LinkOptions& opts);

struct BloomOptions {
  std::vector<std::string> experiments = {"uniformity", "overestimation",
                                          "sweep"};
  std::optional<size_t> names;
  std::optional<uint64_t> filters;
};
absl::Status CmdBloom(const RunContext& ctx, const BloomOptions& opts);

struct AttackOptions {
  std::vector<std::string> attacks = {"dictionary", "frequency", "chain",
                                      "probe"};
  std::optional<std::string> dictionary_file;
  uint32_t chain_buckets = 50;
  uint32_t chain_seeds = 10;
};
absl::Status CmdAttack(const RunContext& ctx, const AttackOptions& opts);

struct LossyOptions {
  std::vector<uint32_t> buckets = {10, 50, 100, 500};
  std::optional<uint32_t> trials;
  std::optional<std::string> probe;
};
absl::Status CmdLossy(const RunContext& ctx, const LossyOptions& opts);

struct EnvelopeOptions {
  std::optional<uint64_t> size;
  uint32_t threshold = 2;
  uint32_t custodians = 3;
};
absl::Status CmdEnvelope(const RunContext& ctx, const EnvelopeOptions& opts);

// generate -> derive -> link -> bloom -> attack -> lossy -> envelope.
absl::Status CmdRepro(const RunContext& ctx);

// Parses argv and dispatches. Returns the process exit code.
int RunCli(int argc, char** argv);

}  // namespace pprl

#endif  // PPRL_CLI_H_
