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
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "gtest/gtest.h"
#include "pprl/hashcore.h"
#include "test_util.h"

namespace pprl {
namespace {

namespace fs = std::filesystem;
using ::pprl::testing::DataPath;
using ::pprl::testing::TempDir;

int RunPprl(std::vector<std::string> args) {
  args.insert(args.begin(), "pprl");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> Common(const std::string& out) {
  return {"--config", DataPath("desk.conf"), "--seed", "17",
          "--out",    out,                   "--threads", "2"};
}

std::vector<std::string> With(std::vector<std::string> head,
                              std::vector<std::string> tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

// generate -> derive -> link on a small population.
void RunLinkChain(const std::string& out) {
  ASSERT_EQ(RunPprl(With({"generate", "--size", "300", "--distortions",
                      "exact,changeGender"},
                     Common(out))),
            0);
  ASSERT_EQ(RunPprl(With({"derive"}, Common(out))), 0);
  ASSERT_EQ(RunPprl(With({"link"}, Common(out))), 0);
}

TEST(CliTest, SameSeedGivesByteIdenticalOutputs) {
  const std::string a = TempDir("cli_a");
  const std::string b = TempDir("cli_b");
  RunLinkChain(a);
  RunLinkChain(b);
  size_t compared = 0;
  for (const fs::directory_entry& e : fs::directory_iterator(a)) {
    const fs::path other = fs::path(b) / e.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(Slurp(e.path()), Slurp(other)) << e.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 8u);
}

TEST(CliTest, ReportsStartWithHeaderLine) {
  const std::string out = TempDir("cli_header");
  RunLinkChain(out);
  for (const char* name : {"population.csv", "eval.csv", "uniqueness.csv",
                           "decisions_exact_voting.csv"}) {
    const std::string text = Slurp(fs::path(out) / name);
    EXPECT_TRUE(absl::StartsWith(text, "# config_digest=")) << name;
    const std::string first = text.substr(0, text.find('\n'));
    EXPECT_TRUE(absl::StrContains(first, " seed=17 ")) << first;
    EXPECT_TRUE(absl::StrContains(first, " version=")) << first;
  }
}

TEST(CliTest, OutputsHoldNoKeyMaterial) {
  const std::string out = TempDir("cli_key");
  RunLinkChain(out);
  const HmacKey key = HmacKey::FromSeed(17, "linkage");
  const std::string hex = HexEncode(key.bytes());
  const std::string raw(reinterpret_cast<const char*>(key.bytes().data()),
                        key.bytes().size());
  for (const fs::directory_entry& e : fs::directory_iterator(out)) {
    const std::string text = Slurp(e.path());
    EXPECT_FALSE(absl::StrContains(text, hex)) << e.path();
    EXPECT_FALSE(absl::StrContains(text, raw)) << e.path();
    EXPECT_FALSE(absl::StrContains(text, raw.substr(0, 8))) << e.path();
  }
}

TEST(CliTest, EmptyQueryFileGivesEmptyDecisions) {
  const std::string out = TempDir("cli_empty");
  RunLinkChain(out);
  const std::string population = Slurp(fs::path(out) / "population.csv");
  // Keep the comment and column header lines only.
  const size_t header_end = population.find('\n', population.find('\n') + 1);
  const fs::path empty = fs::path(out) / "queries_none.csv";
  std::ofstream(empty) << population.substr(0, header_end + 1);
  ASSERT_EQ(RunPprl(With({"link", "--queries", empty.string(), "--methods",
                      "voting"},
                     Common(out))),
            0);
  const std::string decisions =
      Slurp(fs::path(out) / "decisions_none_voting.csv");
  // Header comment and column line, no rows.
  EXPECT_EQ(std::count(decisions.begin(), decisions.end(), '\n'), 2);
}

TEST(CliTest, MismatchedKeyIsDiagnosed) {
  const std::string out = TempDir("cli_mismatch");
  RunLinkChain(out);
  const std::string key_file = (fs::path(out) / "other.key").string();
  const HmacKey other = HmacKey::FromSeed(99, "linkage");
  ASSERT_TRUE(WriteKeyFile(key_file, std::span<const HmacKey>(&other, 1)).ok());

  RunContext ctx;
  ctx.config_path = DataPath("desk.conf");
  ctx.seed = 17;
  ctx.out_dir = out;
  ctx.key_file = key_file;
  ASSERT_TRUE(FinalizeContext(ctx, "test").ok());
  const absl::Status s = CmdLink(ctx, {});
  EXPECT_EQ(s.code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_TRUE(absl::StrContains(s.message(), "key mismatch suspected"))
      << s.message();
  EXPECT_NE(RunPprl(With({"link", "--key-file", key_file}, Common(out))), 0);
}

TEST(CliTest, RejectsBadArguments) {
  const std::string out = TempDir("cli_bad");
  ASSERT_EQ(RunPprl(With({"generate", "--size", "20"}, Common(out))), 0);
  EXPECT_NE(RunPprl(With({"generate", "--scale", "huge"}, Common(out))), 0);
  EXPECT_NE(RunPprl(With({"derive", "--prune", "sometimes"}, Common(out))), 0);
  EXPECT_NE(RunPprl({"nonsense"}), 0);
  EXPECT_FALSE(ParseScale("huge").ok());
  EXPECT_EQ(*ParseScale("paper"), Scale::kPaper);
}

TEST(CliTest, ConfigDigestTracksParameters) {
  RunContext a;
  a.config_path = DataPath("desk.conf");
  a.out_dir = TempDir("cli_digest");
  RunContext b = a;
  ASSERT_TRUE(FinalizeContext(a, "generate;--size=10").ok());
  ASSERT_TRUE(FinalizeContext(b, "generate;--size=11").ok());
  EXPECT_NE(a.config_digest, b.config_digest);
  RunContext c = a;
  ASSERT_TRUE(FinalizeContext(c, "generate;--size=10").ok());
  EXPECT_EQ(a.config_digest, c.config_digest);
}

}  // namespace
}  // namespace pprl
