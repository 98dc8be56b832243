// Copyright 2026 The VFI Authors
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

#include "vfi/cli/cli.h"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "gtest/gtest.h"
#include "vfi/common/status.h"
#include "vfi/einfer/model.h"
#include "vfi/vpack/vpack.h"

namespace vfi::cli {
namespace {

std::string DataPath(const std::string& rel) {
  return absl::StrCat(VFI_DATA_DIR, "/", rel);
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          absl::StrCat("vfi_cli_test_", getpid(), "_", name))
      .string();
}

// ---- split / join -------------------------------------------------------

TEST(SplitTest, FiveColumnsSplitTwoTwoOne) {
  const std::string csv =
      "id,0,1,2,3,4\n"
      "a,1,2,3,4,5\n"
      "b,6,7,8,9,10\n";
  auto parts = SplitCsv(csv, {0, 2, 4});
  ASSERT_TRUE(parts.ok()) << parts.status();
  ASSERT_EQ(parts->size(), 3u);
  EXPECT_EQ((*parts)[0], "id,0,1\na,1,2\nb,6,7\n");
  EXPECT_EQ((*parts)[1], "id,2,3\na,3,4\nb,8,9\n");
  EXPECT_EQ((*parts)[2], "id,4\na,5\nb,10\n");
  auto joined = JoinCsv(*parts);
  ASSERT_TRUE(joined.ok()) << joined.status();
  EXPECT_EQ(*joined, csv);
}

TEST(SplitTest, SingleCutIsACopy) {
  auto csv = ReadFile(DataPath("datasets/toy_records.csv"));
  ASSERT_TRUE(csv.ok()) << csv.status();
  auto parts = SplitCsv(*csv, {0});
  ASSERT_TRUE(parts.ok()) << parts.status();
  ASSERT_EQ(parts->size(), 1u);
  EXPECT_EQ((*parts)[0], *csv);
}

TEST(SplitTest, ImageSplitJoinsBackExactly) {
  auto csv = ReadFile(DataPath("datasets/mnist_test100.csv"));
  ASSERT_TRUE(csv.ok()) << csv.status();
  for (const std::vector<int>& cuts :
       {std::vector<int>{0, 14}, {0, 9, 18}, {0, 3, 7, 20, 27}}) {
    auto parts = SplitCsv(*csv, cuts);
    ASSERT_TRUE(parts.ok()) << parts.status();
    ASSERT_EQ(parts->size(), cuts.size());
    // Each part holds exactly its column band.
    for (size_t i = 0; i < parts->size(); ++i) {
      auto d = vpack::ParseDatasetCsv((*parts)[i]);
      ASSERT_TRUE(d.ok()) << d.status();
      const int hi = i + 1 < cuts.size() ? cuts[i + 1] : 28;
      EXPECT_EQ(d->features.size(), static_cast<size_t>(28 * (hi - cuts[i])));
      for (const auto& [r, c] : d->features) {
        EXPECT_GE(c, cuts[i]);
        EXPECT_LT(c, hi);
      }
    }
    auto joined = JoinCsv(*parts);
    ASSERT_TRUE(joined.ok()) << joined.status();
    EXPECT_EQ(*joined, *csv);
  }
}

TEST(SplitTest, RejectsBadCuts) {
  const std::string csv = "id,0,1,2\na,1,2,3\n";
  EXPECT_FALSE(SplitCsv(csv, {}).ok());
  EXPECT_FALSE(SplitCsv(csv, {1}).ok());
  EXPECT_FALSE(SplitCsv(csv, {0, 2, 1}).ok());
  EXPECT_FALSE(SplitCsv(csv, {0, 3}).ok());
}

TEST(SplitTest, JoinRejectsMismatchedRecords) {
  EXPECT_FALSE(JoinCsv({"id,0\na,1\n", "id,1\nb,2\n"}).ok());
  EXPECT_FALSE(JoinCsv({}).ok());
}

// ---- role configs -------------------------------------------------------

std::string ClientConfigJson(bool with_server) {
  return absl::StrCat(
      R"({"role": "client", "partyId": 1, "parties": 2, "params": "small",)",
      R"("model": "m.json", "dataset": "d.csv", "cuts": [0, 6],)",
      R"("sessionId": "000102030405060708090a0b0c0d0e0f",)",
      R"("addresses": {"client0": "127.0.0.1:7000", "client1": "10.0.0.2:7001",)",
      with_server ? R"("server": "localhost:7002",)" : "",
      R"("coordinator": "127.0.0.1:7003"}})");
}

TEST(ConfigTest, ParsesAClientConfig) {
  auto c = ParseRoleConfig(ClientConfigJson(true));
  ASSERT_TRUE(c.ok()) << c.status();
  EXPECT_EQ(c->role, "client");
  EXPECT_EQ(c->party_id, 1);
  EXPECT_EQ(c->parties, 2);
  EXPECT_EQ(c->session_id[15], 0x0f);
  EXPECT_EQ(c->addresses.at(protocol::kServerId).host, "localhost");
  EXPECT_EQ(c->addresses.at(1).host, "10.0.0.2");
  EXPECT_EQ(c->addresses.at(1).port, 7001);
  EXPECT_FALSE(c->has_seed);
}

TEST(ConfigTest, MissingServerAddressIsAConfigError) {
  auto c = ParseRoleConfig(ClientConfigJson(false));
  ASSERT_FALSE(c.ok());
  EXPECT_EQ(GetErrorKind(c.status()), ErrorKind::kConfig);
  EXPECT_NE(c.status().message().find("missing address for server"),
            std::string::npos)
      << c.status();
}

TEST(ConfigTest, RejectsMalformedConfigs) {
  for (const std::string& text : {
           std::string("not json"),
           std::string("[1, 2]"),
           std::string(R"({"role": "oracle", "parties": 1, "params": "small",
                           "model": "m", "cuts": [0]})"),
           std::string(R"({"role": "all", "parties": 0, "params": "small",
                           "model": "m", "cuts": [], "dataset": "d"})"),
           std::string(R"({"role": "all", "parties": 2, "params": "small",
                           "model": "m", "cuts": [0], "dataset": "d"})"),
           std::string(R"({"role": "all", "parties": 1, "params": "small",
                           "model": "m", "cuts": [0], "dataset": "d",
                           "sessionId": "abc"})"),
           std::string(R"({"role": "all", "parties": 1, "params": "small",
                           "model": "m", "cuts": [0], "dataset": "d",
                           "mode": "mixed"})"),
           std::string(R"({"role": "all", "parties": "one"})"),
       }) {
    auto c = ParseRoleConfig(text);
    ASSERT_FALSE(c.ok()) << text;
    EXPECT_EQ(GetErrorKind(c.status()), ErrorKind::kConfig) << c.status();
  }
}

TEST(ConfigTest, ParamsHashMismatchIsReported) {
  const std::string cfg = absl::StrCat(
      R"({"role": "all", "parties": 1, "params": "small", "cuts": [0],)",
      R"("paramsHash": "00", "model": ")",
      DataPath("models/toy_mlp.json"), R"(", "dataset": ")",
      DataPath("datasets/toy_records.csv"), R"("})");
  auto c = ParseRoleConfig(cfg);
  ASSERT_TRUE(c.ok()) << c.status();
  std::ostringstream out;
  absl::Status s = RunRole(*c, out);
  EXPECT_EQ(GetErrorKind(s), ErrorKind::kParamsMismatch) << s;
}

// ---- in-process run -----------------------------------------------------

std::vector<double> ParseOutput(const std::string& line) {
  const size_t open = line.find('[');
  const size_t close = line.find(']');
  std::vector<double> y;
  for (absl::string_view v : absl::StrSplit(
           line.substr(open + 1, close - open - 1), ", ", absl::SkipEmpty())) {
    double d = 0;
    EXPECT_TRUE(absl::SimpleAtod(v, &d)) << v;
    y.push_back(d);
  }
  return y;
}

TEST(RunRoleTest, AllRolesInProcessMatchClearInference) {
  const std::string transcript = TempPath("transcript.jsonl");
  const std::string predictions = TempPath("predictions.json");
  const std::string cfg = absl::StrCat(
      R"({"role": "all", "parties": 3, "params": "small", "cuts": [0, 4, 8],)",
      R"("seed": "cli-test", "queries": ["r02", "r07"], "model": ")",
      DataPath("models/toy_mlp.json"), R"(", "dataset": ")",
      DataPath("datasets/toy_records.csv"), R"(", "transcript": ")",
      transcript, R"(", "output": ")", predictions, R"("})");
  auto c = ParseRoleConfig(cfg);
  ASSERT_TRUE(c.ok()) << c.status();
  std::ostringstream out;
  absl::Status s = RunRole(*c, out);
  ASSERT_TRUE(s.ok()) << s;

  auto model = einfer::LoadModel(DataPath("models/toy_mlp.json"));
  ASSERT_TRUE(model.ok()) << model.status();
  auto data = vpack::LoadDatasetCsv(DataPath("datasets/toy_records.csv"));
  ASSERT_TRUE(data.ok()) << data.status();
  std::vector<std::string> lines = absl::StrSplit(out.str(), '\n',
                                                  absl::SkipEmpty());
  ASSERT_EQ(lines.size(), 2u) << out.str();
  const char* ids[] = {"r02", "r07"};
  for (int q = 0; q < 2; ++q) {
    EXPECT_EQ(lines[q].rfind(absl::StrCat("prediction ", ids[q], ":"), 0), 0u);
    auto want = einfer::InferClear(*model,
                                   data->values[data->FindRecord(ids[q])]);
    ASSERT_TRUE(want.ok()) << want.status();
    std::vector<double> got = ParseOutput(lines[q]);
    ASSERT_EQ(got.size(), want->size());
    for (size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i], (*want)[i], 1e-3);
    }
  }
  auto t = ReadFile(transcript);
  ASSERT_TRUE(t.ok()) << t.status();
  EXPECT_NE(t->find("\"msgType\""), std::string::npos);
  auto p = ReadFile(predictions);
  ASSERT_TRUE(p.ok()) << p.status();
  EXPECT_NE(p->find("\"recordId\""), std::string::npos);
  std::filesystem::remove(transcript);
  std::filesystem::remove(predictions);
}

// ---- keygen ceremony ----------------------------------------------------

TEST(CeremonyTest, SetupOnlyAndDeterministic) {
  auto model = einfer::LoadModel(DataPath("models/toy_mlp.json"));
  ASSERT_TRUE(model.ok()) << model.status();
  const ring::Seed seed{};
  protocol::Transcript t2, t3, t3b;
  auto s2 = RunKeygenCeremony("small", einfer::StripWeights(*model), 2, seed,
                              t2);
  auto s3 = RunKeygenCeremony("small", einfer::StripWeights(*model), 3, seed,
                              t3);
  auto s3b = RunKeygenCeremony("small", *model, 3, seed, t3b);
  ASSERT_TRUE(s2.ok()) << s2.status();
  ASSERT_TRUE(s3.ok()) << s3.status();
  ASSERT_TRUE(s3b.ok()) << s3b.status();
  EXPECT_EQ(s3->parties, 3);
  EXPECT_FALSE(s3->rotations.empty());
  EXPECT_EQ(s3->rotations, s2->rotations);
  EXPECT_EQ(s3->setup_bytes, s3b->setup_bytes);
  EXPECT_GT(s3->setup_bytes, s2->setup_bytes);
  for (const char* type : {"TpkBcast", "PkShare", "EvalKeyShareR1",
                           "CpkBcast", "EvalKeyShareR2"}) {
    EXPECT_GT(s3->bytes_by_type.count(type), 0u) << type;
  }
  EXPECT_EQ(t3.BytesInPhase(protocol::Phase::kAggregating), 0u);
  EXPECT_EQ(t3.BytesInPhase(protocol::Phase::kSetup), s3->setup_bytes);
}

TEST(CeremonyTest, ZeroWeightsKeepsStructure) {
  auto model = einfer::LoadModel(DataPath("models/mnist_cnn.json"));
  ASSERT_TRUE(model.ok()) << model.status();
  einfer::ModelSpec zero = ZeroWeights(einfer::StripWeights(*model));
  EXPECT_TRUE(zero.has_weights);
  EXPECT_EQ(einfer::ParameterCount(zero), einfer::ParameterCount(*model));
  EXPECT_TRUE(einfer::ValidateModel(zero).ok());
}

TEST(FileTest, ReadMissingFileIsAnIoError) {
  auto r = ReadFile("/nonexistent/vfi/file");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(GetErrorKind(r.status()), ErrorKind::kIo);
}

}  // namespace
}  // namespace vfi::cli
