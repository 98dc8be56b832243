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

// vfi: operator entry point for vertically partitioned encrypted inference.
//
//   vfi split --input data.csv --cuts 0,10,20 --out-dir parts
//   vfi keygen-ceremony --preset paper8192 --model cnn.structure.json -n 3
//   vfi run --config client0.json
//   vfi bench --preset small --model cnn.json --dataset digits.csv --out b.csv
//
// Set VFI_LOG_LEVEL=quiet|info|debug to control diagnostics on stderr.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "vfi/bench/bench.h"
#include "vfi/cli/cli.h"
#include "vfi/common/status.h"
#include "vfi/einfer/model.h"
#include "vfi/ring/params.h"
#include "vfi/ring/prng.h"
#include "vfi/ring/ring_context.h"
#include "vfi/vpack/vpack.h"

namespace {

enum class LogLevel { kQuiet, kInfo, kDebug };

LogLevel GetLogLevel() {
  const char* v = std::getenv("VFI_LOG_LEVEL");
  if (v == nullptr) return LogLevel::kInfo;
  const std::string s(v);
  if (s == "quiet") return LogLevel::kQuiet;
  if (s == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void Info(const std::string& line) {
  if (GetLogLevel() != LogLevel::kQuiet) std::cerr << line << "\n";
}

int Report(const absl::Status& status) {
  if (status.ok()) return 0;
  std::cerr << "error [" << vfi::ErrorKindName(vfi::GetErrorKind(status))
            << "]: " << status.message() << "\n";
  return vfi::GetErrorKind(status) == vfi::ErrorKind::kConfig ? 2 : 1;
}

vfi::ring::Seed SeedFrom(const std::string& text) {
  return vfi::ring::Sha256(std::span(
      reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

absl::Status Split(const std::string& input, const std::vector<int>& cuts,
                   const std::string& out_dir, const std::string& prefix) {
  auto csv = vfi::cli::ReadFile(input);
  if (!csv.ok()) return csv.status();
  auto parts = vfi::cli::SplitCsv(*csv, cuts);
  if (!parts.ok()) return parts.status();
  for (size_t i = 0; i < parts->size(); ++i) {
    const std::string path = absl::StrCat(out_dir, "/", prefix, i, ".csv");
    absl::Status s = vfi::cli::WriteFile(path, (*parts)[i]);
    if (!s.ok()) return s;
    Info(absl::StrCat("wrote ", path));
  }
  return absl::OkStatus();
}

absl::Status Join(const std::vector<std::string>& inputs,
                  const std::string& output) {
  std::vector<std::string> parts;
  for (const auto& p : inputs) {
    auto text = vfi::cli::ReadFile(p);
    if (!text.ok()) return text.status();
    parts.push_back(*std::move(text));
  }
  auto joined = vfi::cli::JoinCsv(parts);
  if (!joined.ok()) return joined.status();
  if (output.empty()) {
    std::cout << *joined;
    return absl::OkStatus();
  }
  return vfi::cli::WriteFile(output, *joined);
}

absl::Status Ceremony(const std::string& preset, const std::string& model_path,
                      int parties, const std::string& seed,
                      const std::string& transcript_path) {
  auto params = vfi::ring::ResolveParams(preset);
  if (!params.ok()) return params.status();
  auto model = vfi::einfer::LoadModel(model_path, params->max_level());
  if (!model.ok()) return model.status();
  vfi::protocol::Transcript transcript;
  auto summary = vfi::cli::RunKeygenCeremony(preset, *model, parties,
                                             SeedFrom(seed), transcript);
  if (!summary.ok()) return summary.status();
  std::cout << "parties: " << summary->parties << "\n"
            << "rotations (" << summary->rotations.size()
            << "): " << absl::StrJoin(summary->rotations, ",") << "\n"
            << "setup bytes: " << summary->setup_bytes << "\n";
  for (const auto& [type, bytes] : summary->bytes_by_type) {
    std::cout << "  " << type << ": " << bytes << "\n";
  }
  std::cout << "seconds: " << summary->seconds << "\n";
  if (!transcript_path.empty()) {
    return vfi::cli::WriteFile(transcript_path, transcript.ToJsonLines());
  }
  return absl::OkStatus();
}

absl::Status Bench(const std::string& preset, const std::string& model_path,
                   const std::string& dataset_path, int min_n, int max_n,
                   int queries, bool plain, bool cipher,
                   const std::string& seed, const std::string& out) {
  auto params = vfi::ring::ResolveParams(preset);
  if (!params.ok()) return params.status();
  auto ctx = vfi::ring::RingContext::Create(*params);
  if (!ctx.ok()) return ctx.status();
  auto model = vfi::einfer::LoadModel(model_path, params->max_level());
  if (!model.ok()) return model.status();
  auto data = vfi::vpack::LoadDatasetCsv(dataset_path);
  if (!data.ok()) return data.status();
  vfi::bench::BenchOptions o;
  o.ctx = *ctx;
  o.model = *model;
  o.dataset = *data;
  o.min_parties = min_n;
  o.max_parties = max_n;
  o.queries = queries;
  o.plaintext_model = plain;
  o.ciphertext_model = cipher;
  o.seed = SeedFrom(seed);
  auto records = vfi::bench::RunBench(o);
  if (!records.ok()) return records.status();
  const std::string csv = vfi::bench::BenchCsv(*records);
  if (out.empty()) {
    std::cout << csv;
  } else {
    absl::Status s = vfi::cli::WriteFile(out, csv);
    if (!s.ok()) return s;
    Info(absl::StrCat("wrote ", out));
  }
  // Context only: reference figures for three clients next to ours.
  std::cerr << "phase        N  local_s     local_MB   reference_s  "
               "reference_MB\n";
  for (const auto& ref : vfi::bench::ReferenceTable()) {
    for (const auto& r : *records) {
      if (r.phase == ref.phase && r.parties == 3) {
        std::cerr << absl::StrCat(r.phase, std::string(13 - r.phase.size(), ' '),
                                  r.parties, "  ", r.wall_time_sec, "  ",
                                  r.bytes / 1e6, "  ", ref.time_sec, "  ",
                                  ref.megabytes)
                  << "\n";
      }
    }
  }
  for (const char* phase : {"keygen", "concat", "distDecrypt"}) {
    Info(absl::StrCat(phase, " bytes affine residual: ",
                      vfi::bench::AffineResidual(*records, phase)));
  }
  return absl::OkStatus();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vertically partitioned encrypted inference"};
  app.require_subcommand(1);

  std::string input, out_dir = ".", prefix = "client", output;
  std::vector<int> cuts;
  auto* split = app.add_subcommand("split", "split a dataset column-wise");
  split->add_option("--input", input, "dataset CSV")->required();
  split->add_option("--cuts", cuts, "column cuts, e.g. 0,10,20")
      ->required()
      ->delimiter(',');
  split->add_option("--out-dir", out_dir, "output directory");
  split->add_option("--prefix", prefix, "output file prefix");

  std::vector<std::string> join_inputs;
  auto* join = app.add_subcommand("join", "re-join split CSVs");
  join->add_option("inputs", join_inputs, "per-client CSVs")->required();
  join->add_option("--output", output, "output CSV (default stdout)");

  std::string preset = "paper8192", model_path, seed = "vfi", transcript;
  int parties = 3;
  auto* ceremony =
      app.add_subcommand("keygen-ceremony", "run the setup phase in-process");
  ceremony->add_option("--preset", preset, "preset name or params file");
  ceremony->add_option("--model", model_path, "model or structure JSON")
      ->required();
  ceremony->add_option("-n,--parties", parties, "number of clients");
  ceremony->add_option("--seed", seed, "deterministic seed");
  ceremony->add_option("--transcript", transcript, "JSON-lines transcript");

  std::string config, transport;
  auto* run = app.add_subcommand("run", "run one role (or all in-process)");
  run->add_option("--config", config, "role config JSON")->required();
  run->add_option("--transport", transport,
                  "tcp | inproc (overrides the config's role for inproc)")
      ->check(CLI::IsMember({"tcp", "inproc"}));

  std::string dataset, bench_out;
  int min_n = 2, max_n = 14, queries = 1;
  bool no_plain = false, no_cipher = false;
  auto* bench = app.add_subcommand("bench", "sweep the number of clients");
  bench->add_option("--preset", preset, "preset name or params file");
  bench->add_option("--model", model_path, "model JSON")->required();
  bench->add_option("--dataset", dataset, "full dataset CSV")->required();
  bench->add_option("--min-n", min_n, "smallest N");
  bench->add_option("--max-n", max_n, "largest N");
  bench->add_option("--queries", queries, "queries per session");
  bench->add_flag("--no-plain", no_plain, "skip plaintext-model sessions");
  bench->add_flag("--no-cipher", no_cipher, "skip ciphertext-model sessions");
  bench->add_option("--seed", seed, "deterministic seed");
  bench->add_option("--out", bench_out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (*split) return Report(Split(input, cuts, out_dir, prefix));
  if (*join) return Report(Join(join_inputs, output));
  if (*ceremony) {
    return Report(Ceremony(preset, model_path, parties, seed, transcript));
  }
  if (*run) {
    auto cfg = vfi::cli::LoadRoleConfig(config);
    if (!cfg.ok()) return Report(cfg.status());
    if (transport == "inproc") cfg->role = "all";
    if (transport == "tcp" && cfg->role == "all") {
      return Report(vfi::ConfigError("role 'all' runs in-process only"));
    }
    return Report(vfi::cli::RunRole(*cfg, std::cout));
  }
  if (*bench) {
    return Report(Bench(preset, model_path, dataset, min_n, max_n, queries,
                        !no_plain, !no_cipher, seed, bench_out));
  }
  return 0;
}
