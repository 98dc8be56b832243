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

#ifndef VFI_CLI_CLI_H_
#define VFI_CLI_CLI_H_

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "vfi/einfer/compiler.h"
#include "vfi/protocol/message.h"
#include "vfi/protocol/tcp.h"
#include "vfi/protocol/transcript.h"
#include "vfi/ring/prng.h"
#include "vfi/vpack/vpack.h"

namespace vfi::cli {

// ---- split ----------------------------------------------------------------

// Splits a dataset CSV column-wise at `cuts` (owner i gets columns
// [cuts[i], cuts[i+1])) and returns one CSV text per owner.
absl::StatusOr<std::vector<std::string>> SplitCsv(const std::string& csv,
                                                  std::vector<int> cuts);
// Horizontal concatenation of per-owner CSVs (records matched by id).
absl::StatusOr<std::string> JoinCsv(const std::vector<std::string>& parts);
// Feature-matrix shape implied by a dataset's keys.
std::pair<int, int> DatasetShape(const vpack::ClientDataset& data);

// ---- run ------------------------------------------------------------------

// Per-role JSON configuration:
//   role          "client" | "server" | "coordinator" | "all" (in-process)
//   partyId       client index
//   parties       number of clients
//   params        preset name or parameter file
//   paramsHash    optional hex digest the parameters must match
//   sessionId     32 hex digits
//   seed          optional; any string (hashed). Fresh randomness if absent.
//   model         model JSON (weights for server and "all", structure
//                 suffices otherwise)
//   dataset       the client's CSV ("all": the full dataset)
//   cuts          column cuts, one per client
//   mode          "plaintext" | "ciphertext" (server)
//   queries       record ids (coordinator)
//   addresses     {"server": "host:port", "coordinator": ..., "client0": ...}
//   timeoutSec    idle timeout, default 30
//   transcript    optional JSON-lines output path
//   output        optional predictions JSON path (coordinator / "all")
struct RoleConfig {
  std::string role;
  int party_id = 0;
  int parties = 1;
  std::string params;
  std::string params_hash;
  protocol::SessionId session_id{};
  bool has_seed = false;
  ring::Seed seed{};
  std::string model_path;
  std::string dataset_path;
  std::vector<int> cuts;
  einfer::WeightMode mode = einfer::WeightMode::kPlaintext;
  std::vector<std::string> queries;
  protocol::AddressBook addresses;
  double timeout_sec = 30.0;
  std::string transcript_path;
  std::string output_path;
};

absl::StatusOr<RoleConfig> ParseRoleConfig(absl::string_view json_text);
absl::StatusOr<RoleConfig> LoadRoleConfig(const std::string& path);

// Runs the configured role (TCP) or the whole session in-process (role
// "all"). The coordinator writes one line per prediction to `out`.
absl::Status RunRole(const RoleConfig& config, std::ostream& out);

// ---- keygen-ceremony ----------------------------------------------------

struct CeremonySummary {
  int parties = 0;
  std::vector<int> rotations;
  size_t setup_bytes = 0;
  std::map<std::string, size_t> bytes_by_type;
  double seconds = 0.0;
};

// Runs only the setup phase in-process for the model's structure (weights,
// if any, are not used).
absl::StatusOr<CeremonySummary> RunKeygenCeremony(
    const std::string& params, const einfer::ModelSpec& model, int parties,
    const ring::Seed& seed, protocol::Transcript& transcript);

// Model with every weight and bias set to zero.
einfer::ModelSpec ZeroWeights(const einfer::ModelSpec& structure);

// Writes `text` to `path`.
absl::Status WriteFile(const std::string& path, const std::string& text);
absl::StatusOr<std::string> ReadFile(const std::string& path);

}  // namespace vfi::cli

#endif  // VFI_CLI_CLI_H_
