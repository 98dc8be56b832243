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

#ifndef VFI_PROTOCOL_SESSION_H_
#define VFI_PROTOCOL_SESSION_H_

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "vfi/einfer/compiler.h"
#include "vfi/einfer/model.h"
#include "vfi/protocol/roles.h"
#include "vfi/protocol/transcript.h"
#include "vfi/ring/prng.h"
#include "vfi/ring/ring_context.h"
#include "vfi/vpack/vpack.h"

namespace vfi::protocol {

// Order in which the in-process transport delivers pending messages. Every
// order keeps messages on one (sender, receiver) link in send order, like a
// stream transport would.
enum class DeliveryOrder {
  // Newest first: large key shares are consumed as soon as they are sent.
  kDepthFirst,
  kFifo,
  // Uniformly random link at every step (seeded).
  kShuffled,
};

struct InProcessOptions {
  double timeout_sec = 30.0;
  // Roles that never come online: messages to them are dropped.
  std::set<uint16_t> offline;
  DeliveryOrder order = DeliveryOrder::kDepthFirst;
  uint64_t shuffle_seed = 1;
};

// Runs all roles in this process until every online role is done. When no
// message is pending but some role is still waiting, the session times out
// with a timeout error naming the parties it is blocked on (offline ones
// first). A role error is broadcast as an Error message and returned.
absl::Status RunInProcess(std::span<Role* const> roles, Transcript& transcript,
                          const InProcessOptions& options = {});

// First transcript line: session metadata as a JSON object.
std::string SessionHeaderJson(const SessionConfig& session,
                              const einfer::CompiledModel& structure);

// Everything needed to build all roles of one session locally.
struct LocalSessionSpec {
  ring::RingContextPtr ctx;
  einfer::ModelSpec model;  // with weights (only the server keeps them)
  vpack::ColumnPartition partition;
  std::vector<vpack::ClientDataset> datasets;  // one per owner
  std::vector<std::string> queries;
  einfer::WeightMode mode = einfer::WeightMode::kPlaintext;
  ring::Seed seed{};
  SessionId session_id{};
};

struct LocalSession {
  std::vector<std::unique_ptr<ClientRole>> clients;
  std::unique_ptr<ServerRole> server;
  std::unique_ptr<CoordinatorRole> coordinator;

  std::vector<Role*> roles() const;
  // Errors when any role breaks its secrecy rules.
  absl::Status CheckSecrecy() const;
};

absl::StatusOr<LocalSession> BuildLocalSession(const LocalSessionSpec& spec);

// Session id derived from a seed (deterministic runs).
SessionId DeriveSessionId(const ring::Seed& seed);

}  // namespace vfi::protocol

#endif  // VFI_PROTOCOL_SESSION_H_
