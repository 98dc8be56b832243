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

#include "vfi/protocol/session.h"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "json.hpp"
#include "vfi/common/status_macros.h"

namespace vfi::protocol {
namespace {

using nlohmann::json;

struct Pending {
  uint64_t seq = 0;
  uint16_t from = 0;
  uint16_t to = 0;
  Bytes frame;
};

std::string NameList(const std::vector<uint16_t>& ids) {
  return absl::StrJoin(ids, ", ", [](std::string* out, uint16_t id) {
    out->append(PartyName(id));
  });
}

}  // namespace

std::string SessionHeaderJson(const SessionConfig& session,
                              const einfer::CompiledModel& structure) {
  const auto& params = session.ctx->params();
  json j;
  j["session"] = ToHex(session.session_id);
  j["params"] = params.name;
  j["paramsHash"] = ToHex(session.ctx->params_hash());
  j["parties"] = session.parties;
  j["layout"] = {{"gap", structure.layout.gap},
                 {"period", structure.layout.period},
                 {"replication", structure.layout.replication},
                 {"slots", structure.layout.total_slots}};
  j["rotations"] = structure.rotations;
  return j.dump();
}

absl::Status RunInProcess(std::span<Role* const> roles, Transcript& transcript,
                          const InProcessOptions& options) {
  std::map<uint16_t, Role*> by_id;
  for (Role* r : roles) by_id[r->id()] = r;
  const auto online = [&](uint16_t id) {
    return by_id.count(id) && !options.offline.count(id);
  };

  std::deque<Pending> queue;
  uint64_t next_seq = 0;
  std::mt19937_64 rng(options.shuffle_seed);

  const auto send = [&](const std::vector<Envelope>& out) {
    std::vector<Pending> batch;
    for (const Envelope& e : out) {
      Bytes frame = EncodeMessage(e.msg);
      transcript.Record(e.phase, e.msg, e.to, frame.size());
      if (!online(e.to)) continue;
      batch.push_back(Pending{next_seq++, e.msg.sender, e.to, std::move(frame)});
    }
    if (options.order == DeliveryOrder::kDepthFirst) {
      queue.insert(queue.begin(), std::make_move_iterator(batch.begin()),
                   std::make_move_iterator(batch.end()));
    } else {
      for (auto& p : batch) queue.push_back(std::move(p));
    }
  };
  // Sends the failure to every online peer (fail-stop) and returns it.
  const auto abort = [&](Role& origin, const absl::Status& status) {
    for (const Envelope& e : origin.ErrorEnvelopes(status)) {
      Bytes frame = EncodeMessage(e.msg);
      transcript.Record(e.phase, e.msg, e.to, frame.size());
      if (online(e.to)) (void)by_id[e.to]->HandleFrame(frame);
    }
    return status;
  };

  for (Role* r : roles) {
    if (options.offline.count(r->id())) continue;
    auto out = r->Start();
    if (!out.ok()) return abort(*r, out.status());
    send(*out);
  }

  while (true) {
    if (queue.empty()) {
      std::vector<uint16_t> waiting;
      Role* blocked = nullptr;
      Phase phase = Phase::kDone;
      for (Role* r : roles) {
        if (!online(r->id()) || r->done()) continue;
        if (!blocked) blocked = r;
        phase = std::min(phase, r->phase());
        for (uint16_t id : r->WaitingOn()) waiting.push_back(id);
      }
      if (!blocked) return absl::OkStatus();
      std::sort(waiting.begin(), waiting.end());
      waiting.erase(std::unique(waiting.begin(), waiting.end()),
                    waiting.end());
      std::vector<uint16_t> missing;
      for (uint16_t id : waiting) {
        if (!online(id)) missing.push_back(id);
      }
      if (missing.empty()) missing = waiting;
      return abort(*blocked,
                   TimeoutError(absl::StrCat(
                       "phase ", PhaseName(phase), ": timed out after ",
                       options.timeout_sec, " s waiting for ",
                       NameList(missing))));
    }

    size_t pick = 0;
    if (options.order == DeliveryOrder::kShuffled) {
      pick = std::uniform_int_distribution<size_t>(0, queue.size() - 1)(rng);
    }
    // Keep per-link order: deliver the oldest message on the chosen link.
    for (size_t i = 0; i < queue.size(); ++i) {
      if (queue[i].from == queue[pick].from && queue[i].to == queue[pick].to &&
          queue[i].seq < queue[pick].seq) {
        pick = i;
      }
    }
    Pending p = std::move(queue[pick]);
    queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(pick));
    Role& receiver = *by_id[p.to];
    auto out = receiver.HandleFrame(p.frame);
    p.frame.clear();
    if (!out.ok()) return abort(receiver, out.status());
    send(*out);
  }
}

std::vector<Role*> LocalSession::roles() const {
  std::vector<Role*> out;
  for (const auto& c : clients) out.push_back(c.get());
  out.push_back(server.get());
  out.push_back(coordinator.get());
  return out;
}

absl::Status LocalSession::CheckSecrecy() const {
  for (Role* r : roles()) VFI_RETURN_IF_ERROR(CheckRoleSecrecy(*r));
  return absl::OkStatus();
}

SessionId DeriveSessionId(const ring::Seed& seed) {
  const ring::Seed d = ring::DeriveSeed(seed, "session-id");
  SessionId id{};
  std::copy_n(d.begin(), id.size(), id.begin());
  return id;
}

absl::StatusOr<LocalSession> BuildLocalSession(const LocalSessionSpec& spec) {
  const int parties = spec.partition.parties();
  if (static_cast<int>(spec.datasets.size()) != parties) {
    return ConfigError(absl::StrCat("partition has ", parties,
                                    " owners but ", spec.datasets.size(),
                                    " datasets were given"));
  }
  SessionConfig session{spec.ctx, spec.session_id, parties};
  LocalSession out;
  for (int i = 0; i < parties; ++i) {
    ClientConfig c;
    c.session = session;
    c.party = i;
    c.model = spec.model;
    c.partition = spec.partition;
    c.dataset = spec.datasets[i];
    c.seed = spec.seed;
    VFI_ASSIGN_OR_RETURN(auto client, ClientRole::Create(std::move(c)));
    out.clients.push_back(std::move(client));
  }
  ServerConfig s{session, spec.model, spec.mode, spec.seed};
  VFI_ASSIGN_OR_RETURN(out.server, ServerRole::Create(std::move(s)));
  CoordinatorConfig k{session, spec.model, spec.queries, spec.seed};
  VFI_ASSIGN_OR_RETURN(out.coordinator, CoordinatorRole::Create(std::move(k)));
  return out;
}

}  // namespace vfi::protocol
