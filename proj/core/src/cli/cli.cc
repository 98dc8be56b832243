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

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>

#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "json.hpp"
#include "vfi/common/bytes.h"
#include "vfi/common/status_macros.h"
#include "vfi/protocol/roles.h"
#include "vfi/protocol/session.h"
#include "vfi/ring/params.h"
#include "vfi/ring/ring_context.h"

namespace vfi::cli {
namespace {

using nlohmann::json;

absl::StatusOr<ring::RingContextPtr> MakeContext(const std::string& params) {
  VFI_ASSIGN_OR_RETURN(ring::CryptoParams p, ring::ResolveParams(params));
  return ring::RingContext::Create(p);
}

std::string PredictionsJson(const std::vector<protocol::Prediction>& preds) {
  json j = json::array();
  for (const auto& p : preds) {
    j.push_back({{"recordId", p.record_id},
                 {"output", p.output},
                 {"argmax", p.argmax}});
  }
  return j.dump(1);
}

void PrintPredictions(const std::vector<protocol::Prediction>& preds,
                      std::ostream& out) {
  for (const auto& p : preds) {
    out << "prediction " << p.record_id << ": argmax=" << p.argmax << " y=["
        << absl::StrJoin(p.output, ", ") << "]\n";
  }
}

absl::Status Check(bool ok, absl::string_view message) {
  return ok ? absl::OkStatus() : ConfigError(message);
}

}  // namespace

absl::Status WriteFile(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) return IoError(absl::StrCat("cannot open ", path, " for writing"));
  f << text;
  if (!f) return IoError(absl::StrCat("cannot write ", path));
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return IoError(absl::StrCat("cannot open ", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::pair<int, int> DatasetShape(const vpack::ClientDataset& data) {
  int h = 0, w = 0;
  for (const auto& [r, c] : data.features) {
    h = std::max(h, r + 1);
    w = std::max(w, c + 1);
  }
  return {h, w};
}

absl::StatusOr<std::vector<std::string>> SplitCsv(const std::string& csv,
                                                  std::vector<int> cuts) {
  VFI_ASSIGN_OR_RETURN(vpack::ClientDataset full, vpack::ParseDatasetCsv(csv));
  const auto [h, w] = DatasetShape(full);
  VFI_ASSIGN_OR_RETURN(vpack::ColumnPartition part,
                       vpack::MakePartition(h, w, std::move(cuts)));
  VFI_ASSIGN_OR_RETURN(auto split, vpack::SplitDataset(full, part));
  std::vector<std::string> out;
  for (const auto& d : split) out.push_back(vpack::DatasetToCsv(d, h));
  return out;
}

absl::StatusOr<std::string> JoinCsv(const std::vector<std::string>& parts) {
  if (parts.empty()) return ConfigError("nothing to join");
  vpack::ClientDataset full;
  for (size_t i = 0; i < parts.size(); ++i) {
    VFI_ASSIGN_OR_RETURN(vpack::ClientDataset d,
                         vpack::ParseDatasetCsv(parts[i]));
    if (i == 0) {
      full.record_ids = d.record_ids;
      full.values.resize(d.record_ids.size());
    } else if (d.record_ids != full.record_ids) {
      return ShapeError(absl::StrCat("part ", i, " has different records"));
    }
    full.features.insert(full.features.end(), d.features.begin(),
                         d.features.end());
    for (size_t r = 0; r < d.values.size(); ++r) {
      full.values[r].insert(full.values[r].end(), d.values[r].begin(),
                            d.values[r].end());
    }
  }
  // Restore row-major feature order.
  std::vector<size_t> order(full.features.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return full.features[a] < full.features[b];
  });
  vpack::ClientDataset sorted;
  sorted.record_ids = full.record_ids;
  for (size_t k : order) sorted.features.push_back(full.features[k]);
  for (const auto& row : full.values) {
    std::vector<double> v;
    for (size_t k : order) v.push_back(row[k]);
    sorted.values.push_back(std::move(v));
  }
  const auto [h, w] = DatasetShape(sorted);
  if (static_cast<int>(sorted.features.size()) != h * w) {
    return ShapeError("parts do not cover a full feature matrix");
  }
  return vpack::DatasetToCsv(sorted, h);
}

absl::StatusOr<RoleConfig> ParseRoleConfig(absl::string_view json_text) {
  json j;
  try {
    j = json::parse(std::string(json_text));
  } catch (const std::exception& e) {
    return ConfigError(absl::StrCat("config JSON: ", e.what()));
  }
  if (!j.is_object()) return ConfigError("config must be a JSON object");
  RoleConfig c;
  try {
    c.role = j.value("role", "");
    if (c.role != "client" && c.role != "server" && c.role != "coordinator" &&
        c.role != "all") {
      return ConfigError(absl::StrCat("unknown role '", c.role, "'"));
    }
    c.party_id = j.value("partyId", 0);
    c.parties = j.value("parties", 0);
    VFI_RETURN_IF_ERROR(Check(c.parties >= 1 && c.parties < 0xF000,
                              "'parties' must be a positive count"));
    c.params = j.value("params", "");
    VFI_RETURN_IF_ERROR(Check(!c.params.empty(), "missing 'params'"));
    c.params_hash = j.value("paramsHash", "");
    const std::string sid = j.value("sessionId", "");
    if (!sid.empty()) {
      auto bytes = FromHex(sid);
      if (!bytes.ok() || bytes->size() != c.session_id.size()) {
        return ConfigError("'sessionId' must be 32 hex digits");
      }
      std::copy(bytes->begin(), bytes->end(), c.session_id.begin());
    }
    if (j.contains("seed")) {
      const std::string s = j["seed"].is_string() ? j["seed"].get<std::string>()
                                                  : j["seed"].dump();
      c.has_seed = true;
      c.seed = ring::Sha256(
          std::span(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
    }
    c.model_path = j.value("model", "");
    c.dataset_path = j.value("dataset", "");
    if (j.contains("cuts")) c.cuts = j["cuts"].get<std::vector<int>>();
    const std::string mode = j.value("mode", "plaintext");
    if (mode == "plaintext") {
      c.mode = einfer::WeightMode::kPlaintext;
    } else if (mode == "ciphertext") {
      c.mode = einfer::WeightMode::kCiphertext;
    } else {
      return ConfigError(absl::StrCat("unknown mode '", mode, "'"));
    }
    if (j.contains("queries")) {
      c.queries = j["queries"].get<std::vector<std::string>>();
    }
    if (j.contains("addresses")) {
      for (const auto& [key, value] : j["addresses"].items()) {
        uint16_t id = 0;
        uint32_t n = 0;
        if (key == "server") {
          id = protocol::kServerId;
        } else if (key == "coordinator") {
          id = protocol::kCoordinatorId;
        } else if (absl::StartsWith(key, "client") &&
                   absl::SimpleAtoi(key.substr(6), &n) && n < 0xF000) {
          id = static_cast<uint16_t>(n);
        } else {
          return ConfigError(absl::StrCat("unknown address key '", key, "'"));
        }
        VFI_ASSIGN_OR_RETURN(c.addresses[id],
                             protocol::ParseEndpoint(value.get<std::string>()));
      }
    }
    c.timeout_sec = j.value("timeoutSec", 30.0);
    VFI_RETURN_IF_ERROR(Check(c.timeout_sec > 0, "'timeoutSec' must be > 0"));
    c.transcript_path = j.value("transcript", "");
    c.output_path = j.value("output", "");
  } catch (const json::exception& e) {
    return ConfigError(absl::StrCat("config field has the wrong type: ",
                                    e.what()));
  }
  VFI_RETURN_IF_ERROR(Check(!c.model_path.empty(), "missing 'model'"));
  VFI_RETURN_IF_ERROR(Check(static_cast<int>(c.cuts.size()) == c.parties,
                            "'cuts' needs one entry per client"));
  if (c.role == "client" || c.role == "all") {
    VFI_RETURN_IF_ERROR(Check(!c.dataset_path.empty(), "missing 'dataset'"));
  }
  if (c.role == "client") {
    VFI_RETURN_IF_ERROR(Check(c.party_id >= 0 && c.party_id < c.parties,
                              "'partyId' out of range"));
  }
  if (c.role != "all") {
    for (int i = 0; i < c.parties; ++i) {
      VFI_RETURN_IF_ERROR(Check(c.addresses.count(static_cast<uint16_t>(i)),
                                absl::StrCat("missing address for client", i)));
    }
    VFI_RETURN_IF_ERROR(Check(c.addresses.count(protocol::kServerId),
                              "missing address for server"));
    VFI_RETURN_IF_ERROR(Check(c.addresses.count(protocol::kCoordinatorId),
                              "missing address for coordinator"));
  }
  return c;
}

absl::StatusOr<RoleConfig> LoadRoleConfig(const std::string& path) {
  VFI_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  return ParseRoleConfig(text);
}

absl::Status RunRole(const RoleConfig& c, std::ostream& out) {
  VFI_ASSIGN_OR_RETURN(ring::RingContextPtr ctx, MakeContext(c.params));
  if (!c.params_hash.empty() && c.params_hash != ToHex(ctx->params_hash())) {
    return ParamsMismatchError(absl::StrCat(
        "parameters '", c.params, "' hash to ", ToHex(ctx->params_hash()),
        ", config expects ", c.params_hash));
  }
  VFI_ASSIGN_OR_RETURN(einfer::ModelSpec model,
                       einfer::LoadModel(c.model_path, ctx->max_level()));
  VFI_ASSIGN_OR_RETURN(vpack::ColumnPartition part,
                       vpack::MakePartition(model.input_height,
                                            model.input_width, c.cuts));
  const ring::Seed seed = c.has_seed ? c.seed : ring::Prng::SystemSeed();
  protocol::SessionConfig session{ctx, c.session_id, c.parties};
  VFI_ASSIGN_OR_RETURN(vpack::PackLayout layout,
                       vpack::LayoutForModel(model, ctx->params()));
  VFI_ASSIGN_OR_RETURN(einfer::CompiledModel structure,
                       einfer::CompileStructure(einfer::StripWeights(model),
                                                layout, ctx->params()));
  protocol::Transcript transcript;
  transcript.SetHeader(protocol::SessionHeaderJson(session, structure));

  std::vector<protocol::Prediction> predictions;
  absl::Status status;
  if (c.role == "all") {
    VFI_ASSIGN_OR_RETURN(vpack::ClientDataset full,
                         vpack::LoadDatasetCsv(c.dataset_path));
    protocol::LocalSessionSpec spec;
    spec.ctx = ctx;
    spec.model = model;
    spec.partition = part;
    VFI_ASSIGN_OR_RETURN(spec.datasets, vpack::SplitDataset(full, part));
    spec.queries = c.queries;
    spec.mode = c.mode;
    spec.seed = seed;
    spec.session_id = c.session_id;
    VFI_ASSIGN_OR_RETURN(protocol::LocalSession local,
                         protocol::BuildLocalSession(spec));
    protocol::InProcessOptions opts;
    opts.timeout_sec = c.timeout_sec;
    status = protocol::RunInProcess(local.roles(), transcript, opts);
    if (status.ok()) status = local.CheckSecrecy();
    predictions = local.coordinator->predictions();
  } else {
    std::unique_ptr<protocol::Role> role;
    protocol::CoordinatorRole* coordinator = nullptr;
    if (c.role == "client") {
      VFI_ASSIGN_OR_RETURN(vpack::ClientDataset data,
                           vpack::LoadDatasetCsv(c.dataset_path));
      protocol::ClientConfig cc{session, c.party_id, model, part,
                                std::move(data), seed};
      VFI_ASSIGN_OR_RETURN(role, protocol::ClientRole::Create(std::move(cc)));
    } else if (c.role == "server") {
      protocol::ServerConfig sc{session, model, c.mode, seed};
      VFI_ASSIGN_OR_RETURN(role, protocol::ServerRole::Create(std::move(sc)));
    } else {
      protocol::CoordinatorConfig kc{session, model, c.queries, seed};
      VFI_ASSIGN_OR_RETURN(auto coord,
                           protocol::CoordinatorRole::Create(std::move(kc)));
      coordinator = coord.get();
      role = std::move(coord);
    }
    VFI_ASSIGN_OR_RETURN(protocol::TcpListener listener,
                         protocol::TcpListener::Bind(c.addresses.at(role->id())));
    protocol::TcpOptions opts;
    opts.timeout_sec = c.timeout_sec;
    status = protocol::RunRoleOverTcp(*role, std::move(listener), c.addresses,
                                      transcript, opts);
    if (status.ok()) status = protocol::CheckRoleSecrecy(*role);
    if (coordinator) predictions = coordinator->predictions();
  }
  if (!c.transcript_path.empty()) {
    VFI_RETURN_IF_ERROR(WriteFile(c.transcript_path, transcript.ToJsonLines()));
  }
  if (c.role == "all" || c.role == "coordinator") {
    PrintPredictions(predictions, out);
    if (!c.output_path.empty()) {
      VFI_RETURN_IF_ERROR(WriteFile(c.output_path, PredictionsJson(predictions)));
    }
  }
  return status;
}

einfer::ModelSpec ZeroWeights(const einfer::ModelSpec& structure) {
  einfer::ModelSpec m = structure;
  for (auto& layer : m.layers) {
    if (auto* d = std::get_if<einfer::DenseLayer>(&layer)) {
      d->weights.assign(static_cast<size_t>(d->rows) * d->cols, 0.0);
      d->bias.assign(d->rows, 0.0);
    } else if (auto* cv = std::get_if<einfer::Conv2dLayer>(&layer)) {
      cv->weights.assign(static_cast<size_t>(cv->out_channels) *
                             cv->in_channels * cv->kernel_h * cv->kernel_w,
                         0.0);
      cv->bias.assign(cv->out_channels, 0.0);
    }
  }
  m.has_weights = true;
  return m;
}

absl::StatusOr<CeremonySummary> RunKeygenCeremony(
    const std::string& params, const einfer::ModelSpec& model, int parties,
    const ring::Seed& seed, protocol::Transcript& transcript) {
  VFI_ASSIGN_OR_RETURN(ring::RingContextPtr ctx, MakeContext(params));
  protocol::LocalSessionSpec spec;
  spec.ctx = ctx;
  spec.model = ZeroWeights(model);
  VFI_ASSIGN_OR_RETURN(spec.partition,
                       vpack::EvenPartition(model.input_height,
                                            model.input_width, parties));
  // Empty per-owner datasets: no query is issued.
  for (int i = 0; i < parties; ++i) {
    vpack::ClientDataset d;
    for (int r = 0; r < model.input_height; ++r) {
      for (int col = spec.partition.begin(i); col < spec.partition.end(i);
           ++col) {
        d.features.push_back({r, col});
      }
    }
    spec.datasets.push_back(std::move(d));
  }
  spec.seed = seed;
  spec.session_id = protocol::DeriveSessionId(seed);
  VFI_ASSIGN_OR_RETURN(protocol::LocalSession local,
                       protocol::BuildLocalSession(spec));
  transcript.SetHeader(protocol::SessionHeaderJson(
      {ctx, spec.session_id, parties}, local.server->compiled()));
  const auto t0 = std::chrono::steady_clock::now();
  VFI_RETURN_IF_ERROR(protocol::RunInProcess(local.roles(), transcript));
  VFI_RETURN_IF_ERROR(local.CheckSecrecy());
  CeremonySummary s;
  s.parties = parties;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t0)
                  .count();
  s.rotations = local.server->compiled().rotations;
  s.setup_bytes = transcript.BytesInPhase(protocol::Phase::kSetup);
  for (const auto& e : transcript.entries()) {
    if (e.phase == protocol::Phase::kSetup) {
      s.bytes_by_type[std::string(protocol::MsgTypeName(e.type))] += e.bytes;
    }
  }
  return s;
}

}  // namespace vfi::cli
