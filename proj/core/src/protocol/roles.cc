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

#include "vfi/protocol/roles.h"

#include <algorithm>
#include <chrono>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "vfi/ckks/encoder.h"
#include "vfi/ckks/encryptor.h"
#include "vfi/ckks/evaluator.h"
#include "vfi/common/status_macros.h"

namespace vfi::protocol {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void AddDigits(std::vector<ring::RnsPoly>& acc,
               const std::vector<ring::RnsPoly>& x) {
  if (acc.empty()) {
    acc = x;
    return;
  }
  for (size_t j = 0; j < acc.size(); ++j) acc[j].AddInPlace(x[j]);
}

bool IsClient(uint16_t id, int parties) { return id < parties; }

}  // namespace

Phase MessagePhase(MsgType type, std::span<const uint8_t> payload) {
  switch (type) {
    case MsgType::kTpkBcast:
    case MsgType::kPkShare:
    case MsgType::kEvalKeyShareR1:
    case MsgType::kCpkBcast:
    case MsgType::kEvalKeyShareR2:
      return Phase::kSetup;
    case MsgType::kQuery:
    case MsgType::kInputCt:
      return Phase::kAggregating;
    case MsgType::kResultCt:
      return Phase::kInferring;
    case MsgType::kKsShare:
      return Phase::kDecrypting;
    case MsgType::kAck:
      return !payload.empty() &&
                     payload[0] == static_cast<uint8_t>(AckCode::kSessionDone)
                 ? Phase::kDone
                 : Phase::kSetup;
    case MsgType::kError:
      break;
  }
  return Phase::kSetup;
}

// ---- Role. -----------------------------------------------------------------

Role::Role(RoleKind kind, uint16_t id, SessionConfig session)
    : kind_(kind), id_(id), session_(std::move(session)) {
  params_hash_ = session_.ctx->params_hash();
}

absl::StatusOr<std::vector<Envelope>> Role::Start() {
  return std::vector<Envelope>{};
}

absl::StatusOr<std::vector<Envelope>> Role::HandleFrame(
    std::span<const uint8_t> frame) {
  VFI_ASSIGN_OR_RETURN(Message m, DecodeMessage(frame));
  return Handle(m);
}

absl::StatusOr<std::vector<Envelope>> Role::Handle(const Message& m) {
  if (m.session_id != session_.session_id) {
    return ProtocolError(absl::StrCat("message from ", PartyName(m.sender),
                                      " belongs to another session"));
  }
  if (m.params_hash != params_hash_) {
    return ParamsMismatchError(
        absl::StrCat(PartyName(m.sender), " uses different parameters"));
  }
  const bool known_sender = IsClient(m.sender, parties()) ||
                            m.sender == kServerId ||
                            m.sender == kCoordinatorId;
  if (!known_sender || m.sender == id_) {
    return ProtocolError(absl::StrCat("unexpected sender id ", m.sender));
  }
  if (m.type == MsgType::kError) {
    VFI_ASSIGN_OR_RETURN(ErrorPayload e, DecodeError(m.payload));
    received_.insert(m.type);
    return MakeError(e.kind, absl::StrCat(PartyName(m.sender),
                                          " aborted the session: ", e.message));
  }
  if (done()) {
    return ProtocolError(absl::StrCat(PartyName(id_), " received ",
                                      MsgTypeName(m.type),
                                      " after the session finished"));
  }
  if (!Accepts(m.type, m.sender)) {
    return ProtocolError(absl::StrCat(PartyName(id_), " does not accept ",
                                      MsgTypeName(m.type), " from ",
                                      PartyName(m.sender)));
  }
  auto out = OnMessage(m);
  if (out.ok()) received_.insert(m.type);
  return out;
}

std::vector<uint16_t> Role::Peers() const {
  std::vector<uint16_t> out;
  for (int i = 0; i < parties(); ++i) {
    if (i != id_) out.push_back(static_cast<uint16_t>(i));
  }
  if (id_ != kServerId) out.push_back(kServerId);
  if (id_ != kCoordinatorId) out.push_back(kCoordinatorId);
  return out;
}

std::vector<Envelope> Role::ErrorEnvelopes(const absl::Status& status) const {
  ErrorPayload e;
  e.kind = GetErrorKind(status);
  e.message = std::string(status.message());
  std::vector<Envelope> out;
  for (uint16_t peer : Peers()) {
    out.push_back(Envelope{peer, Make(MsgType::kError, EncodeError(e)), phase_});
  }
  return out;
}

Message Role::Make(MsgType type, Bytes payload) const {
  Message m;
  m.type = type;
  m.session_id = session_.session_id;
  m.sender = id_;
  m.params_hash = params_hash_;
  m.payload = std::move(payload);
  return m;
}

Envelope Role::To(uint16_t to, MsgType type, Bytes payload,
                  Phase phase) const {
  return Envelope{to, Make(type, std::move(payload)), phase};
}

// ---- Client. -----------------------------------------------------------------

absl::StatusOr<std::unique_ptr<ClientRole>> ClientRole::Create(
    ClientConfig config) {
  const auto& params = config.session.ctx->params();
  if (config.party < 0 || config.party >= config.session.parties) {
    return ConfigError(absl::StrCat("party id ", config.party,
                                    " outside [0, ", config.session.parties,
                                    ")"));
  }
  if (config.partition.parties() != config.session.parties) {
    return ConfigError(absl::StrCat("partition has ",
                                    config.partition.parties(),
                                    " owners but the session has ",
                                    config.session.parties, " clients"));
  }
  config.model = einfer::StripWeights(config.model);
  VFI_RETURN_IF_ERROR(config.partition.Validate());
  if (config.partition.height != config.model.input_height ||
      config.partition.width != config.model.input_width) {
    return ShapeError("partition does not cover the model input");
  }
  VFI_RETURN_IF_ERROR(vpack::CheckDatasetOwnership(
      config.dataset, config.partition, config.party));
  VFI_ASSIGN_OR_RETURN(vpack::PackLayout layout,
                       vpack::LayoutForModel(config.model, params));
  VFI_ASSIGN_OR_RETURN(einfer::CompiledModel cm,
                       einfer::CompileStructure(config.model, layout, params));
  return std::unique_ptr<ClientRole>(
      new ClientRole(std::move(config), std::move(cm)));
}

ClientRole::ClientRole(ClientConfig config, einfer::CompiledModel structure)
    : Role(RoleKind::kClient, static_cast<uint16_t>(config.party),
           config.session),
      config_(std::move(config)),
      structure_(std::move(structure)),
      prng_(config_.seed, absl::StrCat("client/", config_.party)) {}

bool ClientRole::Accepts(MsgType type, uint16_t sender) const {
  switch (type) {
    case MsgType::kTpkBcast:
    case MsgType::kQuery:
      return sender == kCoordinatorId;
    case MsgType::kCpkBcast:
    case MsgType::kResultCt:
      return sender == kServerId;
    case MsgType::kAck:
      return sender == kServerId || sender == kCoordinatorId;
    default:
      return false;
  }
}

absl::StatusOr<std::vector<Envelope>> ClientRole::OnMessage(const Message& m) {
  switch (m.type) {
    case MsgType::kTpkBcast: return OnTpk(m);
    case MsgType::kCpkBcast: return OnCpk(m);
    case MsgType::kAck: return OnAck(m);
    case MsgType::kQuery: return OnQuery(m);
    case MsgType::kResultCt: return OnResult(m);
    default: return ProtocolError("unexpected message");
  }
}

absl::StatusOr<std::vector<Envelope>> ClientRole::OnTpk(const Message& m) {
  if (tpk_) return ProtocolError("duplicate target public key");
  VFI_ASSIGN_OR_RETURN(TpkPayload p, DecodeTpk(m.payload, ctx()));
  const auto t0 = Clock::now();
  tpk_ = std::move(p.tpk);
  keys_ = mphe::KeyGen(ctx(), config_.party, prng_);

  PkSharePayload pk;
  pk.party = id();
  pk.p0 = keys_->pk.p0;
  EvalKeyR1Payload r1;
  r1.party = id();
  relin_eph_.emplace();
  r1.relin = mphe::GenRelinShareR1(keys_->sk, *relin_eph_, prng_);
  for (int k : structure_.rotations) {
    r1.rotations.push_back(mphe::GenRotKeyShare(keys_->sk, k, prng_));
  }
  std::vector<Envelope> out;
  out.push_back(To(kServerId, MsgType::kPkShare, EncodePkShare(pk),
                   Phase::kSetup));
  out.push_back(To(kServerId, MsgType::kEvalKeyShareR1, EncodeEvalKeyR1(r1),
                   Phase::kSetup));
  AddTime("keygen", SecondsSince(t0));
  return out;
}

absl::StatusOr<std::vector<Envelope>> ClientRole::OnCpk(const Message& m) {
  if (!tpk_) return ProtocolError("collective key before target key");
  if (cpk_) return ProtocolError("duplicate collective public key");
  VFI_ASSIGN_OR_RETURN(CpkPayload p, DecodeCpk(m.payload, ctx()));
  if (!(p.cpk.p1 == mphe::PublicKeyCrs(ctx()))) {
    return ProtocolError("collective public key uses a foreign CRS");
  }
  const auto t0 = Clock::now();
  EvalKeyR2Payload r2;
  r2.party = id();
  r2.relin = mphe::GenRelinShareR2(keys_->sk, *relin_eph_, p.relin_round1,
                                   prng_);
  relin_eph_.reset();
  cpk_ = std::move(p.cpk);
  std::vector<Envelope> out;
  out.push_back(To(kServerId, MsgType::kEvalKeyShareR2, EncodeEvalKeyR2(r2),
                   Phase::kSetup));
  AddTime("keygen", SecondsSince(t0));
  return out;
}

absl::StatusOr<std::vector<Envelope>> ClientRole::OnAck(const Message& m) {
  VFI_ASSIGN_OR_RETURN(AckPayload p, DecodeAck(m.payload));
  if (p.code == AckCode::kSetupComplete) {
    if (m.sender != kServerId || !cpk_ || setup_complete_) {
      return ProtocolError("unexpected setup acknowledgement");
    }
    setup_complete_ = true;
    set_phase(Phase::kAggregating);
    if (deferred_query_) {
      Message q = *std::move(deferred_query_);
      deferred_query_.reset();
      return OnQuery(q);
    }
    return std::vector<Envelope>{};
  }
  if (m.sender != kCoordinatorId || !setup_complete_ || awaiting_result_) {
    return ProtocolError("unexpected end of session");
  }
  set_phase(Phase::kDone);
  return std::vector<Envelope>{};
}

absl::StatusOr<std::vector<Envelope>> ClientRole::OnQuery(const Message& m) {
  if (awaiting_result_) return ProtocolError("query while one is in flight");
  VFI_ASSIGN_OR_RETURN(QueryPayload q, DecodeQuery(m.payload));
  if (!setup_complete_) {
    if (!cpk_ || deferred_query_ || q.seq != 0) {
      return ProtocolError("query before setup finished");
    }
    deferred_query_ = m;
    return std::vector<Envelope>{};
  }
  if (q.seq != next_seq_) {
    return ProtocolError(absl::StrCat("query sequence ", q.seq, ", expected ",
                                      next_seq_));
  }
  const int record = config_.dataset.FindRecord(q.record_id);
  if (record < 0) {
    return UnknownRecordError(
        absl::StrCat("phase ", PhaseName(Phase::kAggregating), ": ",
                     PartyName(id()), " has no record '", q.record_id, "'"));
  }
  const auto t0 = Clock::now();
  VFI_ASSIGN_OR_RETURN(vpack::Matrix slice,
                       vpack::RecordSlice(config_.dataset, record,
                                          config_.partition, config_.party));
  vpack::NormalizeSlice(config_.model, config_.partition, config_.party,
                        slice);
  VFI_ASSIGN_OR_RETURN(vpack::PackedInput packed,
                       vpack::Vpack(slice, config_.partition, config_.party,
                                    structure_.layout));
  ckks::Encoder encoder(ctx());
  VFI_ASSIGN_OR_RETURN(ckks::Plaintext pt,
                       encoder.Encode(packed.slots, structure_.input_level,
                                      structure_.input_scale));
  CiphertextPayload c;
  c.seq = q.seq;
  VFI_ASSIGN_OR_RETURN(c.ct, ckks::Encrypt(*cpk_, pt, prng_));
  awaiting_result_ = true;
  set_phase(Phase::kInferring);
  std::vector<Envelope> out;
  out.push_back(To(kServerId, MsgType::kInputCt, EncodeCiphertext(c),
                   Phase::kAggregating));
  AddTime("concat", SecondsSince(t0));
  return out;
}

absl::StatusOr<std::vector<Envelope>> ClientRole::OnResult(const Message& m) {
  if (!awaiting_result_) return ProtocolError("unsolicited result");
  VFI_ASSIGN_OR_RETURN(
      CiphertextPayload r,
      DecodeCiphertext(m.payload, ctx(), structure_.output_level));
  if (r.seq != next_seq_) {
    return ProtocolError(absl::StrCat("result for sequence ", r.seq,
                                      ", expected ", next_seq_));
  }
  if (!ckks::ScalesEqual(r.ct.scale, structure_.output_scale)) {
    return AlignmentError("result ciphertext has an unexpected scale");
  }
  const auto t0 = Clock::now();
  KsSharePayload ks;
  ks.seq = r.seq;
  ks.party = id();
  ks.scale = r.ct.scale;
  ks.share = mphe::PubKeySwitch(r.ct, keys_->sk, *tpk_,
                                /*include_c0=*/config_.party == 0, prng_);
  awaiting_result_ = false;
  ++next_seq_;
  set_phase(Phase::kDecrypting);
  std::vector<Envelope> out;
  out.push_back(To(kCoordinatorId, MsgType::kKsShare, EncodeKsShare(ks),
                   Phase::kDecrypting));
  AddTime("distDecrypt", SecondsSince(t0));
  return out;
}

std::vector<uint16_t> ClientRole::WaitingOn() const {
  if (done()) return {};
  if (!tpk_) return {kCoordinatorId};
  if (!setup_complete_) return {kServerId};
  if (awaiting_result_) return {kServerId};
  return {kCoordinatorId};
}

RoleInventory ClientRole::Inventory() const {
  RoleInventory inv;
  inv.secret_key_share = keys_.has_value();
  inv.clear_model_weights = config_.model.has_weights;
  inv.collective_public_key = cpk_.has_value();
  inv.target_public_key = tpk_.has_value();
  return inv;
}

// ---- Server. -----------------------------------------------------------------

absl::StatusOr<std::unique_ptr<ServerRole>> ServerRole::Create(
    ServerConfig config) {
  if (!config.model.has_weights) {
    return ConfigError("the server needs a model with weights");
  }
  if (config.mode == einfer::WeightMode::kStructure) {
    return ConfigError("the server runs in plaintext or ciphertext mode");
  }
  VFI_ASSIGN_OR_RETURN(
      vpack::PackLayout layout,
      vpack::LayoutForModel(config.model, config.session.ctx->params()));
  VFI_ASSIGN_OR_RETURN(einfer::CompiledModel cm,
                       einfer::Compile(config.model, layout,
                                       config.session.ctx));
  return std::unique_ptr<ServerRole>(
      new ServerRole(std::move(config), std::move(cm)));
}

ServerRole::ServerRole(ServerConfig config, einfer::CompiledModel cm)
    : Role(RoleKind::kServer, kServerId, config.session),
      config_(std::move(config)),
      cm_(std::move(cm)),
      prng_(config_.seed, "server") {}

bool ServerRole::Accepts(MsgType type, uint16_t sender) const {
  switch (type) {
    case MsgType::kPkShare:
    case MsgType::kEvalKeyShareR1:
    case MsgType::kEvalKeyShareR2:
    case MsgType::kInputCt:
      return IsClient(sender, parties());
    case MsgType::kAck:
      return sender == kCoordinatorId;
    default:
      return false;
  }
}

absl::StatusOr<std::vector<Envelope>> ServerRole::OnMessage(const Message& m) {
  switch (m.type) {
    case MsgType::kPkShare: return OnPkShare(m);
    case MsgType::kEvalKeyShareR1: return OnRound1(m);
    case MsgType::kEvalKeyShareR2: return OnRound2(m);
    case MsgType::kInputCt: return OnInput(m);
    case MsgType::kAck: return OnAck(m);
    default: return ProtocolError("unexpected message");
  }
}

absl::StatusOr<std::vector<Envelope>> ServerRole::OnPkShare(const Message& m) {
  if (cpk_ || pk_seen_.count(m.sender)) {
    return ProtocolError(absl::StrCat("duplicate public key share from ",
                                      PartyName(m.sender)));
  }
  VFI_ASSIGN_OR_RETURN(PkSharePayload p, DecodePkShare(m.payload, ctx()));
  if (p.party != m.sender) return ProtocolError("share names another party");
  const auto t0 = Clock::now();
  if (pk_sum_.empty()) {
    pk_sum_ = std::move(p.p0);
  } else {
    pk_sum_.AddInPlace(p.p0);
  }
  pk_seen_.insert(m.sender);
  auto out = MaybeBroadcastCpk();
  AddTime("keygen", SecondsSince(t0));
  return out;
}

absl::StatusOr<std::vector<Envelope>> ServerRole::OnRound1(const Message& m) {
  if (cpk_ || r1_seen_.count(m.sender)) {
    return ProtocolError(absl::StrCat("duplicate evaluation key share from ",
                                      PartyName(m.sender)));
  }
  VFI_ASSIGN_OR_RETURN(EvalKeyR1Payload p, DecodeEvalKeyR1(m.payload, ctx()));
  if (p.party != m.sender) return ProtocolError("share names another party");
  std::vector<int> offsets;
  for (const auto& r : p.rotations) offsets.push_back(r.rotation);
  if (offsets != cm_.rotations) {
    return ProtocolError(absl::StrCat(
        PartyName(m.sender), " sent rotation shares for {",
        absl::StrJoin(offsets, ","), "} but the model needs {",
        absl::StrJoin(cm_.rotations, ","), "}"));
  }
  const auto t0 = Clock::now();
  AddDigits(relin_r1_sum_.h0, p.relin.h0);
  AddDigits(relin_r1_sum_.h1, p.relin.h1);
  for (const auto& r : p.rotations) AddDigits(rot_sums_[r.rotation], r.b);
  r1_seen_.insert(m.sender);
  auto out = MaybeBroadcastCpk();
  AddTime("keygen", SecondsSince(t0));
  return out;
}

absl::StatusOr<std::vector<Envelope>> ServerRole::MaybeBroadcastCpk() {
  const size_t n = parties();
  if (pk_seen_.size() < n || r1_seen_.size() < n) {
    return std::vector<Envelope>{};
  }
  cpk_ = ckks::PublicKey{pk_sum_, mphe::PublicKeyCrs(ctx())};
  pk_sum_ = ring::RnsPoly();
  for (auto& [k, digits] : rot_sums_) {
    mphe::RotKeyShare sum{k, std::move(digits)};
    VFI_ASSIGN_OR_RETURN(ckks::EvalKey key,
                         mphe::ColRotKeyGen(std::span(&sum, 1), 1));
    eval_keys_.rotations.emplace(k, std::move(key));
  }
  rot_sums_.clear();
  CpkPayload p{*cpk_, relin_r1_sum_};
  const Bytes payload = EncodeCpk(p);
  std::vector<Envelope> out;
  for (int i = 0; i < parties(); ++i) {
    out.push_back(To(static_cast<uint16_t>(i), MsgType::kCpkBcast, payload,
                     Phase::kSetup));
  }
  return out;
}

absl::StatusOr<std::vector<Envelope>> ServerRole::OnRound2(const Message& m) {
  if (!cpk_) return ProtocolError("relinearization round 2 before round 1");
  if (setup_complete_ || r2_seen_.count(m.sender)) {
    return ProtocolError(absl::StrCat("duplicate round-2 share from ",
                                      PartyName(m.sender)));
  }
  VFI_ASSIGN_OR_RETURN(EvalKeyR2Payload p, DecodeEvalKeyR2(m.payload, ctx()));
  if (p.party != m.sender) return ProtocolError("share names another party");
  const auto t0 = Clock::now();
  AddDigits(relin_r2_sum_.h, p.relin.h);
  r2_seen_.insert(m.sender);
  std::vector<Envelope> out;
  if (r2_seen_.size() == static_cast<size_t>(parties())) {
    VFI_ASSIGN_OR_RETURN(
        ckks::EvalKey rlk,
        mphe::ColRelinKeyGen(std::span(&relin_r2_sum_, 1), relin_r1_sum_, 1));
    eval_keys_.relin = std::move(rlk);
    relin_r1_sum_ = {};
    relin_r2_sum_ = {};
    if (config_.mode == einfer::WeightMode::kCiphertext) {
      VFI_RETURN_IF_ERROR(einfer::EncryptModel(cm_, *cpk_, prng_));
    }
    setup_complete_ = true;
    set_phase(Phase::kAggregating);
    const Bytes ack = EncodeAck({AckCode::kSetupComplete});
    for (int i = 0; i < parties(); ++i) {
      out.push_back(To(static_cast<uint16_t>(i), MsgType::kAck, ack,
                       Phase::kSetup));
    }
    out.push_back(To(kCoordinatorId, MsgType::kAck, ack, Phase::kSetup));
  }
  AddTime("keygen", SecondsSince(t0));
  return out;
}

absl::StatusOr<std::vector<Envelope>> ServerRole::OnInput(const Message& m) {
  if (!setup_complete_) return ProtocolError("input before setup finished");
  if (inputs_.count(m.sender)) {
    return ProtocolError(absl::StrCat("duplicate input from ",
                                      PartyName(m.sender)));
  }
  VFI_ASSIGN_OR_RETURN(
      CiphertextPayload p,
      DecodeCiphertext(m.payload, ctx(), cm_.input_level));
  if (p.seq != next_seq_) {
    return ProtocolError(absl::StrCat("input for sequence ", p.seq,
                                      ", expected ", next_seq_));
  }
  if (!ckks::ScalesEqual(p.ct.scale, cm_.input_scale)) {
    return AlignmentError("input ciphertext has an unexpected scale");
  }
  set_phase(Phase::kAggregating);
  inputs_.emplace(m.sender, std::move(p.ct));
  if (inputs_.size() < static_cast<size_t>(parties())) {
    return std::vector<Envelope>{};
  }
  auto t0 = Clock::now();
  std::vector<ckks::Ciphertext> cts;
  for (auto& [party, ct] : inputs_) cts.push_back(std::move(ct));
  inputs_.clear();
  VFI_ASSIGN_OR_RETURN(ckks::Ciphertext sum,
                       EncryptedConcat(cts, static_cast<size_t>(parties())));
  cts.clear();
  AddTime("concat", SecondsSince(t0));

  set_phase(Phase::kInferring);
  t0 = Clock::now();
  CiphertextPayload result;
  result.seq = next_seq_;
  VFI_ASSIGN_OR_RETURN(result.ct, einfer::Infer(sum, cm_, eval_keys_));
  AddTime("infer", SecondsSince(t0));
  ++next_seq_;
  const Bytes payload = EncodeCiphertext(result);
  std::vector<Envelope> out;
  for (int i = 0; i < parties(); ++i) {
    out.push_back(To(static_cast<uint16_t>(i), MsgType::kResultCt, payload,
                     Phase::kInferring));
  }
  return out;
}

absl::StatusOr<std::vector<Envelope>> ServerRole::OnAck(const Message& m) {
  VFI_ASSIGN_OR_RETURN(AckPayload p, DecodeAck(m.payload));
  if (p.code != AckCode::kSessionDone || !setup_complete_ ||
      !inputs_.empty()) {
    return ProtocolError("unexpected acknowledgement");
  }
  set_phase(Phase::kDone);
  return std::vector<Envelope>{};
}

std::vector<uint16_t> ServerRole::WaitingOn() const {
  if (done()) return {};
  std::vector<uint16_t> out;
  const auto missing = [&](const std::set<uint16_t>& seen) {
    for (int i = 0; i < parties(); ++i) {
      if (!seen.count(static_cast<uint16_t>(i)) &&
          std::find(out.begin(), out.end(), i) == out.end()) {
        out.push_back(static_cast<uint16_t>(i));
      }
    }
  };
  if (!cpk_) {
    missing(pk_seen_);
    missing(r1_seen_);
  } else if (!setup_complete_) {
    missing(r2_seen_);
  } else if (!inputs_.empty()) {
    for (int i = 0; i < parties(); ++i) {
      if (!inputs_.count(static_cast<uint16_t>(i))) {
        out.push_back(static_cast<uint16_t>(i));
      }
    }
  } else {
    out.push_back(kCoordinatorId);
  }
  std::sort(out.begin(), out.end());
  return out;
}

RoleInventory ServerRole::Inventory() const {
  RoleInventory inv;
  inv.clear_model_weights = config_.model.has_weights;
  inv.evaluation_keys =
      eval_keys_.relin.has_value() || !eval_keys_.rotations.empty();
  inv.collective_public_key = cpk_.has_value();
  return inv;
}

// ---- Coordinator. -------------------------------------------------------------

absl::StatusOr<std::unique_ptr<CoordinatorRole>> CoordinatorRole::Create(
    CoordinatorConfig config) {
  config.model = einfer::StripWeights(config.model);
  const auto& params = config.session.ctx->params();
  VFI_ASSIGN_OR_RETURN(vpack::PackLayout layout,
                       vpack::LayoutForModel(config.model, params));
  VFI_ASSIGN_OR_RETURN(einfer::CompiledModel cm,
                       einfer::CompileStructure(config.model, layout, params));
  return std::unique_ptr<CoordinatorRole>(
      new CoordinatorRole(std::move(config), std::move(cm)));
}

CoordinatorRole::CoordinatorRole(CoordinatorConfig config,
                                 einfer::CompiledModel structure)
    : Role(RoleKind::kCoordinator, kCoordinatorId, config.session),
      config_(std::move(config)),
      structure_(std::move(structure)),
      prng_(config_.seed, "coordinator") {}

bool CoordinatorRole::Accepts(MsgType type, uint16_t sender) const {
  switch (type) {
    case MsgType::kAck:
      return sender == kServerId;
    case MsgType::kKsShare:
      return IsClient(sender, parties());
    default:
      return false;
  }
}

absl::StatusOr<std::vector<Envelope>> CoordinatorRole::Start() {
  if (target_) return ProtocolError("coordinator already started");
  const auto t0 = Clock::now();
  target_ = mphe::GenTargetKeyPair(ctx(), prng_);
  const Bytes payload = EncodeTpk({target_->tpk});
  std::vector<Envelope> out;
  for (int i = 0; i < parties(); ++i) {
    out.push_back(To(static_cast<uint16_t>(i), MsgType::kTpkBcast, payload,
                     Phase::kSetup));
  }
  AddTime("keygen", SecondsSince(t0));
  return out;
}

std::vector<Envelope> CoordinatorRole::NextQueryOrFinish() {
  std::vector<Envelope> out;
  if (seq_ < config_.queries.size()) {
    set_phase(Phase::kAggregating);
    const Bytes payload = EncodeQuery({seq_, config_.queries[seq_]});
    for (int i = 0; i < parties(); ++i) {
      out.push_back(To(static_cast<uint16_t>(i), MsgType::kQuery, payload,
                       Phase::kAggregating));
    }
    return out;
  }
  const Bytes ack = EncodeAck({AckCode::kSessionDone});
  for (uint16_t peer : Peers()) {
    out.push_back(To(peer, MsgType::kAck, ack, Phase::kDone));
  }
  set_phase(Phase::kDone);
  return out;
}

absl::StatusOr<std::vector<Envelope>> CoordinatorRole::OnMessage(
    const Message& m) {
  if (!target_) return ProtocolError("coordinator has not started");
  if (m.type == MsgType::kAck) {
    VFI_ASSIGN_OR_RETURN(AckPayload p, DecodeAck(m.payload));
    if (p.code != AckCode::kSetupComplete || setup_complete_) {
      return ProtocolError("unexpected acknowledgement");
    }
    setup_complete_ = true;
    return NextQueryOrFinish();
  }
  // Key-switch share.
  if (!setup_complete_) return ProtocolError("share before setup finished");
  if (shares_.count(m.sender)) {
    return ProtocolError(absl::StrCat("duplicate key-switch share from ",
                                      PartyName(m.sender)));
  }
  VFI_ASSIGN_OR_RETURN(
      KsSharePayload p,
      DecodeKsShare(m.payload, ctx(), structure_.output_level));
  if (p.party != m.sender) return ProtocolError("share names another party");
  if (p.seq != seq_) {
    return ProtocolError(absl::StrCat("share for sequence ", p.seq,
                                      ", expected ", seq_));
  }
  if (!ckks::ScalesEqual(p.scale, structure_.output_scale)) {
    return AlignmentError("key-switch share has an unexpected scale");
  }
  set_phase(Phase::kDecrypting);
  shares_.emplace(m.sender, std::move(p.share));
  if (shares_.size() < static_cast<size_t>(parties())) {
    return std::vector<Envelope>{};
  }
  const auto t0 = Clock::now();
  std::vector<mphe::KsShare> shares;
  for (auto& [party, s] : shares_) shares.push_back(std::move(s));
  shares_.clear();
  VFI_ASSIGN_OR_RETURN(
      std::vector<double> slots,
      mphe::AggDec(shares, *target_, structure_.output_scale,
                   static_cast<size_t>(parties())));
  Prediction pred;
  pred.record_id = config_.queries[seq_];
  pred.output = einfer::ExtractOutput(structure_, slots);
  pred.argmax = static_cast<int>(
      std::max_element(pred.output.begin(), pred.output.end()) -
      pred.output.begin());
  predictions_.push_back(std::move(pred));
  ++seq_;
  AddTime("distDecrypt", SecondsSince(t0));
  return NextQueryOrFinish();
}

std::vector<uint16_t> CoordinatorRole::WaitingOn() const {
  if (done()) return {};
  if (!setup_complete_) return {kServerId};
  std::vector<uint16_t> out;
  for (int i = 0; i < parties(); ++i) {
    if (!shares_.count(static_cast<uint16_t>(i))) {
      out.push_back(static_cast<uint16_t>(i));
    }
  }
  return out;
}

RoleInventory CoordinatorRole::Inventory() const {
  RoleInventory inv;
  inv.target_secret_key = target_.has_value();
  inv.target_public_key = target_.has_value();
  inv.clear_model_weights = config_.model.has_weights;
  return inv;
}

// ---- Free functions. ------------------------------------------------------------

absl::Status CheckRoleSecrecy(const Role& role) {
  const RoleInventory inv = role.Inventory();
  const std::string who = PartyName(role.id());
  switch (role.kind()) {
    case RoleKind::kServer:
      if (inv.secret_key_share || inv.target_secret_key) {
        return ProtocolError(who + " holds secret key material");
      }
      break;
    case RoleKind::kClient:
      if (inv.target_secret_key) {
        return ProtocolError(who + " holds the target secret key");
      }
      if (inv.clear_model_weights) {
        return ProtocolError(who + " holds clear model weights");
      }
      for (MsgType t : role.received_types()) {
        if (t != MsgType::kTpkBcast && t != MsgType::kCpkBcast &&
            t != MsgType::kAck && t != MsgType::kQuery &&
            t != MsgType::kResultCt && t != MsgType::kError) {
          return ProtocolError(absl::StrCat(who, " received ",
                                            MsgTypeName(t)));
        }
      }
      break;
    case RoleKind::kCoordinator:
      if (inv.secret_key_share) {
        return ProtocolError(who + " holds a secret key share");
      }
      if (inv.clear_model_weights) {
        return ProtocolError(who + " holds clear model weights");
      }
      for (MsgType t : role.received_types()) {
        if (t != MsgType::kAck && t != MsgType::kKsShare &&
            t != MsgType::kError) {
          return ProtocolError(absl::StrCat(who, " received ",
                                            MsgTypeName(t)));
        }
      }
      break;
  }
  return absl::OkStatus();
}

absl::StatusOr<ckks::Ciphertext> EncryptedConcat(
    std::span<const ckks::Ciphertext> cts, size_t expected) {
  if (cts.size() != expected) {
    return IncompleteProtocolError(absl::StrCat(
        "expected ", expected, " input ciphertexts, got ", cts.size()));
  }
  if (cts.empty()) return IncompleteProtocolError("no input ciphertexts");
  for (const auto& ct : cts) {
    if (ct.level() != cts[0].level() ||
        !ckks::ScalesEqual(ct.scale, cts[0].scale)) {
      return AlignmentError("input ciphertexts differ in level or scale");
    }
  }
  ckks::Evaluator eval;
  ckks::Ciphertext sum = cts[0];
  for (size_t i = 1; i < cts.size(); ++i) {
    VFI_ASSIGN_OR_RETURN(sum, eval.Add(sum, cts[i]));
  }
  return sum;
}

}  // namespace vfi::protocol
