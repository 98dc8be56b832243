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

#ifndef VFI_PROTOCOL_ROLES_H_
#define VFI_PROTOCOL_ROLES_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "vfi/ckks/ciphertext.h"
#include "vfi/ckks/keys.h"
#include "vfi/einfer/compiler.h"
#include "vfi/einfer/model.h"
#include "vfi/mphe/mphe.h"
#include "vfi/protocol/message.h"
#include "vfi/protocol/transcript.h"
#include "vfi/ring/prng.h"
#include "vfi/ring/ring_context.h"
#include "vfi/vpack/vpack.h"

namespace vfi::protocol {

enum class RoleKind { kClient, kServer, kCoordinator };

// Parameters every role of one session agrees on.
struct SessionConfig {
  ring::RingContextPtr ctx;
  SessionId session_id{};
  int parties = 1;
};

// An outgoing message and the protocol phase it belongs to.
struct Envelope {
  uint16_t to = 0;
  Message msg;
  Phase phase = Phase::kSetup;
};

// What key material and data a role currently holds; checked against the
// per-role secrecy rules after every session.
struct RoleInventory {
  bool secret_key_share = false;
  bool target_secret_key = false;
  bool clear_model_weights = false;
  bool evaluation_keys = false;
  bool collective_public_key = false;
  bool target_public_key = false;
};

// A sequential protocol state machine. The transport calls Start() once and
// then Handle() for every delivered message, in arrival order, sending the
// returned envelopes. A message that fails validation is rejected with a
// typed error before any state changes, so a role survives malformed
// input; whether to abort the session is the transport's decision.
class Role {
 public:
  Role(RoleKind kind, uint16_t id, SessionConfig session);
  virtual ~Role() = default;
  Role(const Role&) = delete;
  Role& operator=(const Role&) = delete;

  RoleKind kind() const { return kind_; }
  uint16_t id() const { return id_; }
  int parties() const { return session_.parties; }
  const SessionConfig& session() const { return session_; }
  Phase phase() const { return phase_; }
  bool done() const { return phase_ == Phase::kDone; }

  virtual absl::StatusOr<std::vector<Envelope>> Start();
  absl::StatusOr<std::vector<Envelope>> Handle(const Message& m);
  // Decodes a wire frame, then handles it.
  absl::StatusOr<std::vector<Envelope>> HandleFrame(
      std::span<const uint8_t> frame);

  // Parties this role is blocked on right now.
  virtual std::vector<uint16_t> WaitingOn() const = 0;
  virtual RoleInventory Inventory() const = 0;
  // Message types this role has accepted so far.
  const std::set<MsgType>& received_types() const { return received_; }
  // Seconds spent handling messages, keyed by benchmark phase
  // ("keygen", "concat", "infer", "distDecrypt").
  const std::map<std::string, double>& timings() const { return timings_; }

  // Every other participant of the session.
  std::vector<uint16_t> Peers() const;
  // Fail-stop notification of `status` to every peer.
  std::vector<Envelope> ErrorEnvelopes(const absl::Status& status) const;

 protected:
  virtual absl::StatusOr<std::vector<Envelope>> OnMessage(
      const Message& m) = 0;
  // Whether `sender` may send messages of `type` to this role.
  virtual bool Accepts(MsgType type, uint16_t sender) const = 0;

  Message Make(MsgType type, Bytes payload) const;
  Envelope To(uint16_t to, MsgType type, Bytes payload, Phase phase) const;
  void set_phase(Phase p) { phase_ = p; }
  void AddTime(const std::string& key, double seconds) {
    timings_[key] += seconds;
  }
  const ring::RingContextPtr& ctx() const { return session_.ctx; }

 private:
  RoleKind kind_;
  uint16_t id_;
  SessionConfig session_;
  ParamsHash params_hash_{};
  Phase phase_ = Phase::kSetup;
  std::set<MsgType> received_;
  std::map<std::string, double> timings_;
};

// ---- Client (data owner i). ----------------------------------------------

struct ClientConfig {
  SessionConfig session;
  int party = 0;
  // Structure only: any weights present are dropped.
  einfer::ModelSpec model;
  vpack::ColumnPartition partition;
  vpack::ClientDataset dataset;
  ring::Seed seed{};
};

class ClientRole : public Role {
 public:
  static absl::StatusOr<std::unique_ptr<ClientRole>> Create(
      ClientConfig config);

  std::vector<uint16_t> WaitingOn() const override;
  RoleInventory Inventory() const override;

 protected:
  absl::StatusOr<std::vector<Envelope>> OnMessage(const Message& m) override;
  bool Accepts(MsgType type, uint16_t sender) const override;

 private:
  ClientRole(ClientConfig config, einfer::CompiledModel structure);
  absl::StatusOr<std::vector<Envelope>> OnTpk(const Message& m);
  absl::StatusOr<std::vector<Envelope>> OnCpk(const Message& m);
  absl::StatusOr<std::vector<Envelope>> OnAck(const Message& m);
  absl::StatusOr<std::vector<Envelope>> OnQuery(const Message& m);
  absl::StatusOr<std::vector<Envelope>> OnResult(const Message& m);

  ClientConfig config_;
  einfer::CompiledModel structure_;
  ring::Prng prng_;
  std::optional<mphe::PartyKeys> keys_;
  std::optional<mphe::RelinEphemeral> relin_eph_;
  std::optional<ckks::PublicKey> tpk_;
  std::optional<ckks::PublicKey> cpk_;
  bool setup_complete_ = false;
  // The coordinator may issue the first query as soon as it sees the server's
  // setup acknowledgement, which can overtake ours on another link.
  std::optional<Message> deferred_query_;
  uint32_t next_seq_ = 0;
  bool awaiting_result_ = false;
};

// ---- Server (model owner). ------------------------------------------------

struct ServerConfig {
  SessionConfig session;
  einfer::ModelSpec model;  // with weights
  einfer::WeightMode mode = einfer::WeightMode::kPlaintext;
  ring::Seed seed{};
};

class ServerRole : public Role {
 public:
  static absl::StatusOr<std::unique_ptr<ServerRole>> Create(
      ServerConfig config);

  std::vector<uint16_t> WaitingOn() const override;
  RoleInventory Inventory() const override;
  const einfer::CompiledModel& compiled() const { return cm_; }

 protected:
  absl::StatusOr<std::vector<Envelope>> OnMessage(const Message& m) override;
  bool Accepts(MsgType type, uint16_t sender) const override;

 private:
  ServerRole(ServerConfig config, einfer::CompiledModel cm);
  absl::StatusOr<std::vector<Envelope>> OnPkShare(const Message& m);
  absl::StatusOr<std::vector<Envelope>> OnRound1(const Message& m);
  absl::StatusOr<std::vector<Envelope>> OnRound2(const Message& m);
  absl::StatusOr<std::vector<Envelope>> OnInput(const Message& m);
  absl::StatusOr<std::vector<Envelope>> OnAck(const Message& m);
  absl::StatusOr<std::vector<Envelope>> MaybeBroadcastCpk();

  ServerConfig config_;
  einfer::CompiledModel cm_;
  ring::Prng prng_;
  // Key shares are summed as they arrive so memory stays O(1) in N.
  std::set<uint16_t> pk_seen_, r1_seen_, r2_seen_;
  ring::RnsPoly pk_sum_;
  mphe::RelinShareR1 relin_r1_sum_;
  std::map<int, std::vector<ring::RnsPoly>> rot_sums_;
  mphe::RelinShareR2 relin_r2_sum_;
  std::optional<ckks::PublicKey> cpk_;
  ckks::EvalKeySet eval_keys_;
  bool setup_complete_ = false;
  uint32_t next_seq_ = 0;
  std::map<uint16_t, ckks::Ciphertext> inputs_;
};

// ---- Coordinator (query issuer, holds the target key). --------------------

struct CoordinatorConfig {
  SessionConfig session;
  einfer::ModelSpec model;  // structure only
  std::vector<std::string> queries;
  ring::Seed seed{};
};

struct Prediction {
  std::string record_id;
  std::vector<double> output;
  int argmax = 0;
};

class CoordinatorRole : public Role {
 public:
  static absl::StatusOr<std::unique_ptr<CoordinatorRole>> Create(
      CoordinatorConfig config);

  absl::StatusOr<std::vector<Envelope>> Start() override;
  std::vector<uint16_t> WaitingOn() const override;
  RoleInventory Inventory() const override;
  const std::vector<Prediction>& predictions() const { return predictions_; }

 protected:
  absl::StatusOr<std::vector<Envelope>> OnMessage(const Message& m) override;
  bool Accepts(MsgType type, uint16_t sender) const override;

 private:
  CoordinatorRole(CoordinatorConfig config, einfer::CompiledModel structure);
  std::vector<Envelope> NextQueryOrFinish();

  CoordinatorConfig config_;
  einfer::CompiledModel structure_;
  ring::Prng prng_;
  std::optional<mphe::TargetKeyPair> target_;
  bool setup_complete_ = false;
  uint32_t seq_ = 0;
  std::map<uint16_t, mphe::KsShare> shares_;
  std::vector<Prediction> predictions_;
};

// Checks the per-role secrecy rules: the server holds no secret key material,
// clients hold no target secret and no clear weights, the coordinator holds
// no secret-key share and only receives key-switch shares and control
// messages.
absl::Status CheckRoleSecrecy(const Role& role);

// Slot-wise homomorphic sum of exactly `expected` ciphertexts of equal level
// and scale. Party identities play no part in the sum.
absl::StatusOr<ckks::Ciphertext> EncryptedConcat(
    std::span<const ckks::Ciphertext> cts, size_t expected);

// Protocol phase a message of this type belongs to (Error messages take the
// sender's current phase instead).
Phase MessagePhase(MsgType type, std::span<const uint8_t> payload);

}  // namespace vfi::protocol

#endif  // VFI_PROTOCOL_ROLES_H_
