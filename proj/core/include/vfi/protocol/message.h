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

#ifndef VFI_PROTOCOL_MESSAGE_H_
#define VFI_PROTOCOL_MESSAGE_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "vfi/ckks/ciphertext.h"
#include "vfi/ckks/keys.h"
#include "vfi/common/bytes.h"
#include "vfi/common/status.h"
#include "vfi/mphe/mphe.h"
#include "vfi/ring/ring_context.h"

namespace vfi::protocol {

enum class MsgType : uint8_t {
  kPkShare = 1,
  kCpkBcast = 2,
  kTpkBcast = 3,
  kEvalKeyShareR1 = 4,
  kEvalKeyShareR2 = 5,
  kQuery = 6,
  kInputCt = 7,
  kResultCt = 8,
  kKsShare = 9,
  kAck = 10,
  kError = 11,
};

absl::string_view MsgTypeName(MsgType type);
bool IsKnownMsgType(uint8_t type);

// Party identifiers on the wire: clients are 0..N-1.
inline constexpr uint16_t kServerId = 0xF000;
inline constexpr uint16_t kCoordinatorId = 0xF001;
std::string PartyName(uint16_t id);

using SessionId = std::array<uint8_t, 16>;
using ParamsHash = std::array<uint8_t, 32>;

// Frame: u32 LE length of everything that follows | u8 type |
// sessionId 16B | sender u16 LE | paramsHash 32B | payload.
inline constexpr size_t kFrameHeaderSize = 4 + 1 + 16 + 2 + 32;
inline constexpr size_t kMaxFrameSize = size_t{1} << 30;

struct Message {
  MsgType type = MsgType::kAck;
  SessionId session_id{};
  uint16_t sender = 0;
  ParamsHash params_hash{};
  Bytes payload;

  bool operator==(const Message&) const = default;
};

Bytes EncodeMessage(const Message& m);
// Exact decode of one frame; truncation, trailing bytes, an inconsistent
// length prefix or an unknown type are framing errors.
absl::StatusOr<Message> DecodeMessage(std::span<const uint8_t> frame);
// Length a frame declares, given at least its first 4 bytes.
absl::StatusOr<size_t> FrameLength(std::span<const uint8_t> prefix);

// ---- Payloads. ---------------------------------------------------------

struct TpkPayload {
  ckks::PublicKey tpk;
};
struct PkSharePayload {
  uint16_t party = 0;
  ring::RnsPoly p0;  // p1 is the common reference polynomial
};
struct EvalKeyR1Payload {
  uint16_t party = 0;
  mphe::RelinShareR1 relin;
  std::vector<mphe::RotKeyShare> rotations;
};
struct CpkPayload {
  ckks::PublicKey cpk;
  mphe::RelinShareR1 relin_round1;
};
struct EvalKeyR2Payload {
  uint16_t party = 0;
  mphe::RelinShareR2 relin;
};
struct QueryPayload {
  uint32_t seq = 0;
  std::string record_id;
};
// InputCt and ResultCt.
struct CiphertextPayload {
  uint32_t seq = 0;
  ckks::Ciphertext ct;
};
struct KsSharePayload {
  uint32_t seq = 0;
  uint16_t party = 0;
  double scale = 1.0;
  mphe::KsShare share;
};
enum class AckCode : uint8_t { kSetupComplete = 1, kSessionDone = 2 };
struct AckPayload {
  AckCode code = AckCode::kSetupComplete;
};
struct ErrorPayload {
  ErrorKind kind = ErrorKind::kUnknown;
  std::string message;
};

Bytes EncodeTpk(const TpkPayload& p);
Bytes EncodePkShare(const PkSharePayload& p);
Bytes EncodeEvalKeyR1(const EvalKeyR1Payload& p);
Bytes EncodeCpk(const CpkPayload& p);
Bytes EncodeEvalKeyR2(const EvalKeyR2Payload& p);
Bytes EncodeQuery(const QueryPayload& p);
Bytes EncodeCiphertext(const CiphertextPayload& p);
Bytes EncodeKsShare(const KsSharePayload& p);
Bytes EncodeAck(const AckPayload& p);
Bytes EncodeError(const ErrorPayload& p);

// Decoders check every polynomial's level, form and basis so that a
// well-framed but malformed payload is rejected before any arithmetic.
absl::StatusOr<TpkPayload> DecodeTpk(std::span<const uint8_t> b,
                                     const ring::RingContextPtr& ctx);
absl::StatusOr<PkSharePayload> DecodePkShare(std::span<const uint8_t> b,
                                             const ring::RingContextPtr& ctx);
absl::StatusOr<EvalKeyR1Payload> DecodeEvalKeyR1(
    std::span<const uint8_t> b, const ring::RingContextPtr& ctx);
absl::StatusOr<CpkPayload> DecodeCpk(std::span<const uint8_t> b,
                                     const ring::RingContextPtr& ctx);
absl::StatusOr<EvalKeyR2Payload> DecodeEvalKeyR2(
    std::span<const uint8_t> b, const ring::RingContextPtr& ctx);
absl::StatusOr<QueryPayload> DecodeQuery(std::span<const uint8_t> b);
// `level` is the required ciphertext level (-1 accepts any level).
absl::StatusOr<CiphertextPayload> DecodeCiphertext(
    std::span<const uint8_t> b, const ring::RingContextPtr& ctx, int level);
absl::StatusOr<KsSharePayload> DecodeKsShare(std::span<const uint8_t> b,
                                             const ring::RingContextPtr& ctx,
                                             int level);
absl::StatusOr<AckPayload> DecodeAck(std::span<const uint8_t> b);
absl::StatusOr<ErrorPayload> DecodeError(std::span<const uint8_t> b);

}  // namespace vfi::protocol

#endif  // VFI_PROTOCOL_MESSAGE_H_
