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

#include "vfi/protocol/message.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "vfi/ckks/serialization.h"
#include "vfi/common/status_macros.h"

namespace vfi::protocol {
namespace {

using ring::PolyForm;
using ring::RnsPoly;

constexpr size_t kMaxRotations = 4096;
constexpr size_t kMaxRecordIdBytes = 4096;
constexpr size_t kMaxErrorBytes = 1 << 16;

// Reads one polynomial and insists on its shape.
absl::StatusOr<RnsPoly> ReadShaped(ByteReader& r,
                                   const ring::RingContextPtr& ctx, int level,
                                   bool extended, absl::string_view what) {
  VFI_ASSIGN_OR_RETURN(RnsPoly p, ckks::ReadPoly(r, ctx));
  if ((level >= 0 && p.level() != level) || p.extended() != extended ||
      !p.is_ntt()) {
    return StructuralError(absl::StrCat(what, " has the wrong shape"));
  }
  return p;
}

absl::Status ReadDigits(ByteReader& r, const ring::RingContextPtr& ctx,
                        std::vector<RnsPoly>& out, absl::string_view what) {
  VFI_ASSIGN_OR_RETURN(uint32_t count, r.U32());
  if (count != static_cast<uint32_t>(ctx->max_level() + 1)) {
    return StructuralError(absl::StrCat(what, " has ", count, " digits"));
  }
  out.clear();
  for (uint32_t j = 0; j < count; ++j) {
    VFI_ASSIGN_OR_RETURN(RnsPoly p,
                         ReadShaped(r, ctx, ctx->max_level(), true, what));
    out.push_back(std::move(p));
  }
  return absl::OkStatus();
}

void WriteDigits(ByteWriter& w, const std::vector<RnsPoly>& polys) {
  w.U32(static_cast<uint32_t>(polys.size()));
  for (const auto& p : polys) ckks::WritePoly(w, p);
}

absl::StatusOr<ckks::PublicKey> ReadKey(ByteReader& r,
                                        const ring::RingContextPtr& ctx,
                                        absl::string_view what) {
  ckks::PublicKey pk;
  VFI_ASSIGN_OR_RETURN(pk.p0, ReadShaped(r, ctx, ctx->max_level(), false, what));
  VFI_ASSIGN_OR_RETURN(pk.p1, ReadShaped(r, ctx, ctx->max_level(), false, what));
  return pk;
}

void WriteKey(ByteWriter& w, const ckks::PublicKey& pk) {
  ckks::WritePoly(w, pk.p0);
  ckks::WritePoly(w, pk.p1);
}

template <typename T, typename F>
absl::StatusOr<T> Whole(std::span<const uint8_t> b, F&& read) {
  ByteReader r(b);
  VFI_ASSIGN_OR_RETURN(T out, read(r));
  VFI_RETURN_IF_ERROR(r.ExpectDone());
  return out;
}

}  // namespace

absl::string_view MsgTypeName(MsgType type) {
  switch (type) {
    case MsgType::kPkShare: return "PkShare";
    case MsgType::kCpkBcast: return "CpkBcast";
    case MsgType::kTpkBcast: return "TpkBcast";
    case MsgType::kEvalKeyShareR1: return "EvalKeyShareR1";
    case MsgType::kEvalKeyShareR2: return "EvalKeyShareR2";
    case MsgType::kQuery: return "Query";
    case MsgType::kInputCt: return "InputCt";
    case MsgType::kResultCt: return "ResultCt";
    case MsgType::kKsShare: return "KsShare";
    case MsgType::kAck: return "Ack";
    case MsgType::kError: return "Error";
  }
  return "Unknown";
}

bool IsKnownMsgType(uint8_t type) {
  return type >= static_cast<uint8_t>(MsgType::kPkShare) &&
         type <= static_cast<uint8_t>(MsgType::kError);
}

std::string PartyName(uint16_t id) {
  if (id == kServerId) return "server";
  if (id == kCoordinatorId) return "coordinator";
  return absl::StrCat("client ", id);
}

Bytes EncodeMessage(const Message& m) {
  ByteWriter w;
  w.U32(static_cast<uint32_t>(kFrameHeaderSize - 4 + m.payload.size()));
  w.U8(static_cast<uint8_t>(m.type));
  w.Append(m.session_id);
  w.U16(m.sender);
  w.Append(m.params_hash);
  w.Append(m.payload);
  return w.Take();
}

absl::StatusOr<size_t> FrameLength(std::span<const uint8_t> prefix) {
  ByteReader r(prefix.first(std::min<size_t>(4, prefix.size())));
  VFI_ASSIGN_OR_RETURN(uint32_t len, r.U32());
  if (len < kFrameHeaderSize - 4) {
    return FramingError("frame shorter than its header");
  }
  if (len > kMaxFrameSize) return FramingError("frame exceeds size limit");
  return static_cast<size_t>(len) + 4;
}

absl::StatusOr<Message> DecodeMessage(std::span<const uint8_t> frame) {
  VFI_ASSIGN_OR_RETURN(size_t total, FrameLength(frame));
  if (frame.size() < total) return FramingError("truncated frame");
  if (frame.size() > total) return FramingError("trailing bytes after frame");
  ByteReader r(frame.subspan(4));
  Message m;
  VFI_ASSIGN_OR_RETURN(uint8_t type, r.U8());
  if (!IsKnownMsgType(type)) {
    return FramingError(absl::StrCat("unknown message type ", type));
  }
  m.type = static_cast<MsgType>(type);
  VFI_ASSIGN_OR_RETURN(auto sid, r.Take(16));
  std::copy(sid.begin(), sid.end(), m.session_id.begin());
  VFI_ASSIGN_OR_RETURN(m.sender, r.U16());
  VFI_ASSIGN_OR_RETURN(auto hash, r.Take(32));
  std::copy(hash.begin(), hash.end(), m.params_hash.begin());
  VFI_ASSIGN_OR_RETURN(auto payload, r.Take(r.remaining()));
  m.payload.assign(payload.begin(), payload.end());
  return m;
}

// ---- Encoders. -----------------------------------------------------------

Bytes EncodeTpk(const TpkPayload& p) {
  ByteWriter w;
  WriteKey(w, p.tpk);
  return w.Take();
}

Bytes EncodePkShare(const PkSharePayload& p) {
  ByteWriter w;
  w.U16(p.party);
  ckks::WritePoly(w, p.p0);
  return w.Take();
}

Bytes EncodeEvalKeyR1(const EvalKeyR1Payload& p) {
  ByteWriter w;
  w.U16(p.party);
  WriteDigits(w, p.relin.h0);
  WriteDigits(w, p.relin.h1);
  w.U32(static_cast<uint32_t>(p.rotations.size()));
  for (const auto& rot : p.rotations) {
    w.I32(rot.rotation);
    WriteDigits(w, rot.b);
  }
  return w.Take();
}

Bytes EncodeCpk(const CpkPayload& p) {
  ByteWriter w;
  WriteKey(w, p.cpk);
  WriteDigits(w, p.relin_round1.h0);
  WriteDigits(w, p.relin_round1.h1);
  return w.Take();
}

Bytes EncodeEvalKeyR2(const EvalKeyR2Payload& p) {
  ByteWriter w;
  w.U16(p.party);
  WriteDigits(w, p.relin.h);
  return w.Take();
}

Bytes EncodeQuery(const QueryPayload& p) {
  ByteWriter w;
  w.U32(p.seq);
  w.String(p.record_id);
  return w.Take();
}

Bytes EncodeCiphertext(const CiphertextPayload& p) {
  ByteWriter w;
  w.U32(p.seq);
  ckks::WriteCiphertext(w, p.ct);
  return w.Take();
}

Bytes EncodeKsShare(const KsSharePayload& p) {
  ByteWriter w;
  w.U32(p.seq);
  w.U16(p.party);
  w.F64(p.scale);
  ckks::WritePoly(w, p.share.h0);
  ckks::WritePoly(w, p.share.h1);
  return w.Take();
}

Bytes EncodeAck(const AckPayload& p) {
  ByteWriter w;
  w.U8(static_cast<uint8_t>(p.code));
  return w.Take();
}

Bytes EncodeError(const ErrorPayload& p) {
  ByteWriter w;
  w.U8(static_cast<uint8_t>(p.kind));
  w.String(p.message.substr(0, kMaxErrorBytes));
  return w.Take();
}

// ---- Decoders. -----------------------------------------------------------

absl::StatusOr<TpkPayload> DecodeTpk(std::span<const uint8_t> b,
                                     const ring::RingContextPtr& ctx) {
  return Whole<TpkPayload>(b, [&](ByteReader& r) -> absl::StatusOr<TpkPayload> {
    VFI_ASSIGN_OR_RETURN(auto tpk, ReadKey(r, ctx, "target public key"));
    return TpkPayload{std::move(tpk)};
  });
}

absl::StatusOr<PkSharePayload> DecodePkShare(std::span<const uint8_t> b,
                                             const ring::RingContextPtr& ctx) {
  return Whole<PkSharePayload>(
      b, [&](ByteReader& r) -> absl::StatusOr<PkSharePayload> {
        PkSharePayload p;
        VFI_ASSIGN_OR_RETURN(p.party, r.U16());
        VFI_ASSIGN_OR_RETURN(
            p.p0, ReadShaped(r, ctx, ctx->max_level(), false, "key share"));
        return p;
      });
}

absl::StatusOr<EvalKeyR1Payload> DecodeEvalKeyR1(
    std::span<const uint8_t> b, const ring::RingContextPtr& ctx) {
  return Whole<EvalKeyR1Payload>(
      b, [&](ByteReader& r) -> absl::StatusOr<EvalKeyR1Payload> {
        EvalKeyR1Payload p;
        VFI_ASSIGN_OR_RETURN(p.party, r.U16());
        VFI_RETURN_IF_ERROR(ReadDigits(r, ctx, p.relin.h0, "relin share"));
        VFI_RETURN_IF_ERROR(ReadDigits(r, ctx, p.relin.h1, "relin share"));
        VFI_ASSIGN_OR_RETURN(uint32_t count, r.U32());
        if (count > kMaxRotations) {
          return StructuralError("too many rotation key shares");
        }
        for (uint32_t i = 0; i < count; ++i) {
          mphe::RotKeyShare share;
          VFI_ASSIGN_OR_RETURN(share.rotation, r.I32());
          if (share.rotation <= 0 ||
              static_cast<size_t>(share.rotation) >= ctx->params().slots()) {
            return StructuralError("rotation offset out of range");
          }
          VFI_RETURN_IF_ERROR(ReadDigits(r, ctx, share.b, "rotation share"));
          p.rotations.push_back(std::move(share));
        }
        return p;
      });
}

absl::StatusOr<CpkPayload> DecodeCpk(std::span<const uint8_t> b,
                                     const ring::RingContextPtr& ctx) {
  return Whole<CpkPayload>(b, [&](ByteReader& r) -> absl::StatusOr<CpkPayload> {
    CpkPayload p;
    VFI_ASSIGN_OR_RETURN(p.cpk, ReadKey(r, ctx, "common public key"));
    VFI_RETURN_IF_ERROR(ReadDigits(r, ctx, p.relin_round1.h0, "relin round 1"));
    VFI_RETURN_IF_ERROR(ReadDigits(r, ctx, p.relin_round1.h1, "relin round 1"));
    return p;
  });
}

absl::StatusOr<EvalKeyR2Payload> DecodeEvalKeyR2(
    std::span<const uint8_t> b, const ring::RingContextPtr& ctx) {
  return Whole<EvalKeyR2Payload>(
      b, [&](ByteReader& r) -> absl::StatusOr<EvalKeyR2Payload> {
        EvalKeyR2Payload p;
        VFI_ASSIGN_OR_RETURN(p.party, r.U16());
        VFI_RETURN_IF_ERROR(ReadDigits(r, ctx, p.relin.h, "relin round 2"));
        return p;
      });
}

absl::StatusOr<QueryPayload> DecodeQuery(std::span<const uint8_t> b) {
  return Whole<QueryPayload>(b, [&](ByteReader& r) -> absl::StatusOr<QueryPayload> {
    QueryPayload p;
    VFI_ASSIGN_OR_RETURN(p.seq, r.U32());
    VFI_ASSIGN_OR_RETURN(p.record_id, r.String());
    if (p.record_id.size() > kMaxRecordIdBytes) {
      return StructuralError("record id too long");
    }
    return p;
  });
}

absl::StatusOr<CiphertextPayload> DecodeCiphertext(
    std::span<const uint8_t> b, const ring::RingContextPtr& ctx, int level) {
  return Whole<CiphertextPayload>(
      b, [&](ByteReader& r) -> absl::StatusOr<CiphertextPayload> {
        CiphertextPayload p;
        VFI_ASSIGN_OR_RETURN(p.seq, r.U32());
        VFI_ASSIGN_OR_RETURN(p.ct, ckks::ReadCiphertext(r, ctx));
        if (level >= 0 && p.ct.level() != level) {
          return LevelError(absl::StrCat("ciphertext at level ", p.ct.level(),
                                         ", expected ", level));
        }
        return p;
      });
}

absl::StatusOr<KsSharePayload> DecodeKsShare(std::span<const uint8_t> b,
                                             const ring::RingContextPtr& ctx,
                                             int level) {
  return Whole<KsSharePayload>(
      b, [&](ByteReader& r) -> absl::StatusOr<KsSharePayload> {
        KsSharePayload p;
        VFI_ASSIGN_OR_RETURN(p.seq, r.U32());
        VFI_ASSIGN_OR_RETURN(p.party, r.U16());
        VFI_ASSIGN_OR_RETURN(p.scale, r.F64());
        if (!std::isfinite(p.scale) || !(p.scale > 0)) {
          return StructuralError("key switch share has an invalid scale");
        }
        VFI_ASSIGN_OR_RETURN(p.share.h0,
                             ReadShaped(r, ctx, level, false, "key switch share"));
        VFI_ASSIGN_OR_RETURN(
            p.share.h1,
            ReadShaped(r, ctx, p.share.h0.level(), false, "key switch share"));
        return p;
      });
}

absl::StatusOr<AckPayload> DecodeAck(std::span<const uint8_t> b) {
  return Whole<AckPayload>(b, [&](ByteReader& r) -> absl::StatusOr<AckPayload> {
    VFI_ASSIGN_OR_RETURN(uint8_t code, r.U8());
    if (code != static_cast<uint8_t>(AckCode::kSetupComplete) &&
        code != static_cast<uint8_t>(AckCode::kSessionDone)) {
      return StructuralError("unknown ack code");
    }
    return AckPayload{static_cast<AckCode>(code)};
  });
}

absl::StatusOr<ErrorPayload> DecodeError(std::span<const uint8_t> b) {
  return Whole<ErrorPayload>(b, [&](ByteReader& r) -> absl::StatusOr<ErrorPayload> {
    ErrorPayload p;
    VFI_ASSIGN_OR_RETURN(uint8_t kind, r.U8());
    if (kind > static_cast<uint8_t>(ErrorKind::kIo)) {
      return StructuralError("unknown error kind");
    }
    p.kind = static_cast<ErrorKind>(kind);
    VFI_ASSIGN_OR_RETURN(p.message, r.String());
    return p;
  });
}

}  // namespace vfi::protocol
