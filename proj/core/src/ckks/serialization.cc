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

#include "vfi/ckks/serialization.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "vfi/common/status.h"
#include "vfi/common/status_macros.h"

namespace vfi::ckks {
namespace {

void WriteHeader(ByteWriter& w, ObjectType type) {
  w.U8(kSerializationVersion);
  w.U8(static_cast<uint8_t>(type));
}

absl::Status ReadHeader(ByteReader& r, ObjectType type) {
  VFI_ASSIGN_OR_RETURN(uint8_t version, r.U8());
  if (version != kSerializationVersion) {
    return StructuralError(absl::StrCat("unsupported version ", version));
  }
  VFI_ASSIGN_OR_RETURN(uint8_t t, r.U8());
  if (t != static_cast<uint8_t>(type)) {
    return StructuralError(absl::StrCat("expected object type ",
                                        static_cast<int>(type), ", got ", t));
  }
  return absl::OkStatus();
}

absl::StatusOr<double> ReadScale(ByteReader& r) {
  VFI_ASSIGN_OR_RETURN(double scale, r.F64());
  if (!std::isfinite(scale) || !(scale > 0)) {
    return StructuralError("scale must be positive and finite");
  }
  return scale;
}

template <typename T, typename Reader>
absl::StatusOr<T> ParseWhole(std::span<const uint8_t> data,
                             const ring::RingContextPtr& ctx, ObjectType type,
                             Reader reader) {
  ByteReader r(data);
  VFI_RETURN_IF_ERROR(ReadHeader(r, type));
  VFI_ASSIGN_OR_RETURN(T value, reader(r, ctx));
  VFI_RETURN_IF_ERROR(r.ExpectDone());
  return value;
}

}  // namespace

void WritePoly(ByteWriter& w, const RnsPoly& p) {
  w.U8(static_cast<uint8_t>(p.level()));
  w.U8(static_cast<uint8_t>(p.form()));
  w.U8(p.extended() ? 1 : 0);
  w.U32(static_cast<uint32_t>(p.n()));
  w.U64Array(p.data());
}

absl::StatusOr<RnsPoly> ReadPoly(ByteReader& r,
                                 const ring::RingContextPtr& ctx) {
  VFI_ASSIGN_OR_RETURN(uint8_t level, r.U8());
  VFI_ASSIGN_OR_RETURN(uint8_t form, r.U8());
  VFI_ASSIGN_OR_RETURN(uint8_t extended, r.U8());
  VFI_ASSIGN_OR_RETURN(uint32_t n, r.U32());
  if (n != ctx->n()) {
    return StructuralError(
        absl::StrCat("ring degree ", n, " does not match ", ctx->n()));
  }
  if (level > ctx->max_level()) {
    return StructuralError(absl::StrCat("level ", level, " out of range"));
  }
  if (form > 1 || extended > 1) {
    return StructuralError("invalid polynomial flags");
  }
  RnsPoly p(ctx, level, static_cast<ring::PolyForm>(form), extended == 1);
  if (r.remaining() < p.data().size() * sizeof(uint64_t)) {
    return FramingError("truncated polynomial");
  }
  VFI_RETURN_IF_ERROR(r.U64Array(p.mutable_data()));
  for (size_t k = 0; k < p.num_residues(); ++k) {
    const uint64_t q = p.modulus(k).value();
    for (uint64_t x : p.residue(k)) {
      if (x >= q) return StructuralError("coefficient not reduced");
    }
  }
  return p;
}

void WriteCiphertext(ByteWriter& w, const Ciphertext& ct) {
  w.F64(ct.scale);
  WritePoly(w, ct.c0);
  WritePoly(w, ct.c1);
}

absl::StatusOr<Ciphertext> ReadCiphertext(ByteReader& r,
                                          const ring::RingContextPtr& ctx) {
  Ciphertext ct;
  VFI_ASSIGN_OR_RETURN(ct.scale, ReadScale(r));
  VFI_ASSIGN_OR_RETURN(ct.c0, ReadPoly(r, ctx));
  VFI_ASSIGN_OR_RETURN(ct.c1, ReadPoly(r, ctx));
  if (!ct.c0.IsCompatible(ct.c1) || !ct.c0.is_ntt() || ct.c0.extended()) {
    return StructuralError("ciphertext components are inconsistent");
  }
  return ct;
}

void WriteEvalKey(ByteWriter& w, const EvalKey& key) {
  w.U8(static_cast<uint8_t>(key.kind));
  w.I32(key.rotation);
  w.U64(key.galois);
  w.U32(static_cast<uint32_t>(key.b.size()));
  for (size_t j = 0; j < key.b.size(); ++j) {
    WritePoly(w, key.b[j]);
    WritePoly(w, key.a[j]);
  }
}

absl::StatusOr<EvalKey> ReadEvalKey(ByteReader& r,
                                    const ring::RingContextPtr& ctx) {
  EvalKey key;
  VFI_ASSIGN_OR_RETURN(uint8_t kind, r.U8());
  if (kind > 1) return StructuralError("unknown evaluation key kind");
  key.kind = static_cast<EvalKeyKind>(kind);
  VFI_ASSIGN_OR_RETURN(key.rotation, r.I32());
  VFI_ASSIGN_OR_RETURN(key.galois, r.U64());
  VFI_ASSIGN_OR_RETURN(uint32_t count, r.U32());
  if (count != static_cast<uint32_t>(ctx->max_level() + 1)) {
    return StructuralError("evaluation key has the wrong digit count");
  }
  const uint64_t two_n = 2 * ctx->n();
  if (key.kind == EvalKeyKind::kRotation) {
    if (key.rotation <= 0 || key.rotation >= static_cast<int>(ctx->n() / 2) ||
        key.galois !=
            ring::GaloisElementForRotation(key.rotation, ctx->n())) {
      return StructuralError("rotation key metadata is inconsistent");
    }
  } else if (key.galois % two_n != 1 || key.rotation != 0) {
    return StructuralError("relinearization key metadata is inconsistent");
  }
  for (uint32_t j = 0; j < count; ++j) {
    VFI_ASSIGN_OR_RETURN(RnsPoly b, ReadPoly(r, ctx));
    VFI_ASSIGN_OR_RETURN(RnsPoly a, ReadPoly(r, ctx));
    if (!b.IsCompatible(a) || !b.extended() || !b.is_ntt() ||
        b.level() != ctx->max_level()) {
      return StructuralError("evaluation key polynomial has the wrong shape");
    }
    key.b.push_back(std::move(b));
    key.a.push_back(std::move(a));
  }
  return key;
}

void WritePublicKey(ByteWriter& w, const PublicKey& pk) {
  WritePoly(w, pk.p0);
  WritePoly(w, pk.p1);
}

absl::StatusOr<PublicKey> ReadPublicKey(ByteReader& r,
                                        const ring::RingContextPtr& ctx) {
  PublicKey pk;
  VFI_ASSIGN_OR_RETURN(pk.p0, ReadPoly(r, ctx));
  VFI_ASSIGN_OR_RETURN(pk.p1, ReadPoly(r, ctx));
  if (!pk.p0.IsCompatible(pk.p1) || !pk.p0.is_ntt() || pk.p0.extended() ||
      pk.p0.level() != ctx->max_level()) {
    return StructuralError("public key has the wrong shape");
  }
  return pk;
}

Bytes SerializePlaintext(const Plaintext& pt) {
  ByteWriter w;
  WriteHeader(w, ObjectType::kPlaintext);
  w.F64(pt.scale);
  WritePoly(w, pt.poly);
  return w.Take();
}

Bytes SerializeCiphertext(const Ciphertext& ct) {
  ByteWriter w(SerializedCiphertextSize(ct.c0.n(), ct.level()));
  WriteHeader(w, ObjectType::kCiphertext);
  WriteCiphertext(w, ct);
  return w.Take();
}

Bytes SerializeEvalKey(const EvalKey& key) {
  ByteWriter w;
  WriteHeader(w, ObjectType::kEvalKey);
  WriteEvalKey(w, key);
  return w.Take();
}

Bytes SerializePublicKey(const PublicKey& pk) {
  ByteWriter w;
  WriteHeader(w, ObjectType::kPublicKey);
  WritePublicKey(w, pk);
  return w.Take();
}

Bytes SerializePoly(const RnsPoly& p) {
  ByteWriter w;
  WriteHeader(w, ObjectType::kPolynomial);
  WritePoly(w, p);
  return w.Take();
}

absl::StatusOr<Plaintext> DeserializePlaintext(
    std::span<const uint8_t> data, const ring::RingContextPtr& ctx) {
  return ParseWhole<Plaintext>(
      data, ctx, ObjectType::kPlaintext,
      [](ByteReader& r,
         const ring::RingContextPtr& c) -> absl::StatusOr<Plaintext> {
        Plaintext pt;
        VFI_ASSIGN_OR_RETURN(pt.scale, ReadScale(r));
        VFI_ASSIGN_OR_RETURN(pt.poly, ReadPoly(r, c));
        return pt;
      });
}

absl::StatusOr<Ciphertext> DeserializeCiphertext(
    std::span<const uint8_t> data, const ring::RingContextPtr& ctx) {
  return ParseWhole<Ciphertext>(data, ctx, ObjectType::kCiphertext,
                                ReadCiphertext);
}

absl::StatusOr<EvalKey> DeserializeEvalKey(std::span<const uint8_t> data,
                                           const ring::RingContextPtr& ctx) {
  return ParseWhole<EvalKey>(data, ctx, ObjectType::kEvalKey, ReadEvalKey);
}

absl::StatusOr<PublicKey> DeserializePublicKey(
    std::span<const uint8_t> data, const ring::RingContextPtr& ctx) {
  return ParseWhole<PublicKey>(data, ctx, ObjectType::kPublicKey,
                               ReadPublicKey);
}

absl::StatusOr<RnsPoly> DeserializePoly(std::span<const uint8_t> data,
                                        const ring::RingContextPtr& ctx) {
  return ParseWhole<RnsPoly>(data, ctx, ObjectType::kPolynomial, ReadPoly);
}

size_t SerializedCiphertextSize(size_t ring_degree, int level) {
  const size_t poly = 7 + ring_degree * (level + 1) * sizeof(uint64_t);
  return 2 + 8 + 2 * poly;
}

}  // namespace vfi::ckks
