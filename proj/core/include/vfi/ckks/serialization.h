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

#ifndef VFI_CKKS_SERIALIZATION_H_
#define VFI_CKKS_SERIALIZATION_H_

#include <span>

#include "absl/status/statusor.h"
#include "vfi/ckks/ciphertext.h"
#include "vfi/ckks/keys.h"
#include "vfi/common/bytes.h"
#include "vfi/ring/ring_context.h"

namespace vfi::ckks {

// Deterministic little-endian encoding shared by the wire and disk formats.
//
// Every object starts with {u8 version, u8 object type}. A polynomial is
// {u8 level, u8 form, u8 extended, u32 ringDegree} followed by one block of
// ringDegree u64 words per residue. Scales are IEEE-754 binary64.
inline constexpr uint8_t kSerializationVersion = 1;

enum class ObjectType : uint8_t {
  kPlaintext = 1,
  kCiphertext = 2,
  kEvalKey = 3,
  kPublicKey = 4,
  kPolynomial = 5,
};

void WritePoly(ByteWriter& w, const RnsPoly& p);
absl::StatusOr<RnsPoly> ReadPoly(ByteReader& r,
                                 const ring::RingContextPtr& ctx);

Bytes SerializePlaintext(const Plaintext& pt);
Bytes SerializeCiphertext(const Ciphertext& ct);
Bytes SerializeEvalKey(const EvalKey& key);
Bytes SerializePublicKey(const PublicKey& pk);
Bytes SerializePoly(const RnsPoly& p);

void WriteCiphertext(ByteWriter& w, const Ciphertext& ct);
absl::StatusOr<Ciphertext> ReadCiphertext(ByteReader& r,
                                          const ring::RingContextPtr& ctx);
void WriteEvalKey(ByteWriter& w, const EvalKey& key);
absl::StatusOr<EvalKey> ReadEvalKey(ByteReader& r,
                                    const ring::RingContextPtr& ctx);
void WritePublicKey(ByteWriter& w, const PublicKey& pk);
absl::StatusOr<PublicKey> ReadPublicKey(ByteReader& r,
                                        const ring::RingContextPtr& ctx);

// Whole-buffer parsers; trailing bytes are a framing error.
absl::StatusOr<Plaintext> DeserializePlaintext(
    std::span<const uint8_t> data, const ring::RingContextPtr& ctx);
absl::StatusOr<Ciphertext> DeserializeCiphertext(
    std::span<const uint8_t> data, const ring::RingContextPtr& ctx);
absl::StatusOr<EvalKey> DeserializeEvalKey(std::span<const uint8_t> data,
                                           const ring::RingContextPtr& ctx);
absl::StatusOr<PublicKey> DeserializePublicKey(
    std::span<const uint8_t> data, const ring::RingContextPtr& ctx);
absl::StatusOr<RnsPoly> DeserializePoly(std::span<const uint8_t> data,
                                        const ring::RingContextPtr& ctx);

// Byte size of a serialized ciphertext at `level` (used for transcript
// accounting).
size_t SerializedCiphertextSize(size_t ring_degree, int level);

}  // namespace vfi::ckks

#endif  // VFI_CKKS_SERIALIZATION_H_
