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

#ifndef VFI_MPHE_MPHE_H_
#define VFI_MPHE_MPHE_H_

#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "vfi/ckks/ciphertext.h"
#include "vfi/ckks/keys.h"
#include "vfi/ring/prng.h"
#include "vfi/ring/ring_context.h"

// Multiparty CKKS: the secret key s = sum_i s_i is additively shared among N
// parties. Public keys, evaluation keys and decryption are produced from
// per-party shares combined by plain summation.
namespace vfi::mphe {

using ckks::Ciphertext;
using ckks::EvalKey;
using ckks::PublicKey;
using ckks::SecretKey;
using ring::Prng;
using ring::RingContextPtr;
using ring::RnsPoly;

struct PartyKeys {
  int party_id = 0;
  SecretKey sk;
  // (p0_i, a) with the shared CRS polynomial a.
  PublicKey pk;
};

// Held by the coordinator only; tsk never leaves it.
struct TargetKeyPair {
  PublicKey tpk;
  SecretKey tsk;
};

// Common reference polynomials, identical on every party.
RnsPoly PublicKeyCrs(const RingContextPtr& ctx);
std::vector<RnsPoly> RotationKeyCrs(const RingContextPtr& ctx, int rotation);
std::vector<RnsPoly> RelinKeyCrs(const RingContextPtr& ctx);

PartyKeys KeyGen(const RingContextPtr& ctx, int party_id, Prng& prng);

// cpk = (sum_i p0_i, a). Protocol error when shares use different CRS
// polynomials; incomplete-protocol error when no share is given.
absl::StatusOr<PublicKey> DKeyGen(std::span<const PublicKey> shares);

// ---- Rotation keys (one round). ---------------------------------------
struct RotKeyShare {
  int rotation = 0;  // normalized slot offset
  std::vector<RnsPoly> b;
};

RotKeyShare GenRotKeyShare(const SecretKey& sk, int rotation, Prng& prng);
// Sums exactly `parties` shares for one offset.
absl::StatusOr<EvalKey> ColRotKeyGen(std::span<const RotKeyShare> shares,
                                     size_t parties);

// ---- Relinearization key (two rounds). --------------------------------
struct RelinShareR1 {
  std::vector<RnsPoly> h0;  // -u_i a_j + P w_j s_i + e
  std::vector<RnsPoly> h1;  // s_i a_j + e
};
struct RelinShareR2 {
  std::vector<RnsPoly> h;  // s_i h0_j + (u_i - s_i) h1_j + e
};
// Per-party state kept between the rounds.
struct RelinEphemeral {
  SecretKey u;
};

RelinShareR1 GenRelinShareR1(const SecretKey& sk, RelinEphemeral& eph,
                             Prng& prng);
absl::StatusOr<RelinShareR1> AggregateRelinR1(
    std::span<const RelinShareR1> shares, size_t parties);
RelinShareR2 GenRelinShareR2(const SecretKey& sk, const RelinEphemeral& eph,
                             const RelinShareR1& round1, Prng& prng);
absl::StatusOr<EvalKey> ColRelinKeyGen(std::span<const RelinShareR2> shares,
                                       const RelinShareR1& round1,
                                       size_t parties);

// ---- Decryption paths. ------------------------------------------------
TargetKeyPair GenTargetKeyPair(const RingContextPtr& ctx, Prng& prng);

struct KsShare {
  RnsPoly h0;
  RnsPoly h1;
};

// h_i = (s_i c1 + u_i tpk0 + smudge [+ c0 for party 0], u_i tpk1 + e).
KsShare PubKeySwitch(const Ciphertext& ct, const SecretKey& sk_i,
                     const PublicKey& tpk, bool include_c0, Prng& prng);
// Sum of exactly `parties` shares, as a ciphertext under tsk.
absl::StatusOr<Ciphertext> AggregateKsShares(std::span<const KsShare> shares,
                                             double scale, size_t parties);
// Aggregates then decrypts under tsk and decodes.
absl::StatusOr<std::vector<double>> AggDec(std::span<const KsShare> shares,
                                           const TargetKeyPair& target,
                                           double scale, size_t parties);

// pd_i = s_i c1 + smudge.
RnsPoly Reconstruct(const Ciphertext& ct, const SecretKey& sk_i, Prng& prng);
// c0 + sum_i pd_i, decoded.
absl::StatusOr<std::vector<double>> DecAgg(std::span<const RnsPoly> partials,
                                           const Ciphertext& ct,
                                           size_t parties);

}  // namespace vfi::mphe

#endif  // VFI_MPHE_MPHE_H_
