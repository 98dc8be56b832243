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

#ifndef VFI_CKKS_KEYS_H_
#define VFI_CKKS_KEYS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "vfi/ring/prng.h"
#include "vfi/ring/rns_poly.h"

namespace vfi::ckks {

using ring::RnsPoly;

// Ternary secret s, stored in NTT form over the extended basis Q_L * P.
struct SecretKey {
  RnsPoly s;
};

// (p0, p1) = (-a s + e, a) at level L, NTT form.
struct PublicKey {
  RnsPoly p0;
  RnsPoly p1;
};

enum class EvalKeyKind : uint8_t { kRelinearization = 0, kRotation = 1 };

// Hybrid key-switching key from s' to s: one pair per chain prime j,
//   b_j = -a_j s + e_j + P * [j-th CRT gadget] * s',  a_j,
// over the extended basis at level L, NTT form.
struct EvalKey {
  EvalKeyKind kind = EvalKeyKind::kRelinearization;
  // Slot offset (rotation keys only), normalized to [0, slots).
  int rotation = 0;
  uint64_t galois = 1;
  std::vector<RnsPoly> b;
  std::vector<RnsPoly> a;
};

// Relinearization key plus rotation keys indexed by normalized offset.
struct EvalKeySet {
  std::optional<EvalKey> relin;
  std::map<int, EvalKey> rotations;

  const EvalKey* FindRotation(int normalized_offset) const {
    auto it = rotations.find(normalized_offset);
    return it == rotations.end() ? nullptr : &it->second;
  }
};

int NormalizeRotation(int k, size_t slots);

// Single-key generation (used directly in tests and as the N = 1 reference).
SecretKey GenerateSecretKey(const ring::RingContextPtr& ctx, ring::Prng& prng);
// Public key with an explicit `a` (level L, NTT, not extended).
PublicKey GeneratePublicKey(const SecretKey& sk, const RnsPoly& a,
                            ring::Prng& prng);
PublicKey GeneratePublicKey(const SecretKey& sk, ring::Prng& prng);

// Key-switching key from `from` (extended, NTT) to `sk`, with a_j supplied by
// `crs_a` (L + 1 uniform polynomials) or sampled when empty.
EvalKey GenerateSwitchingKey(const SecretKey& sk, const RnsPoly& from,
                             std::vector<RnsPoly> crs_a, ring::Prng& prng);
EvalKey GenerateRelinKey(const SecretKey& sk, ring::Prng& prng);
EvalKey GenerateRotationKey(const SecretKey& sk, int k, ring::Prng& prng);

// Adds P * [gadget_j] * x to `target` in place (target and x extended, NTT,
// level L).
void AddGadgetTerm(RnsPoly& target, const RnsPoly& x, size_t j);

// Key switching: given c (NTT, level l <= L, not extended) returns
// (u0, u1) with u0 + u1 s ~= c s' (NTT, level l).
std::pair<RnsPoly, RnsPoly> KeySwitch(const RnsPoly& c, const EvalKey& key);

// Digit decomposition of c lifted to the extended basis at c's level: one
// NTT-form polynomial per chain prime of c.
std::vector<RnsPoly> DecomposeForKeySwitch(const RnsPoly& c);

// Restricts a level-L extended key polynomial to `level` (keeping P).
RnsPoly RestrictExtended(const RnsPoly& p, int level);

}  // namespace vfi::ckks

#endif  // VFI_CKKS_KEYS_H_
