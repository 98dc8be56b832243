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

#include "vfi/ckks/encryptor.h"

#include "absl/strings/str_cat.h"
#include "vfi/common/status.h"
#include "vfi/ring/sampler.h"

namespace vfi::ckks {

using ring::Distribution;

absl::StatusOr<Ciphertext> Encrypt(const PublicKey& pk, const Plaintext& pt,
                                   ring::Prng& prng) {
  if (pk.p0.empty() || pt.poly.empty()) {
    return StructuralError("empty key or plaintext");
  }
  if (&pk.p0.context() != &pt.poly.context()) {
    return StructuralError("key and plaintext use different parameters");
  }
  const auto& ctx = pk.p0.context_ptr();
  if (pt.level() != ctx->max_level() || pk.p0.level() != ctx->max_level()) {
    return LevelError(absl::StrCat("encryption requires level ",
                                   ctx->max_level(), ", plaintext is at ",
                                   pt.level()));
  }
  if (!pt.poly.is_ntt()) return StructuralError("plaintext must be NTT form");
  const int level = ctx->max_level();
  RnsPoly u = ring::ToNtt(
      ring::Sample(Distribution::kTernary, ctx, level, false, prng));
  Ciphertext ct;
  ct.c0 = ring::ToNtt(
      ring::Sample(Distribution::kGaussian, ctx, level, false, prng));
  ct.c0.MulAddInPlace(u, pk.p0);
  ct.c0.AddInPlace(pt.poly);
  ct.c1 = ring::ToNtt(
      ring::Sample(Distribution::kGaussian, ctx, level, false, prng));
  ct.c1.MulAddInPlace(u, pk.p1);
  ct.scale = pt.scale;
  return ct;
}

RnsPoly SecretAtLevel(const RnsPoly& s, int level) {
  RnsPoly out(s.context_ptr(), level, s.form(), false);
  for (int k = 0; k <= level; ++k) {
    std::copy(s.residue(k).begin(), s.residue(k).end(),
              out.residue(k).begin());
  }
  return out;
}

Plaintext Decrypt(const SecretKey& sk, const Ciphertext& ct) {
  RnsPoly m = ct.c0;
  m.MulAddInPlace(ct.c1, SecretAtLevel(sk.s, ct.level()));
  return {std::move(m), ct.scale};
}

}  // namespace vfi::ckks
