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

#include "vfi/ckks/keys.h"

#include <cassert>

#include "vfi/ring/sampler.h"

namespace vfi::ckks {

using ring::Distribution;
using ring::PolyForm;
using ring::RingContextPtr;

int NormalizeRotation(int k, size_t slots) {
  const int s = static_cast<int>(slots);
  int r = k % s;
  return r < 0 ? r + s : r;
}

SecretKey GenerateSecretKey(const RingContextPtr& ctx, ring::Prng& prng) {
  RnsPoly s = ring::Sample(Distribution::kTernary, ctx, ctx->max_level(),
                           /*extended=*/true, prng);
  s.ToNttInPlace();
  return {std::move(s)};
}

PublicKey GeneratePublicKey(const SecretKey& sk, const RnsPoly& a,
                            ring::Prng& prng) {
  const RingContextPtr& ctx = sk.s.context_ptr();
  const int level = ctx->max_level();
  RnsPoly s = sk.s;
  s.DropSpecial();
  RnsPoly e =
      ring::ToNtt(ring::Sample(Distribution::kGaussian, ctx, level, false, prng));
  RnsPoly p0 = a;
  p0.MulInPlace(s);
  p0.NegInPlace();
  p0.AddInPlace(e);
  return {std::move(p0), a};
}

PublicKey GeneratePublicKey(const SecretKey& sk, ring::Prng& prng) {
  const RingContextPtr& ctx = sk.s.context_ptr();
  return GeneratePublicKey(
      sk, ring::SampleUniform(ctx, ctx->max_level(), false, prng), prng);
}

void AddGadgetTerm(RnsPoly& target, const RnsPoly& x, size_t j) {
  const ring::RingContext& ctx = target.context();
  const ring::Modulus& q = ctx.modulus(j);
  const uint64_t p = ctx.p_mod_q(j);
  const uint64_t ps = ring::ShoupPrecompute(p, q.value());
  auto t = target.residue(j);
  auto v = x.residue(j);
  for (size_t i = 0; i < t.size(); ++i) {
    t[i] = q.Add(t[i], ring::MulShoup(v[i], p, ps, q.value()));
  }
}

EvalKey GenerateSwitchingKey(const SecretKey& sk, const RnsPoly& from,
                             std::vector<RnsPoly> crs_a, ring::Prng& prng) {
  const RingContextPtr& ctx = sk.s.context_ptr();
  const int level = ctx->max_level();
  EvalKey key;
  for (int j = 0; j <= level; ++j) {
    RnsPoly a = crs_a.empty() ? ring::SampleUniform(ctx, level, true, prng)
                              : std::move(crs_a[j]);
    RnsPoly b = a;
    b.MulInPlace(sk.s);
    b.NegInPlace();
    b.AddInPlace(ring::ToNtt(
        ring::Sample(Distribution::kGaussian, ctx, level, true, prng)));
    AddGadgetTerm(b, from, j);
    key.b.push_back(std::move(b));
    key.a.push_back(std::move(a));
  }
  return key;
}

EvalKey GenerateRelinKey(const SecretKey& sk, ring::Prng& prng) {
  RnsPoly s2 = sk.s;
  s2.MulInPlace(sk.s);
  EvalKey key = GenerateSwitchingKey(sk, s2, {}, prng);
  key.kind = EvalKeyKind::kRelinearization;
  return key;
}

EvalKey GenerateRotationKey(const SecretKey& sk, int k, ring::Prng& prng) {
  const size_t n = sk.s.n();
  const int norm = NormalizeRotation(k, n / 2);
  const uint64_t g = ring::GaloisElementForRotation(norm, n);
  EvalKey key = GenerateSwitchingKey(sk, sk.s.Automorphism(g), {}, prng);
  key.kind = EvalKeyKind::kRotation;
  key.rotation = norm;
  key.galois = g;
  return key;
}

RnsPoly RestrictExtended(const RnsPoly& p, int level) {
  assert(p.extended() && level <= p.level());
  if (level == p.level()) return p;
  RnsPoly out(p.context_ptr(), level, p.form(), true);
  for (int k = 0; k <= level; ++k) {
    std::copy(p.residue(k).begin(), p.residue(k).end(),
              out.residue(k).begin());
  }
  auto sp = p.residue(p.level() + 1);
  std::copy(sp.begin(), sp.end(), out.residue(level + 1).begin());
  return out;
}

std::vector<RnsPoly> DecomposeForKeySwitch(const RnsPoly& c) {
  const ring::RingContext& ctx = c.context();
  const int level = c.level();
  const size_t n = c.n();
  std::vector<RnsPoly> digits;
  digits.reserve(level + 1);
  std::vector<uint64_t> coeff(n);
  for (int j = 0; j <= level; ++j) {
    std::copy(c.residue(j).begin(), c.residue(j).end(), coeff.begin());
    if (c.is_ntt()) ctx.ntt(j).Inverse(coeff);
    RnsPoly d(c.context_ptr(), level, PolyForm::kNtt, true);
    for (size_t k = 0; k < d.num_residues(); ++k) {
      auto r = d.residue(k);
      if (k == static_cast<size_t>(j)) {
        std::copy(c.residue(j).begin(), c.residue(j).end(), r.begin());
        if (!c.is_ntt()) ctx.ntt(j).Forward(r);
        continue;
      }
      const ring::Modulus& q = d.modulus(k);
      for (size_t i = 0; i < n; ++i) r[i] = q.Reduce(coeff[i]);
      ctx.ntt(d.modulus_index(k)).Forward(r);
    }
    digits.push_back(std::move(d));
  }
  return digits;
}

std::pair<RnsPoly, RnsPoly> KeySwitch(const RnsPoly& c, const EvalKey& key) {
  const int level = c.level();
  const auto digits = DecomposeForKeySwitch(c);
  RnsPoly u0(c.context_ptr(), level, PolyForm::kNtt, true);
  RnsPoly u1(c.context_ptr(), level, PolyForm::kNtt, true);
  const size_t n = c.n();
  for (int j = 0; j <= level; ++j) {
    const RnsPoly& d = digits[j];
    for (size_t k = 0; k < u0.num_residues(); ++k) {
      // Key residue index: chain primes map directly; the special prime is
      // the key's last residue.
      const size_t key_k = k <= static_cast<size_t>(level) ? k
                                                           : key.b[j].level() + 1;
      const ring::Modulus& q = u0.modulus(k);
      auto dr = d.residue(k);
      auto br = key.b[j].residue(key_k);
      auto ar = key.a[j].residue(key_k);
      auto o0 = u0.residue(k);
      auto o1 = u1.residue(k);
      for (size_t i = 0; i < n; ++i) {
        o0[i] = q.Add(o0[i], q.Mul(dr[i], br[i]));
        o1[i] = q.Add(o1[i], q.Mul(dr[i], ar[i]));
      }
    }
  }
  u0.DivideRoundBySpecialInPlace();
  u1.DivideRoundBySpecialInPlace();
  return {std::move(u0), std::move(u1)};
}

}  // namespace vfi::ckks
