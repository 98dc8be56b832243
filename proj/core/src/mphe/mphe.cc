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

#include "vfi/mphe/mphe.h"

#include "absl/strings/str_cat.h"
#include "vfi/ckks/encoder.h"
#include "vfi/ckks/encryptor.h"
#include "vfi/common/status.h"
#include "vfi/common/status_macros.h"
#include "vfi/ring/sampler.h"

namespace vfi::mphe {
namespace {

using ring::Distribution;
using ring::PolyForm;

RnsPoly Crs(const RingContextPtr& ctx, const std::string& label,
            bool extended) {
  // The seed length is fixed by the parameter type, so this cannot fail.
  return *ring::SampleCrs(ctx, ctx->params().crs_seed, label,
                          ctx->max_level(), extended);
}

RnsPoly Noise(Distribution dist, const RingContextPtr& ctx, int level,
              bool extended, Prng& prng) {
  return ring::ToNtt(ring::Sample(dist, ctx, level, extended, prng));
}

absl::Status CheckCount(size_t got, size_t want, absl::string_view what) {
  if (got != want) {
    return IncompleteProtocolError(
        absl::StrCat(what, ": expected ", want, " shares, got ", got));
  }
  if (want == 0) return IncompleteProtocolError(absl::StrCat(what, ": no shares"));
  return absl::OkStatus();
}

absl::Status CheckDigits(const std::vector<RnsPoly>& v, size_t digits) {
  if (v.size() != digits) {
    return StructuralError("share has the wrong number of digits");
  }
  for (size_t j = 0; j < digits; ++j) {
    if (v[j].empty() || !v[j].IsCompatible(v[0])) {
      return StructuralError("share polynomials are inconsistent");
    }
  }
  return absl::OkStatus();
}

}  // namespace

RnsPoly PublicKeyCrs(const RingContextPtr& ctx) {
  return Crs(ctx, "cpk", /*extended=*/false);
}

std::vector<RnsPoly> RotationKeyCrs(const RingContextPtr& ctx, int rotation) {
  std::vector<RnsPoly> out;
  for (int j = 0; j <= ctx->max_level(); ++j) {
    out.push_back(Crs(ctx, absl::StrCat("rot/", rotation, "/", j), true));
  }
  return out;
}

std::vector<RnsPoly> RelinKeyCrs(const RingContextPtr& ctx) {
  std::vector<RnsPoly> out;
  for (int j = 0; j <= ctx->max_level(); ++j) {
    out.push_back(Crs(ctx, absl::StrCat("rlk/", j), true));
  }
  return out;
}

PartyKeys KeyGen(const RingContextPtr& ctx, int party_id, Prng& prng) {
  PartyKeys keys;
  keys.party_id = party_id;
  keys.sk = ckks::GenerateSecretKey(ctx, prng);
  keys.pk = ckks::GeneratePublicKey(keys.sk, PublicKeyCrs(ctx), prng);
  return keys;
}

absl::StatusOr<PublicKey> DKeyGen(std::span<const PublicKey> shares) {
  if (shares.empty()) return IncompleteProtocolError("no public key shares");
  PublicKey cpk = shares[0];
  for (size_t i = 1; i < shares.size(); ++i) {
    if (!shares[i].p0.IsCompatible(cpk.p0) ||
        !shares[i].p1.IsCompatible(cpk.p1)) {
      return StructuralError("public key shares have different shapes");
    }
    if (!(shares[i].p1 == cpk.p1)) {
      return ProtocolError(
          absl::StrCat("public key share ", i, " uses a different CRS"));
    }
    cpk.p0.AddInPlace(shares[i].p0);
  }
  return cpk;
}

RotKeyShare GenRotKeyShare(const SecretKey& sk, int rotation, Prng& prng) {
  const RingContextPtr& ctx = sk.s.context_ptr();
  const size_t n = ctx->n();
  const int norm = ckks::NormalizeRotation(rotation, n / 2);
  const uint64_t g = ring::GaloisElementForRotation(norm, n);
  const RnsPoly rotated = sk.s.Automorphism(g);
  const auto crs = RotationKeyCrs(ctx, norm);
  RotKeyShare share;
  share.rotation = norm;
  for (int j = 0; j <= ctx->max_level(); ++j) {
    RnsPoly b = crs[j];
    b.MulInPlace(sk.s);
    b.NegInPlace();
    b.AddInPlace(Noise(Distribution::kGaussian, ctx, ctx->max_level(), true,
                       prng));
    ckks::AddGadgetTerm(b, rotated, j);
    share.b.push_back(std::move(b));
  }
  return share;
}

absl::StatusOr<EvalKey> ColRotKeyGen(std::span<const RotKeyShare> shares,
                                     size_t parties) {
  VFI_RETURN_IF_ERROR(CheckCount(shares.size(), parties, "rotation key"));
  const RingContextPtr& ctx = shares[0].b.at(0).context_ptr();
  const size_t digits = ctx->max_level() + 1;
  EvalKey key;
  key.kind = ckks::EvalKeyKind::kRotation;
  key.rotation = shares[0].rotation;
  key.galois = ring::GaloisElementForRotation(key.rotation, ctx->n());
  for (const auto& s : shares) {
    if (s.rotation != key.rotation) {
      return ProtocolError("rotation key shares for different offsets");
    }
    VFI_RETURN_IF_ERROR(CheckDigits(s.b, digits));
  }
  key.b = shares[0].b;
  for (size_t i = 1; i < shares.size(); ++i) {
    for (size_t j = 0; j < digits; ++j) key.b[j].AddInPlace(shares[i].b[j]);
  }
  key.a = RotationKeyCrs(ctx, key.rotation);
  return key;
}

RelinShareR1 GenRelinShareR1(const SecretKey& sk, RelinEphemeral& eph,
                             Prng& prng) {
  const RingContextPtr& ctx = sk.s.context_ptr();
  const int level = ctx->max_level();
  eph.u = ckks::GenerateSecretKey(ctx, prng);
  const auto crs = RelinKeyCrs(ctx);
  RelinShareR1 share;
  for (int j = 0; j <= level; ++j) {
    RnsPoly h0 = crs[j];
    h0.MulInPlace(eph.u.s);
    h0.NegInPlace();
    h0.AddInPlace(Noise(Distribution::kGaussian, ctx, level, true, prng));
    ckks::AddGadgetTerm(h0, sk.s, j);
    RnsPoly h1 = crs[j];
    h1.MulInPlace(sk.s);
    h1.AddInPlace(Noise(Distribution::kGaussian, ctx, level, true, prng));
    share.h0.push_back(std::move(h0));
    share.h1.push_back(std::move(h1));
  }
  return share;
}

absl::StatusOr<RelinShareR1> AggregateRelinR1(
    std::span<const RelinShareR1> shares, size_t parties) {
  VFI_RETURN_IF_ERROR(CheckCount(shares.size(), parties, "relinearization r1"));
  const RingContextPtr& ctx = shares[0].h0.at(0).context_ptr();
  const size_t digits = ctx->max_level() + 1;
  for (const auto& s : shares) {
    VFI_RETURN_IF_ERROR(CheckDigits(s.h0, digits));
    VFI_RETURN_IF_ERROR(CheckDigits(s.h1, digits));
  }
  RelinShareR1 agg = shares[0];
  for (size_t i = 1; i < shares.size(); ++i) {
    for (size_t j = 0; j < digits; ++j) {
      agg.h0[j].AddInPlace(shares[i].h0[j]);
      agg.h1[j].AddInPlace(shares[i].h1[j]);
    }
  }
  return agg;
}

RelinShareR2 GenRelinShareR2(const SecretKey& sk, const RelinEphemeral& eph,
                             const RelinShareR1& round1, Prng& prng) {
  const RingContextPtr& ctx = sk.s.context_ptr();
  const int level = ctx->max_level();
  RnsPoly u_minus_s = eph.u.s;
  u_minus_s.SubInPlace(sk.s);
  RelinShareR2 share;
  for (int j = 0; j <= level; ++j) {
    RnsPoly h = Noise(Distribution::kGaussian, ctx, level, true, prng);
    h.MulAddInPlace(sk.s, round1.h0[j]);
    h.MulAddInPlace(u_minus_s, round1.h1[j]);
    share.h.push_back(std::move(h));
  }
  return share;
}

absl::StatusOr<EvalKey> ColRelinKeyGen(std::span<const RelinShareR2> shares,
                                       const RelinShareR1& round1,
                                       size_t parties) {
  VFI_RETURN_IF_ERROR(CheckCount(shares.size(), parties, "relinearization r2"));
  const RingContextPtr& ctx = round1.h1.at(0).context_ptr();
  const size_t digits = ctx->max_level() + 1;
  VFI_RETURN_IF_ERROR(CheckDigits(round1.h1, digits));
  for (const auto& s : shares) VFI_RETURN_IF_ERROR(CheckDigits(s.h, digits));
  EvalKey key;
  key.kind = ckks::EvalKeyKind::kRelinearization;
  key.b = shares[0].h;
  for (size_t i = 1; i < shares.size(); ++i) {
    for (size_t j = 0; j < digits; ++j) key.b[j].AddInPlace(shares[i].h[j]);
  }
  key.a = round1.h1;
  return key;
}

TargetKeyPair GenTargetKeyPair(const RingContextPtr& ctx, Prng& prng) {
  TargetKeyPair t;
  t.tsk = ckks::GenerateSecretKey(ctx, prng);
  t.tpk = ckks::GeneratePublicKey(t.tsk, prng);
  return t;
}

KsShare PubKeySwitch(const Ciphertext& ct, const SecretKey& sk_i,
                     const PublicKey& tpk, bool include_c0, Prng& prng) {
  const RingContextPtr& ctx = ct.c0.context_ptr();
  const int level = ct.level();
  RnsPoly u = Noise(Distribution::kTernary, ctx, level, false, prng);
  KsShare share;
  share.h0 = Noise(Distribution::kSmudge, ctx, level, false, prng);
  share.h0.MulAddInPlace(ckks::SecretAtLevel(sk_i.s, level), ct.c1);
  share.h0.MulAddInPlace(u, ckks::SecretAtLevel(tpk.p0, level));
  if (include_c0) share.h0.AddInPlace(ct.c0);
  share.h1 = Noise(Distribution::kGaussian, ctx, level, false, prng);
  share.h1.MulAddInPlace(u, ckks::SecretAtLevel(tpk.p1, level));
  return share;
}

absl::StatusOr<Ciphertext> AggregateKsShares(std::span<const KsShare> shares,
                                             double scale, size_t parties) {
  VFI_RETURN_IF_ERROR(CheckCount(shares.size(), parties, "key switch"));
  Ciphertext ct{shares[0].h0, shares[0].h1, scale};
  for (size_t i = 1; i < shares.size(); ++i) {
    if (!shares[i].h0.IsCompatible(ct.c0) ||
        !shares[i].h1.IsCompatible(ct.c1)) {
      return StructuralError("key switch shares have different shapes");
    }
    ct.c0.AddInPlace(shares[i].h0);
    ct.c1.AddInPlace(shares[i].h1);
  }
  return ct;
}

absl::StatusOr<std::vector<double>> AggDec(std::span<const KsShare> shares,
                                           const TargetKeyPair& target,
                                           double scale, size_t parties) {
  VFI_ASSIGN_OR_RETURN(Ciphertext ct, AggregateKsShares(shares, scale, parties));
  ckks::Encoder enc(ct.c0.context_ptr());
  return enc.Decode(ckks::Decrypt(target.tsk, ct));
}

RnsPoly Reconstruct(const Ciphertext& ct, const SecretKey& sk_i, Prng& prng) {
  RnsPoly pd = Noise(Distribution::kSmudge, ct.c0.context_ptr(), ct.level(),
                     false, prng);
  pd.MulAddInPlace(ckks::SecretAtLevel(sk_i.s, ct.level()), ct.c1);
  return pd;
}

absl::StatusOr<std::vector<double>> DecAgg(std::span<const RnsPoly> partials,
                                           const Ciphertext& ct,
                                           size_t parties) {
  VFI_RETURN_IF_ERROR(CheckCount(partials.size(), parties, "partial decryption"));
  RnsPoly m = ct.c0;
  for (const auto& pd : partials) {
    if (!pd.IsCompatible(m)) {
      return StructuralError("partial decryption has the wrong shape");
    }
    m.AddInPlace(pd);
  }
  ckks::Encoder enc(ct.c0.context_ptr());
  return enc.Decode({std::move(m), ct.scale});
}

}  // namespace vfi::mphe
