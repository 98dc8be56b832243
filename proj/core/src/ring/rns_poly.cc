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

#include "vfi/ring/rns_poly.h"

#include <algorithm>
#include <cassert>

#include "vfi/common/status.h"

namespace vfi::ring {

RnsPoly::RnsPoly(RingContextPtr ctx, int level, PolyForm form, bool extended)
    : ctx_(std::move(ctx)),
      level_(level),
      form_(form),
      extended_(extended),
      n_(ctx_->n()) {
  assert(level >= 0 && level <= ctx_->max_level());
  data_.assign(num_residues() * n_, 0);
}

RnsPoly RnsPoly::FromSigned(RingContextPtr ctx, int level,
                            std::span<const int64_t> coeffs, bool extended) {
  RnsPoly p(std::move(ctx), level, PolyForm::kCoefficient, extended);
  assert(coeffs.size() == p.n_);
  for (size_t k = 0; k < p.num_residues(); ++k) {
    const Modulus& q = p.modulus(k);
    auto r = p.residue(k);
    for (size_t i = 0; i < p.n_; ++i) r[i] = q.FromSigned64(coeffs[i]);
  }
  return p;
}

bool RnsPoly::IsCompatible(const RnsPoly& other) const {
  return ctx_ != nullptr && ctx_ == other.ctx_ && level_ == other.level_ &&
         form_ == other.form_ && extended_ == other.extended_;
}

bool RnsPoly::operator==(const RnsPoly& other) const {
  return IsCompatible(other) && data_ == other.data_;
}

void RnsPoly::AddInPlace(const RnsPoly& other) {
  assert(IsCompatible(other));
  for (size_t k = 0; k < num_residues(); ++k) {
    const Modulus& q = modulus(k);
    auto a = residue(k);
    auto b = other.residue(k);
    for (size_t i = 0; i < n_; ++i) a[i] = q.Add(a[i], b[i]);
  }
}

void RnsPoly::SubInPlace(const RnsPoly& other) {
  assert(IsCompatible(other));
  for (size_t k = 0; k < num_residues(); ++k) {
    const Modulus& q = modulus(k);
    auto a = residue(k);
    auto b = other.residue(k);
    for (size_t i = 0; i < n_; ++i) a[i] = q.Sub(a[i], b[i]);
  }
}

void RnsPoly::NegInPlace() {
  for (size_t k = 0; k < num_residues(); ++k) {
    const Modulus& q = modulus(k);
    for (auto& x : residue(k)) x = q.Neg(x);
  }
}

void RnsPoly::MulInPlace(const RnsPoly& other) {
  assert(IsCompatible(other) && is_ntt());
  for (size_t k = 0; k < num_residues(); ++k) {
    const Modulus& q = modulus(k);
    auto a = residue(k);
    auto b = other.residue(k);
    for (size_t i = 0; i < n_; ++i) a[i] = q.Mul(a[i], b[i]);
  }
}

void RnsPoly::MulAddInPlace(const RnsPoly& a, const RnsPoly& b) {
  assert(IsCompatible(a) && IsCompatible(b) && is_ntt());
  for (size_t k = 0; k < num_residues(); ++k) {
    const Modulus& q = modulus(k);
    auto r = residue(k);
    auto x = a.residue(k);
    auto y = b.residue(k);
    for (size_t i = 0; i < n_; ++i) r[i] = q.Add(r[i], q.Mul(x[i], y[i]));
  }
}

void RnsPoly::MulScalarInPlace(int64_t scalar) {
  for (size_t k = 0; k < num_residues(); ++k) {
    const Modulus& q = modulus(k);
    const uint64_t s = q.FromSigned64(scalar);
    const uint64_t ss = ShoupPrecompute(s, q.value());
    for (auto& x : residue(k)) x = MulShoup(x, s, ss, q.value());
  }
}

void RnsPoly::MulResidueScalarsInPlace(std::span<const uint64_t> scalars) {
  assert(scalars.size() >= num_residues());
  for (size_t k = 0; k < num_residues(); ++k) {
    const Modulus& q = modulus(k);
    const uint64_t s = scalars[k];
    const uint64_t ss = ShoupPrecompute(s, q.value());
    for (auto& x : residue(k)) x = MulShoup(x, s, ss, q.value());
  }
}

void RnsPoly::ToNttInPlace() {
  if (form_ == PolyForm::kNtt) return;
  for (size_t k = 0; k < num_residues(); ++k) {
    ctx_->ntt(modulus_index(k)).Forward(residue(k));
  }
  form_ = PolyForm::kNtt;
}

void RnsPoly::ToCoeffInPlace() {
  if (form_ == PolyForm::kCoefficient) return;
  for (size_t k = 0; k < num_residues(); ++k) {
    ctx_->ntt(modulus_index(k)).Inverse(residue(k));
  }
  form_ = PolyForm::kCoefficient;
}

void RnsPoly::DropToLevel(int level) {
  assert(level >= 0 && level <= level_);
  level_ = level;
  extended_ = false;
  data_.resize(num_residues() * n_);
}

void RnsPoly::DropSpecial() {
  if (!extended_) return;
  extended_ = false;
  data_.resize(num_residues() * n_);
}

namespace {

// Given the last residue `last` (coefficient form, modulo q_last), writes into
// `dst` (form of the destination residue) the correction
// (x - [x]_{q_last}) / q_last contribution: dst = (dst - last') * inv mod q_j,
// where last' is `last` centered and lifted into q_j. Rounding is achieved by
// adding q_last/2 beforehand.
void DivideRoundResidues(RnsPoly& p, size_t last_k, size_t last_modulus_index,
                         const std::vector<uint64_t>& inv_last,
                         size_t count) {
  const RingContext& ctx = p.context();
  const size_t n = p.n();
  const Modulus& ql = ctx.modulus(last_modulus_index);
  const bool ntt = p.is_ntt();
  std::vector<uint64_t> last(p.residue(last_k).begin(),
                             p.residue(last_k).end());
  if (ntt) ctx.ntt(last_modulus_index).Inverse(last);
  // Add floor(q_last / 2) so the subsequent floor division rounds.
  const uint64_t half = ql.value() >> 1;
  for (auto& x : last) x = ql.Add(x, half);
  std::vector<uint64_t> tmp(n);
  for (size_t k = 0; k < count; ++k) {
    const Modulus& qj = p.modulus(k);
    const uint64_t half_j = qj.Reduce(half);
    for (size_t i = 0; i < n; ++i) {
      tmp[i] = qj.Sub(qj.Reduce(last[i]), half_j);
    }
    if (ntt) ctx.ntt(p.modulus_index(k)).Forward(tmp);
    auto r = p.residue(k);
    const uint64_t inv = inv_last[k];
    const uint64_t inv_s = ShoupPrecompute(inv, qj.value());
    for (size_t i = 0; i < n; ++i) {
      r[i] = MulShoup(qj.Sub(r[i], tmp[i]), inv, inv_s, qj.value());
    }
  }
}

}  // namespace

void RnsPoly::DivideRoundByLastInPlace() {
  assert(level_ >= 1 && !extended_);
  std::vector<uint64_t> inv(level_);
  for (int j = 0; j < level_; ++j) inv[j] = ctx_->inv_q(level_, j);
  DivideRoundResidues(*this, level_, level_, inv, level_);
  DropToLevel(level_ - 1);
}

void RnsPoly::DivideRoundBySpecialInPlace() {
  assert(extended_);
  std::vector<uint64_t> inv(level_ + 1);
  for (int j = 0; j <= level_; ++j) inv[j] = ctx_->inv_p_mod_q(j);
  DivideRoundResidues(*this, level_ + 1, ctx_->special_index(), inv,
                      level_ + 1);
  DropSpecial();
}

RnsPoly RnsPoly::Automorphism(uint64_t galois) const {
  RnsPoly out(ctx_, level_, form_, extended_);
  const uint64_t two_n = 2 * n_;
  galois %= two_n;
  assert(galois % 2 == 1);
  if (form_ == PolyForm::kCoefficient) {
    for (size_t k = 0; k < num_residues(); ++k) {
      const Modulus& q = modulus(k);
      auto src = residue(k);
      auto dst = out.residue(k);
      for (size_t i = 0; i < n_; ++i) {
        const uint64_t e = (static_cast<u128>(i) * galois) % two_n;
        if (e < n_) {
          dst[e] = src[i];
        } else {
          dst[e - n_] = q.Neg(src[i]);
        }
      }
    }
    return out;
  }
  // NTT slot i holds the evaluation at psi^(2 bitrev(i) + 1); the image at
  // that point is the input's evaluation at psi^((2 bitrev(i) + 1) * galois).
  std::vector<uint32_t> index(n_);
  for (size_t i = 0; i < n_; ++i) {
    const uint64_t e = 2 * static_cast<uint64_t>(ctx_->bitrev(i)) + 1;
    const uint64_t f = (static_cast<u128>(e) * galois) % two_n;
    index[i] = ctx_->bitrev((f - 1) / 2);
  }
  for (size_t k = 0; k < num_residues(); ++k) {
    auto src = residue(k);
    auto dst = out.residue(k);
    for (size_t i = 0; i < n_; ++i) dst[i] = src[index[i]];
  }
  return out;
}

std::vector<int64_t> RnsPoly::CenteredFirstResidue() const {
  RnsPoly c = *this;
  c.ToCoeffInPlace();
  std::vector<int64_t> out(n_);
  const Modulus& q = c.modulus(0);
  auto r = c.residue(0);
  for (size_t i = 0; i < n_; ++i) out[i] = q.Centered(r[i]);
  return out;
}

namespace {

absl::Status CheckCompatible(const RnsPoly& a, const RnsPoly& b) {
  if (a.empty() || b.empty()) return StructuralError("empty polynomial");
  if (&a.context() != &b.context()) {
    return StructuralError("polynomials belong to different rings");
  }
  if (a.level() != b.level()) {
    return LevelError("polynomials are at different levels");
  }
  if (a.extended() != b.extended()) {
    return StructuralError("polynomials differ in special-prime extension");
  }
  if (a.form() != b.form()) {
    return StructuralError("polynomials are in different representations");
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<RnsPoly> PolyAdd(const RnsPoly& a, const RnsPoly& b) {
  absl::Status s = CheckCompatible(a, b);
  if (!s.ok()) return s;
  RnsPoly r = a;
  r.AddInPlace(b);
  return r;
}

absl::StatusOr<RnsPoly> PolySub(const RnsPoly& a, const RnsPoly& b) {
  absl::Status s = CheckCompatible(a, b);
  if (!s.ok()) return s;
  RnsPoly r = a;
  r.SubInPlace(b);
  return r;
}

absl::StatusOr<RnsPoly> PolyMul(const RnsPoly& a, const RnsPoly& b) {
  absl::Status s = CheckCompatible(a, b);
  if (!s.ok()) return s;
  if (a.is_ntt()) {
    RnsPoly r = a;
    r.MulInPlace(b);
    return r;
  }
  RnsPoly x = ToNtt(a);
  x.MulInPlace(ToNtt(b));
  x.ToCoeffInPlace();
  return x;
}

RnsPoly ToNtt(RnsPoly p) {
  p.ToNttInPlace();
  return p;
}

RnsPoly ToCoeff(RnsPoly p) {
  p.ToCoeffInPlace();
  return p;
}

absl::StatusOr<RnsPoly> DropLevel(const RnsPoly& p, int target_level) {
  if (p.empty()) return StructuralError("empty polynomial");
  if (target_level < 0 || target_level > p.level()) {
    return LevelError("cannot raise the level of a polynomial");
  }
  RnsPoly r = p;
  r.DropToLevel(target_level);
  return r;
}

uint64_t GaloisElementForRotation(int k, size_t n) {
  const uint64_t two_n = 2 * n;
  const uint64_t slots = n / 2;
  int64_t kk = k % static_cast<int64_t>(slots);
  if (kk < 0) kk += slots;
  uint64_t g = 1;
  for (int64_t i = 0; i < kk; ++i) g = (g * 5) % two_n;
  return g;
}

uint64_t GaloisElementForConjugation(size_t n) { return 2 * n - 1; }

}  // namespace vfi::ring
