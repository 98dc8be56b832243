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

#include "vfi/ckks/evaluator.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "vfi/common/status.h"
#include "vfi/common/status_macros.h"

namespace vfi::ckks {
namespace {

using ring::i128;
using ring::RoundToI128;
using ring::Modulus;

absl::Status CheckSameRing(const Ciphertext& a, const Ciphertext& b) {
  if (a.empty() || b.empty()) return StructuralError("empty ciphertext");
  if (&a.context() != &b.context()) {
    return StructuralError("ciphertexts use different parameters");
  }
  return absl::OkStatus();
}

absl::Status CheckLevels(int a, int b) {
  if (a != b) {
    return AlignmentError(
        absl::StrCat("operands at different levels ", a, " and ", b));
  }
  return absl::OkStatus();
}

double RelativeDiff(double a, double b) {
  return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}


void MulInteger(RnsPoly& p, i128 t) {
  std::vector<uint64_t> scalars(p.num_residues());
  for (size_t k = 0; k < scalars.size(); ++k) {
    scalars[k] = p.modulus(k).FromSigned(t);
  }
  p.MulResidueScalarsInPlace(scalars);
}

void AddInteger(RnsPoly& p, i128 t) {
  // A constant polynomial is constant in every NTT slot.
  for (size_t k = 0; k < p.num_residues(); ++k) {
    const Modulus& q = p.modulus(k);
    const uint64_t v = q.FromSigned(t);
    for (auto& x : p.residue(k)) x = q.Add(x, v);
  }
}

}  // namespace

bool ScalesEqual(double a, double b) {
  return RelativeDiff(a, b) <= kScaleEqualTolerance;
}

absl::Status Evaluator::AlignScales(Ciphertext& a, Ciphertext& b) const {
  if (ScalesEqual(a.scale, b.scale)) return absl::OkStatus();
  const double rel = RelativeDiff(a.scale, b.scale);
  if (rel > kScaleAdjustLimit) {
    return AlignmentError(absl::StrCat("scale mismatch ", a.scale, " vs ",
                                       b.scale, " (relative ", rel, ")"));
  }
  if (b.level() == 0) {
    return DepthExhaustedError("no level left to re-align scales");
  }
  // Multiply b by t = a.scale * q_l / b.scale and rescale by q_l.
  const Modulus& ql = b.context().modulus(b.level());
  const long double t = static_cast<long double>(a.scale) * ql.value() /
                        static_cast<long double>(b.scale);
  const i128 ti = RoundToI128(t);
  MulInteger(b.c0, ti);
  MulInteger(b.c1, ti);
  b.scale = static_cast<double>(static_cast<long double>(b.scale) *
                                static_cast<long double>(ti) / ql.value());
  VFI_ASSIGN_OR_RETURN(b, Rescale(b));
  b.scale = a.scale;
  if (a.level() > b.level()) {
    VFI_ASSIGN_OR_RETURN(a, DropToLevel(a, b.level()));
  }
  return absl::OkStatus();
}

absl::StatusOr<Ciphertext> Evaluator::Add(const Ciphertext& a,
                                          const Ciphertext& b) const {
  VFI_RETURN_IF_ERROR(CheckSameRing(a, b));
  VFI_RETURN_IF_ERROR(CheckLevels(a.level(), b.level()));
  Ciphertext x = a, y = b;
  VFI_RETURN_IF_ERROR(AlignScales(x, y));
  x.c0.AddInPlace(y.c0);
  x.c1.AddInPlace(y.c1);
  return x;
}

absl::StatusOr<Ciphertext> Evaluator::Sub(const Ciphertext& a,
                                          const Ciphertext& b) const {
  VFI_RETURN_IF_ERROR(CheckSameRing(a, b));
  VFI_RETURN_IF_ERROR(CheckLevels(a.level(), b.level()));
  Ciphertext x = a, y = b;
  VFI_RETURN_IF_ERROR(AlignScales(x, y));
  x.c0.SubInPlace(y.c0);
  x.c1.SubInPlace(y.c1);
  return x;
}

absl::StatusOr<Ciphertext> Evaluator::AddPlain(const Ciphertext& a,
                                               const Plaintext& p) const {
  if (a.empty() || p.poly.empty()) return StructuralError("empty operand");
  if (&a.context() != &p.poly.context() || !p.poly.is_ntt()) {
    return StructuralError("plaintext incompatible with ciphertext");
  }
  VFI_RETURN_IF_ERROR(CheckLevels(a.level(), p.level()));
  if (!ScalesEqual(a.scale, p.scale)) {
    return AlignmentError(absl::StrCat("plaintext scale ", p.scale,
                                       " differs from ", a.scale));
  }
  Ciphertext x = a;
  x.c0.AddInPlace(p.poly);
  return x;
}

Ciphertext Evaluator::Negate(const Ciphertext& a) const {
  Ciphertext x = a;
  x.c0.NegInPlace();
  x.c1.NegInPlace();
  return x;
}

absl::StatusOr<Ciphertext> Evaluator::Mul(const Ciphertext& a,
                                          const Ciphertext& b,
                                          const EvalKey& rlk) const {
  VFI_RETURN_IF_ERROR(CheckSameRing(a, b));
  VFI_RETURN_IF_ERROR(CheckLevels(a.level(), b.level()));
  if (a.level() == 0) {
    return DepthExhaustedError("multiplication at level 0");
  }
  if (rlk.kind != EvalKeyKind::kRelinearization || rlk.b.empty()) {
    return KeyNotFoundError("relinearization key required");
  }
  // Tensor product (d0, d1, d2).
  RnsPoly d0 = a.c0;
  d0.MulInPlace(b.c0);
  RnsPoly d1 = a.c0;
  d1.MulInPlace(b.c1);
  d1.MulAddInPlace(a.c1, b.c0);
  RnsPoly d2 = a.c1;
  d2.MulInPlace(b.c1);
  auto [u0, u1] = KeySwitch(d2, rlk);
  d0.AddInPlace(u0);
  d1.AddInPlace(u1);
  Ciphertext out{std::move(d0), std::move(d1), a.scale * b.scale};
  return Rescale(out);
}

absl::Status Evaluator::MulAccumulate(TensorCiphertext& acc,
                                      const Ciphertext& a,
                                      const Ciphertext& b) const {
  VFI_RETURN_IF_ERROR(CheckSameRing(a, b));
  VFI_RETURN_IF_ERROR(CheckLevels(a.level(), b.level()));
  if (acc.empty()) {
    acc.d0 = a.c0;
    acc.d0.MulInPlace(b.c0);
    acc.d1 = a.c0;
    acc.d1.MulInPlace(b.c1);
    acc.d1.MulAddInPlace(a.c1, b.c0);
    acc.d2 = a.c1;
    acc.d2.MulInPlace(b.c1);
    acc.scale = a.scale * b.scale;
    return absl::OkStatus();
  }
  VFI_RETURN_IF_ERROR(CheckLevels(acc.level(), a.level()));
  if (!ScalesEqual(acc.scale, a.scale * b.scale)) {
    return AlignmentError("accumulated products have different scales");
  }
  acc.d0.MulAddInPlace(a.c0, b.c0);
  acc.d1.MulAddInPlace(a.c0, b.c1);
  acc.d1.MulAddInPlace(a.c1, b.c0);
  acc.d2.MulAddInPlace(a.c1, b.c1);
  return absl::OkStatus();
}

absl::StatusOr<Ciphertext> Evaluator::Relinearize(const TensorCiphertext& t,
                                                  const EvalKey& rlk) const {
  if (t.empty()) return StructuralError("empty operand");
  if (rlk.kind != EvalKeyKind::kRelinearization || rlk.b.empty()) {
    return KeyNotFoundError("relinearization key required");
  }
  auto [u0, u1] = KeySwitch(t.d2, rlk);
  Ciphertext out{t.d0, t.d1, t.scale};
  out.c0.AddInPlace(u0);
  out.c1.AddInPlace(u1);
  return out;
}

absl::StatusOr<Ciphertext> Evaluator::MulPlainNoRescale(
    const Ciphertext& a, const Plaintext& p) const {
  if (a.empty() || p.poly.empty()) return StructuralError("empty operand");
  if (&a.context() != &p.poly.context() || !p.poly.is_ntt()) {
    return StructuralError("plaintext incompatible with ciphertext");
  }
  VFI_RETURN_IF_ERROR(CheckLevels(a.level(), p.level()));
  Ciphertext x = a;
  x.c0.MulInPlace(p.poly);
  x.c1.MulInPlace(p.poly);
  x.scale = a.scale * p.scale;
  return x;
}

absl::Status Evaluator::MulPlainAccumulate(Ciphertext& acc,
                                           const Ciphertext& a,
                                           const Plaintext& p) const {
  if (acc.empty()) {
    VFI_ASSIGN_OR_RETURN(acc, MulPlainNoRescale(a, p));
    return absl::OkStatus();
  }
  if (a.empty() || p.poly.empty()) return StructuralError("empty operand");
  VFI_RETURN_IF_ERROR(CheckLevels(acc.level(), a.level()));
  VFI_RETURN_IF_ERROR(CheckLevels(a.level(), p.level()));
  if (!ScalesEqual(acc.scale, a.scale * p.scale)) {
    return AlignmentError("accumulated products have different scales");
  }
  acc.c0.MulAddInPlace(a.c0, p.poly);
  acc.c1.MulAddInPlace(a.c1, p.poly);
  return absl::OkStatus();
}

absl::StatusOr<Ciphertext> Evaluator::MulPlain(const Ciphertext& a,
                                               const Plaintext& p) const {
  if (!a.empty() && a.level() == 0) {
    return DepthExhaustedError("multiplication at level 0");
  }
  VFI_ASSIGN_OR_RETURN(Ciphertext x, MulPlainNoRescale(a, p));
  return Rescale(x);
}

absl::StatusOr<Ciphertext> Evaluator::Rescale(const Ciphertext& a) const {
  if (a.empty()) return StructuralError("empty ciphertext");
  if (a.level() == 0) return DepthExhaustedError("cannot rescale at level 0");
  const double q = static_cast<double>(a.context().modulus(a.level()).value());
  Ciphertext x = a;
  x.c0.DivideRoundByLastInPlace();
  x.c1.DivideRoundByLastInPlace();
  x.scale = a.scale / q;
  return x;
}

absl::StatusOr<Ciphertext> Evaluator::DropToLevel(const Ciphertext& a,
                                                  int level) const {
  if (a.empty()) return StructuralError("empty ciphertext");
  if (level < 0 || level > a.level()) {
    return LevelError(absl::StrCat("cannot move from level ", a.level(),
                                   " to ", level));
  }
  Ciphertext x = a;
  x.c0.DropToLevel(level);
  x.c1.DropToLevel(level);
  return x;
}

absl::StatusOr<Ciphertext> Evaluator::MulConstNoRescale(
    const Ciphertext& a, double c, double const_scale) const {
  if (a.empty()) return StructuralError("empty ciphertext");
  const i128 t = RoundToI128(static_cast<long double>(c) * const_scale);
  Ciphertext x = a;
  MulInteger(x.c0, t);
  MulInteger(x.c1, t);
  x.scale = a.scale * const_scale;
  return x;
}

absl::StatusOr<Ciphertext> Evaluator::MulConst(const Ciphertext& a,
                                               double c) const {
  if (a.empty()) return StructuralError("empty ciphertext");
  if (a.level() == 0) return DepthExhaustedError("multiplication at level 0");
  const double q = static_cast<double>(a.context().modulus(a.level()).value());
  VFI_ASSIGN_OR_RETURN(Ciphertext x, MulConstNoRescale(a, c, q));
  VFI_ASSIGN_OR_RETURN(x, Rescale(x));
  x.scale = a.scale;
  return x;
}

absl::StatusOr<Ciphertext> Evaluator::AddConst(const Ciphertext& a,
                                               double c) const {
  if (a.empty()) return StructuralError("empty ciphertext");
  Ciphertext x = a;
  AddInteger(x.c0, RoundToI128(static_cast<long double>(c) * a.scale));
  return x;
}

absl::StatusOr<Ciphertext> Evaluator::Rotate(const Ciphertext& a, int k,
                                             const EvalKeySet& keys) const {
  const int ks[] = {k};
  VFI_ASSIGN_OR_RETURN(auto out, RotateHoisted(a, ks, keys));
  return std::move(out[0]);
}

absl::StatusOr<std::vector<Ciphertext>> Evaluator::RotateHoisted(
    const Ciphertext& a, std::span<const int> ks,
    const EvalKeySet& keys) const {
  if (a.empty()) return StructuralError("empty ciphertext");
  const size_t slots = a.slots();
  std::vector<const EvalKey*> found(ks.size(), nullptr);
  bool any = false;
  for (size_t i = 0; i < ks.size(); ++i) {
    const int norm = NormalizeRotation(ks[i], slots);
    if (norm == 0) continue;
    found[i] = keys.FindRotation(norm);
    if (found[i] == nullptr) {
      return KeyNotFoundError(absl::StrCat("no rotation key for offset ",
                                           ks[i], " (normalized ", norm, ")"));
    }
    any = true;
  }
  std::vector<Ciphertext> out(ks.size());
  std::vector<RnsPoly> digits;
  if (any) digits = DecomposeForKeySwitch(a.c1);
  const int level = a.level();
  const size_t n = a.c0.n();
  for (size_t r = 0; r < ks.size(); ++r) {
    if (found[r] == nullptr) {
      out[r] = a;
      continue;
    }
    const EvalKey& key = *found[r];
    RnsPoly u0(a.c0.context_ptr(), level, ring::PolyForm::kNtt, true);
    RnsPoly u1(a.c0.context_ptr(), level, ring::PolyForm::kNtt, true);
    for (int j = 0; j <= level; ++j) {
      const RnsPoly d = digits[j].Automorphism(key.galois);
      for (size_t k = 0; k < u0.num_residues(); ++k) {
        const size_t key_k =
            k <= static_cast<size_t>(level) ? k : key.b[j].level() + 1;
        const Modulus& q = u0.modulus(k);
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
    u0.AddInPlace(a.c0.Automorphism(key.galois));
    out[r] = Ciphertext{std::move(u0), std::move(u1), a.scale};
  }
  return out;
}

}  // namespace vfi::ckks
