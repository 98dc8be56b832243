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

#ifndef VFI_RING_RNS_POLY_H_
#define VFI_RING_RNS_POLY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "vfi/ring/ring_context.h"

namespace vfi::ring {

enum class PolyForm : uint8_t { kCoefficient = 0, kNtt = 1 };

// An element of R_{Q_l} (or R_{Q_l * P} when `extended`) stored as one
// residue vector per prime. Residue k < num_residues() belongs to chain prime
// k for k <= level, and to the special prime for k == level + 1.
class RnsPoly {
 public:
  RnsPoly() = default;
  // Zero polynomial.
  RnsPoly(RingContextPtr ctx, int level, PolyForm form, bool extended = false);

  // Coefficient-form polynomial from small signed coefficients.
  static RnsPoly FromSigned(RingContextPtr ctx, int level,
                            std::span<const int64_t> coeffs,
                            bool extended = false);

  bool empty() const { return ctx_ == nullptr; }
  const RingContext& context() const { return *ctx_; }
  const RingContextPtr& context_ptr() const { return ctx_; }
  int level() const { return level_; }
  PolyForm form() const { return form_; }
  bool is_ntt() const { return form_ == PolyForm::kNtt; }
  bool extended() const { return extended_; }
  size_t n() const { return n_; }
  size_t num_residues() const {
    return static_cast<size_t>(level_) + 1 + (extended_ ? 1 : 0);
  }
  // Context modulus index of residue k.
  size_t modulus_index(size_t k) const {
    return k <= static_cast<size_t>(level_) ? k : ctx_->special_index();
  }
  const Modulus& modulus(size_t k) const {
    return ctx_->modulus(modulus_index(k));
  }

  std::span<uint64_t> residue(size_t k) {
    return {data_.data() + k * n_, n_};
  }
  std::span<const uint64_t> residue(size_t k) const {
    return {data_.data() + k * n_, n_};
  }
  std::span<const uint64_t> data() const { return data_; }
  std::span<uint64_t> mutable_data() { return data_; }

  // Same ring, level, form and extension.
  bool IsCompatible(const RnsPoly& other) const;
  bool operator==(const RnsPoly& other) const;

  // In-place arithmetic; operands must be compatible (checked by the free
  // functions below, asserted here).
  void AddInPlace(const RnsPoly& other);
  void SubInPlace(const RnsPoly& other);
  void NegInPlace();
  // Pointwise product; both operands must be in NTT form.
  void MulInPlace(const RnsPoly& other);
  // this += a * b (NTT form).
  void MulAddInPlace(const RnsPoly& a, const RnsPoly& b);
  void MulScalarInPlace(int64_t scalar);
  // Multiplies residue k by scalars[k] (already reduced).
  void MulResidueScalarsInPlace(std::span<const uint64_t> scalars);

  void ToNttInPlace();
  void ToCoeffInPlace();

  // Keeps residues 0..level (and drops the special residue).
  void DropToLevel(int level);
  // Removes only the special residue.
  void DropSpecial();

  // Rounds x / q_level in place (coefficient or NTT form input; output keeps
  // the input form) and decrements the level.
  void DivideRoundByLastInPlace();
  // For an extended polynomial: rounds x / P, removing the special residue.
  void DivideRoundBySpecialInPlace();

  // Applies X -> X^galois (galois odd, modulo 2N).
  RnsPoly Automorphism(uint64_t galois) const;

  // Exact centered coefficients, valid when every coefficient lies within the
  // first residue's half-range (used for small polynomials and tests).
  std::vector<int64_t> CenteredFirstResidue() const;

 private:
  RingContextPtr ctx_;
  int level_ = 0;
  PolyForm form_ = PolyForm::kCoefficient;
  bool extended_ = false;
  size_t n_ = 0;
  std::vector<uint64_t> data_;
};

// Checked operations (structural errors on mismatched operands).
absl::StatusOr<RnsPoly> PolyAdd(const RnsPoly& a, const RnsPoly& b);
absl::StatusOr<RnsPoly> PolySub(const RnsPoly& a, const RnsPoly& b);
// Negacyclic product; accepts coefficient or NTT operands of equal form and
// returns the same form.
absl::StatusOr<RnsPoly> PolyMul(const RnsPoly& a, const RnsPoly& b);
RnsPoly ToNtt(RnsPoly p);
RnsPoly ToCoeff(RnsPoly p);
absl::StatusOr<RnsPoly> DropLevel(const RnsPoly& p, int target_level);

// Galois element for a left rotation of the slot vector by k (k may be
// negative), and the element for complex conjugation.
uint64_t GaloisElementForRotation(int k, size_t n);
uint64_t GaloisElementForConjugation(size_t n);

}  // namespace vfi::ring

#endif  // VFI_RING_RNS_POLY_H_
