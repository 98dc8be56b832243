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

#ifndef VFI_CKKS_EVALUATOR_H_
#define VFI_CKKS_EVALUATOR_H_

#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "vfi/ckks/ciphertext.h"
#include "vfi/ckks/keys.h"

namespace vfi::ckks {

// Relative scale difference at or below which two scales are treated as
// equal.
inline constexpr double kScaleEqualTolerance = 0x1p-40;
// Relative scale difference up to which additions re-align automatically by
// a constant multiplication (consuming one level of the adjusted operand).
inline constexpr double kScaleAdjustLimit = 0x1p-10;

bool ScalesEqual(double a, double b);

// Homomorphic operations. Every multiplication is followed by exactly one
// rescale unless the "NoRescale" variant is used.
class Evaluator {
 public:
  Evaluator() = default;

  absl::StatusOr<Ciphertext> Add(const Ciphertext& a,
                                 const Ciphertext& b) const;
  absl::StatusOr<Ciphertext> Sub(const Ciphertext& a,
                                 const Ciphertext& b) const;
  absl::StatusOr<Ciphertext> AddPlain(const Ciphertext& a,
                                      const Plaintext& p) const;
  Ciphertext Negate(const Ciphertext& a) const;

  // Relinearized and rescaled product; level decreases by one.
  absl::StatusOr<Ciphertext> Mul(const Ciphertext& a, const Ciphertext& b,
                                 const EvalKey& rlk) const;
  // Accumulates the tensor product a * b into acc without relinearizing or
  // rescaling; acc may be empty.
  absl::Status MulAccumulate(TensorCiphertext& acc, const Ciphertext& a,
                             const Ciphertext& b) const;
  // Relinearizes an accumulated tensor product (no rescale).
  absl::StatusOr<Ciphertext> Relinearize(const TensorCiphertext& t,
                                         const EvalKey& rlk) const;
  absl::StatusOr<Ciphertext> MulPlain(const Ciphertext& a,
                                      const Plaintext& p) const;
  absl::StatusOr<Ciphertext> MulPlainNoRescale(const Ciphertext& a,
                                               const Plaintext& p) const;
  // Accumulates a * p into acc (same level, compatible scales) without
  // rescaling; acc may be empty, in which case it is initialized.
  absl::Status MulPlainAccumulate(Ciphertext& acc, const Ciphertext& a,
                                  const Plaintext& p) const;

  absl::StatusOr<Ciphertext> Rescale(const Ciphertext& a) const;
  absl::StatusOr<Ciphertext> DropToLevel(const Ciphertext& a,
                                         int level) const;

  // Multiplies by a real constant encoded at scale q_level and rescales, so
  // the scale is unchanged and one level is consumed.
  absl::StatusOr<Ciphertext> MulConst(const Ciphertext& a, double c) const;
  // Multiplies by round(c * const_scale) without rescaling; the recorded
  // scale is multiplied by const_scale.
  absl::StatusOr<Ciphertext> MulConstNoRescale(const Ciphertext& a, double c,
                                               double const_scale) const;
  // Adds c to every slot.
  absl::StatusOr<Ciphertext> AddConst(const Ciphertext& a, double c) const;

  // Left rotation: slot j moves to slot j - k (mod slots).
  absl::StatusOr<Ciphertext> Rotate(const Ciphertext& a, int k,
                                    const EvalKeySet& keys) const;
  // Several rotations of one ciphertext sharing a single decomposition.
  absl::StatusOr<std::vector<Ciphertext>> RotateHoisted(
      const Ciphertext& a, std::span<const int> ks,
      const EvalKeySet& keys) const;

  // Brings b to a's scale (and both to a common level) when their scales
  // differ by at most kScaleAdjustLimit relative.
  absl::Status AlignScales(Ciphertext& a, Ciphertext& b) const;
};

}  // namespace vfi::ckks

#endif  // VFI_CKKS_EVALUATOR_H_
