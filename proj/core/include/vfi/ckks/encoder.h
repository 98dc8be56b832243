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

#ifndef VFI_CKKS_ENCODER_H_
#define VFI_CKKS_ENCODER_H_

#include <complex>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "vfi/ckks/ciphertext.h"
#include "vfi/ring/ring_context.h"

namespace vfi::ckks {

// Canonical-embedding encoder. Slot j holds m(zeta^(5^j)) / scale, with
// zeta = exp(2 pi i / 2N), so the Galois map X -> X^(5^k) rotates slots left
// by k.
class Encoder {
 public:
  explicit Encoder(ring::RingContextPtr ctx);

  size_t slots() const { return slots_; }
  const ring::RingContextPtr& context() const { return ctx_; }

  // Encodes up to slots() real values (missing slots are zero) into an
  // NTT-form plaintext. Capacity error when too many values are given.
  absl::StatusOr<Plaintext> Encode(std::span<const double> values, int level,
                                   double scale) const;
  absl::StatusOr<Plaintext> EncodeComplex(
      std::span<const std::complex<double>> values, int level,
      double scale) const;
  // Real parts of the slots.
  std::vector<double> Decode(const Plaintext& pt) const;
  std::vector<std::complex<double>> DecodeComplex(const Plaintext& pt) const;

  // Exact centered integer value of every coefficient, as long double.
  std::vector<long double> CenteredCoefficients(const RnsPoly& poly) const;

  // Special FFT pair: `Embed` maps coefficient pairs to slot values and
  // `EmbedInverse` inverts it (both in place, length slots()).
  void Embed(std::vector<std::complex<double>>& vals) const;
  void EmbedInverse(std::vector<std::complex<double>>& vals) const;

 private:
  ring::RingContextPtr ctx_;
  size_t slots_;
  std::vector<size_t> rot_group_;
  std::vector<std::complex<double>> ksi_pows_;
  // Garner tables: prefix products of q_0..q_{i-1} modulo q_i and their
  // inverses, per level.
  std::vector<std::vector<uint64_t>> prefix_mod_;
  std::vector<uint64_t> prefix_inv_;
  std::vector<long double> prefix_ld_;
};

}  // namespace vfi::ckks

#endif  // VFI_CKKS_ENCODER_H_
