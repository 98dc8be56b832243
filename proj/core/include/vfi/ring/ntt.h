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

#ifndef VFI_RING_NTT_H_
#define VFI_RING_NTT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "vfi/ring/modarith.h"

namespace vfi::ring {

// Negacyclic number-theoretic transform over Z_q[X]/(X^n + 1).
//
// Forward output is in bit-reversed order: slot i holds the evaluation of the
// input at psi^(2 * bitrev(i) + 1), where psi is a primitive 2n-th root of
// unity. This fixes the permutation used for automorphisms in NTT form.
class NttTables {
 public:
  NttTables(const Modulus& modulus, size_t n);

  void Forward(std::span<uint64_t> a) const;
  void Inverse(std::span<uint64_t> a) const;

  const Modulus& modulus() const { return modulus_; }
  size_t n() const { return n_; }
  uint64_t psi() const { return psi_; }

 private:
  Modulus modulus_;
  size_t n_;
  uint64_t psi_;
  std::vector<uint64_t> psi_rev_;
  std::vector<uint64_t> psi_rev_shoup_;
  std::vector<uint64_t> ipsi_rev_;
  std::vector<uint64_t> ipsi_rev_shoup_;
  uint64_t n_inv_;
  uint64_t n_inv_shoup_;
};

// Bit reversal of the low `bits` bits of x.
uint32_t BitReverse(uint32_t x, int bits);

}  // namespace vfi::ring

#endif  // VFI_RING_NTT_H_
