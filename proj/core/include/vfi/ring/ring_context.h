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

#ifndef VFI_RING_RING_CONTEXT_H_
#define VFI_RING_RING_CONTEXT_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "absl/status/statusor.h"
#include "vfi/ring/modarith.h"
#include "vfi/ring/ntt.h"
#include "vfi/ring/params.h"

namespace vfi::ring {

// Precomputed tables for R_Q = Z_Q[X]/(X^N + 1) in RNS form.
//
// Modulus indices 0..L address the ciphertext chain; index L + 1 is the
// special prime P used by key switching.
class RingContext {
 public:
  static absl::StatusOr<std::shared_ptr<const RingContext>> Create(
      const CryptoParams& params);

  const CryptoParams& params() const { return params_; }
  const Seed& params_hash() const { return params_hash_; }
  size_t n() const { return n_; }
  int log_n() const { return log_n_; }
  int max_level() const { return max_level_; }
  size_t special_index() const { return static_cast<size_t>(max_level_) + 1; }
  size_t num_moduli() const { return moduli_.size(); }

  const Modulus& modulus(size_t index) const { return moduli_[index]; }
  const NttTables& ntt(size_t index) const { return ntt_[index]; }

  // q_level^{-1} mod q_j for j < level (used by rescale).
  uint64_t inv_q(int level, size_t j) const { return inv_q_[level][j]; }
  // P mod q_j and P^{-1} mod q_j for chain primes.
  uint64_t p_mod_q(size_t j) const { return p_mod_q_[j]; }
  uint64_t inv_p_mod_q(size_t j) const { return inv_p_mod_q_[j]; }

  // Position in NTT (bit-reversed) order of the evaluation point
  // psi^(2 * bitrev(i) + 1).
  uint32_t bitrev(size_t i) const { return bitrev_[i]; }

 private:
  RingContext() = default;

  CryptoParams params_;
  Seed params_hash_{};
  size_t n_ = 0;
  int log_n_ = 0;
  int max_level_ = 0;
  std::vector<Modulus> moduli_;
  std::vector<NttTables> ntt_;
  std::vector<std::vector<uint64_t>> inv_q_;
  std::vector<uint64_t> p_mod_q_;
  std::vector<uint64_t> inv_p_mod_q_;
  std::vector<uint32_t> bitrev_;
};

using RingContextPtr = std::shared_ptr<const RingContext>;

}  // namespace vfi::ring

#endif  // VFI_RING_RING_CONTEXT_H_
