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

#include "vfi/ring/ntt.h"

#include <bit>
#include <stdexcept>

namespace vfi::ring {

uint32_t BitReverse(uint32_t x, int bits) {
  uint32_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | ((x >> i) & 1);
  }
  return r;
}

NttTables::NttTables(const Modulus& modulus, size_t n)
    : modulus_(modulus), n_(n) {
  const uint64_t q = modulus.value();
  psi_ = FindPrimitiveRoot(q, 2 * n);
  if (psi_ == 0) {
    // Parameter validation rejects such moduli before tables are built.
    throw std::invalid_argument("modulus is not NTT-friendly");
  }
  const int log_n = std::countr_zero(n);
  const uint64_t ipsi = modulus.Inverse(psi_);
  psi_rev_.resize(n);
  ipsi_rev_.resize(n);
  psi_rev_shoup_.resize(n);
  ipsi_rev_shoup_.resize(n);
  uint64_t p = 1, ip = 1;
  std::vector<uint64_t> pows(n), ipows(n);
  for (size_t i = 0; i < n; ++i) {
    pows[i] = p;
    ipows[i] = ip;
    p = modulus.Mul(p, psi_);
    ip = modulus.Mul(ip, ipsi);
  }
  for (size_t i = 0; i < n; ++i) {
    const uint32_t r = BitReverse(static_cast<uint32_t>(i), log_n);
    psi_rev_[i] = pows[r];
    ipsi_rev_[i] = ipows[r];
    psi_rev_shoup_[i] = ShoupPrecompute(psi_rev_[i], q);
    ipsi_rev_shoup_[i] = ShoupPrecompute(ipsi_rev_[i], q);
  }
  n_inv_ = modulus.Inverse(n % q);
  n_inv_shoup_ = ShoupPrecompute(n_inv_, q);
}

void NttTables::Forward(std::span<uint64_t> a) const {
  const uint64_t q = modulus_.value();
  size_t t = n_;
  for (size_t m = 1; m < n_; m <<= 1) {
    t >>= 1;
    for (size_t i = 0; i < m; ++i) {
      const size_t j1 = 2 * i * t;
      const uint64_t w = psi_rev_[m + i];
      const uint64_t ws = psi_rev_shoup_[m + i];
      uint64_t* x = a.data() + j1;
      uint64_t* y = x + t;
      for (size_t j = 0; j < t; ++j) {
        const uint64_t u = x[j];
        const uint64_t v = MulShoup(y[j], w, ws, q);
        const uint64_t s = u + v;
        x[j] = s >= q ? s - q : s;
        y[j] = u >= v ? u - v : u + q - v;
      }
    }
  }
}

void NttTables::Inverse(std::span<uint64_t> a) const {
  const uint64_t q = modulus_.value();
  size_t t = 1;
  for (size_t m = n_; m > 1; m >>= 1) {
    const size_t h = m >> 1;
    size_t j1 = 0;
    for (size_t i = 0; i < h; ++i) {
      const uint64_t w = ipsi_rev_[h + i];
      const uint64_t ws = ipsi_rev_shoup_[h + i];
      uint64_t* x = a.data() + j1;
      uint64_t* y = x + t;
      for (size_t j = 0; j < t; ++j) {
        const uint64_t u = x[j];
        const uint64_t v = y[j];
        const uint64_t s = u + v;
        x[j] = s >= q ? s - q : s;
        y[j] = MulShoup(u >= v ? u - v : u + q - v, w, ws, q);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (size_t i = 0; i < n_; ++i) {
    a[i] = MulShoup(a[i], n_inv_, n_inv_shoup_, q);
  }
}

}  // namespace vfi::ring
