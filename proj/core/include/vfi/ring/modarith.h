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

#ifndef VFI_RING_MODARITH_H_
#define VFI_RING_MODARITH_H_

#include <cstdint>

namespace vfi::ring {

using u128 = unsigned __int128;
using i128 = __int128;

// A word-sized prime modulus (< 2^62) with its Barrett constant
// floor(2^128 / q). All residues handled through it live in [0, q).
class Modulus {
 public:
  Modulus() = default;
  explicit Modulus(uint64_t q);

  uint64_t value() const { return q_; }
  int bits() const { return bits_; }

  uint64_t Add(uint64_t a, uint64_t b) const {
    uint64_t s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  uint64_t Sub(uint64_t a, uint64_t b) const {
    return a >= b ? a - b : a + q_ - b;
  }
  uint64_t Neg(uint64_t a) const { return a == 0 ? 0 : q_ - a; }

  uint64_t Reduce128(u128 z) const {
    const uint64_t z0 = static_cast<uint64_t>(z);
    const uint64_t z1 = static_cast<uint64_t>(z >> 64);
    const u128 a = static_cast<u128>(z0) * ratio_lo_;
    const u128 b = static_cast<u128>(z0) * ratio_hi_;
    const u128 c = static_cast<u128>(z1) * ratio_lo_;
    const u128 mid = (a >> 64) + static_cast<uint64_t>(b) +
                     static_cast<uint64_t>(c);
    const uint64_t qhat = z1 * ratio_hi_ + static_cast<uint64_t>(b >> 64) +
                          static_cast<uint64_t>(c >> 64) +
                          static_cast<uint64_t>(mid >> 64);
    uint64_t r = z0 - qhat * q_;
    if (r >= q_) r -= q_;
    if (r >= q_) r -= q_;
    return r;
  }
  uint64_t Reduce(uint64_t a) const { return a >= q_ ? a % q_ : a; }
  uint64_t Mul(uint64_t a, uint64_t b) const {
    return Reduce128(static_cast<u128>(a) * b);
  }
  // Maps a signed 128-bit integer into [0, q).
  uint64_t FromSigned(i128 v) const {
    i128 r = v % static_cast<i128>(q_);
    if (r < 0) r += q_;
    return static_cast<uint64_t>(r);
  }
  uint64_t FromSigned64(int64_t v) const {
    if (v >= 0) return Reduce(static_cast<uint64_t>(v));
    uint64_t m = static_cast<uint64_t>(-(v + 1)) + 1;  // |v| without overflow
    return Neg(Reduce(m));
  }
  // Centered representative in (-q/2, q/2].
  int64_t Centered(uint64_t a) const {
    return a > (q_ >> 1) ? static_cast<int64_t>(a) - static_cast<int64_t>(q_)
                         : static_cast<int64_t>(a);
  }

  uint64_t Pow(uint64_t base, uint64_t exp) const;
  // q must be prime.
  uint64_t Inverse(uint64_t a) const { return Pow(a, q_ - 2); }

 private:
  uint64_t q_ = 0;
  uint64_t ratio_hi_ = 0;
  uint64_t ratio_lo_ = 0;
  int bits_ = 0;
};

// Shoup multiplication by a fixed operand w with w' = floor(w * 2^64 / q).
inline uint64_t ShoupPrecompute(uint64_t w, uint64_t q) {
  return static_cast<uint64_t>((static_cast<u128>(w) << 64) / q);
}
inline uint64_t MulShoup(uint64_t x, uint64_t w, uint64_t w_shoup,
                         uint64_t q) {
  const uint64_t hi =
      static_cast<uint64_t>((static_cast<u128>(x) * w_shoup) >> 64);
  const uint64_t r = x * w - hi * q;
  return r >= q ? r - q : r;
}

// Deterministic Miller-Rabin for 64-bit inputs.
// Nearest integer to x (|x| < 2^126).
i128 RoundToI128(long double x);

bool IsPrime(uint64_t n);

// Smallest-generator-derived primitive 2n-th root of unity mod q, where
// q = 1 mod 2n and n is a power of two. Returns 0 if none exists.
uint64_t FindPrimitiveRoot(uint64_t q, uint64_t two_n);

}  // namespace vfi::ring

#endif  // VFI_RING_MODARITH_H_
