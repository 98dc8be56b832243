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

#include "vfi/ring/modarith.h"

#include <bit>
#include <cmath>
#include <initializer_list>

namespace vfi::ring {

Modulus::Modulus(uint64_t q) : q_(q), bits_(std::bit_width(q)) {
  const u128 ratio = ~static_cast<u128>(0) / q;
  ratio_hi_ = static_cast<uint64_t>(ratio >> 64);
  ratio_lo_ = static_cast<uint64_t>(ratio);
}

uint64_t Modulus::Pow(uint64_t base, uint64_t exp) const {
  uint64_t result = 1 % q_;
  base = Reduce(base);
  while (exp > 0) {
    if (exp & 1) result = Mul(result, base);
    base = Mul(base, base);
    exp >>= 1;
  }
  return result;
}

namespace {

uint64_t PowMod(uint64_t b, uint64_t e, uint64_t m) {
  u128 r = 1, x = b % m;
  while (e) {
    if (e & 1) r = r * x % m;
    x = x * x % m;
    e >>= 1;
  }
  return static_cast<uint64_t>(r);
}

}  // namespace

i128 RoundToI128(long double x) {
  x = std::round(x);
  constexpr long double kTwo63 = 9223372036854775808.0L;
  if (std::fabs(x) < kTwo63) return static_cast<i128>(std::llround(x));
  constexpr long double kTwo64 = 18446744073709551616.0L;
  const long double hi = std::floor(x / kTwo64);
  const long double lo = x - hi * kTwo64;
  return static_cast<i128>(static_cast<int64_t>(hi)) * (i128{1} << 64) +
         static_cast<i128>(static_cast<uint64_t>(lo));
}

bool IsPrime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                     29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                     29ull, 31ull, 37ull}) {
    uint64_t x = PowMod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = static_cast<uint64_t>(static_cast<u128>(x) * x % n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

uint64_t FindPrimitiveRoot(uint64_t q, uint64_t two_n) {
  if ((q - 1) % two_n != 0) return 0;
  const uint64_t cofactor = (q - 1) / two_n;
  for (uint64_t g = 2; g < q && g < 1'000'000; ++g) {
    uint64_t root = PowMod(g, cofactor, q);
    // root^(2n) = 1 always; primitive iff root^n = -1 (2n is a power of two).
    if (PowMod(root, two_n / 2, q) == q - 1) return root;
  }
  return 0;
}

}  // namespace vfi::ring
