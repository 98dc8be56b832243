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

#ifndef VFI_TESTS_TEST_UTIL_H_
#define VFI_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "vfi/ckks/keys.h"
#include "vfi/mphe/mphe.h"
#include "vfi/ring/params.h"
#include "vfi/ring/ring_context.h"

namespace vfi::testing {

inline ring::RingContextPtr PresetContext(const char* name) {
  return *ring::RingContext::Create(*ring::Preset(name));
}

// Test-only collective secret csk = sum_i sk_i. The library never forms it.
inline ckks::SecretKey SumSecretKeys(std::span<const mphe::PartyKeys> parties) {
  ckks::SecretKey csk{parties[0].sk.s};
  for (size_t i = 1; i < parties.size(); ++i) {
    csk.s.AddInPlace(parties[i].sk.s);
  }
  return csk;
}

inline std::vector<double> RandomVector(size_t n, std::mt19937_64& rng,
                                        double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline double MaxAbsDiff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  const size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double Pearson(std::span<const double> x, std::span<const double> y) {
  const size_t n = std::min(x.size(), y.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace vfi::testing

#endif  // VFI_TESTS_TEST_UTIL_H_
