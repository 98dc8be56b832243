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

#ifndef VFI_CKKS_CIPHERTEXT_H_
#define VFI_CKKS_CIPHERTEXT_H_

#include "vfi/ring/rns_poly.h"

namespace vfi::ckks {

using ring::RnsPoly;

// An encoded message: m(X) with recorded scale.
struct Plaintext {
  RnsPoly poly;
  double scale = 1.0;

  int level() const { return poly.level(); }
};

// A (c0, c1) pair decrypting to c0 + c1 * s. Both components are stored in
// NTT form at the same level.
struct Ciphertext {
  RnsPoly c0;
  RnsPoly c1;
  double scale = 1.0;

  int level() const { return c0.level(); }
  size_t slots() const { return c0.n() / 2; }
  const ring::RingContext& context() const { return c0.context(); }
  bool empty() const { return c0.empty(); }
};

// Unrelinearized product (d0 + d1 s + d2 s^2), used to accumulate several
// ciphertext-ciphertext products before a single relinearization.
struct TensorCiphertext {
  RnsPoly d0;
  RnsPoly d1;
  RnsPoly d2;
  double scale = 1.0;

  int level() const { return d0.level(); }
  bool empty() const { return d0.empty(); }
};

}  // namespace vfi::ckks

#endif  // VFI_CKKS_CIPHERTEXT_H_
