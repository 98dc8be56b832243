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

#ifndef VFI_CKKS_ENCRYPTOR_H_
#define VFI_CKKS_ENCRYPTOR_H_

#include "absl/status/statusor.h"
#include "vfi/ckks/ciphertext.h"
#include "vfi/ckks/keys.h"
#include "vfi/ring/prng.h"

namespace vfi::ckks {

// RLWE public-key encryption: (u p0 + e0 + m, u p1 + e1) with ternary u.
// The plaintext must be at the top level L.
absl::StatusOr<Ciphertext> Encrypt(const PublicKey& pk, const Plaintext& pt,
                                   ring::Prng& prng);

// c0 + c1 s at the ciphertext's level, with the ciphertext's scale.
Plaintext Decrypt(const SecretKey& sk, const Ciphertext& ct);

// The secret restricted to `level` (drops higher primes and P).
RnsPoly SecretAtLevel(const RnsPoly& s, int level);

}  // namespace vfi::ckks

#endif  // VFI_CKKS_ENCRYPTOR_H_
