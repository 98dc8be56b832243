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

#ifndef VFI_RING_PRNG_H_
#define VFI_RING_PRNG_H_

#include <array>
#include <cstdint>
#include <memory>
#include <span>

#include "absl/strings/string_view.h"

namespace vfi::ring {

using Seed = std::array<uint8_t, 32>;

Seed Sha256(std::span<const uint8_t> data);

// Derives an independent seed for a named purpose: SHA-256(seed || label).
Seed DeriveSeed(const Seed& seed, absl::string_view label);

// AES-256-CTR keystream generator. Deterministic for a given seed, so two
// parties holding the same seed draw bit-identical streams.
class Prng {
 public:
  explicit Prng(const Seed& seed);
  Prng(const Seed& seed, absl::string_view label)
      : Prng(DeriveSeed(seed, label)) {}
  ~Prng();
  Prng(Prng&&) noexcept;
  Prng& operator=(Prng&&) noexcept;
  Prng(const Prng&) = delete;
  Prng& operator=(const Prng&) = delete;

  // Fresh seed from the operating system.
  static Seed SystemSeed();

  uint64_t NextU64();
  // Uniform double in [0, 1) with 53 bits of randomness.
  double NextUnit();
  // Uniform in [0, bound) by rejection.
  uint64_t Uniform(uint64_t bound);
  // Standard normal sample (Box-Muller).
  double NextGaussian();
  void Fill(std::span<uint8_t> out);

 private:
  void Refill();

  struct Cipher;
  std::unique_ptr<Cipher> cipher_;
  std::array<uint8_t, 4096> buffer_{};
  size_t pos_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vfi::ring

#endif  // VFI_RING_PRNG_H_
