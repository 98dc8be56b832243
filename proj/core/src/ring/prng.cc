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

#include "vfi/ring/prng.h"

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace vfi::ring {

Seed Sha256(std::span<const uint8_t> data) {
  Seed out;
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Seed DeriveSeed(const Seed& seed, absl::string_view label) {
  std::vector<uint8_t> buf(seed.begin(), seed.end());
  buf.insert(buf.end(), label.begin(), label.end());
  return Sha256(buf);
}

struct Prng::Cipher {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Cipher() { EVP_CIPHER_CTX_free(ctx); }
};

Prng::Prng(const Seed& seed) : cipher_(std::make_unique<Cipher>()) {
  cipher_->ctx = EVP_CIPHER_CTX_new();
  const std::array<uint8_t, 16> iv{};
  if (cipher_->ctx == nullptr ||
      EVP_EncryptInit_ex(cipher_->ctx, EVP_aes_256_ctr(), nullptr, seed.data(),
                         iv.data()) != 1) {
    throw std::runtime_error("AES-CTR initialisation failed");
  }
  Refill();
}

Prng::~Prng() = default;
Prng::Prng(Prng&&) noexcept = default;
Prng& Prng::operator=(Prng&&) noexcept = default;

Seed Prng::SystemSeed() {
  Seed seed;
  if (RAND_bytes(seed.data(), static_cast<int>(seed.size())) != 1) {
    throw std::runtime_error("system randomness unavailable");
  }
  return seed;
}

void Prng::Refill() {
  static const std::array<uint8_t, 4096> kZeros{};
  int out_len = 0;
  EVP_EncryptUpdate(cipher_->ctx, buffer_.data(), &out_len, kZeros.data(),
                    static_cast<int>(kZeros.size()));
  pos_ = 0;
}

void Prng::Fill(std::span<uint8_t> out) {
  size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buffer_.size()) Refill();
    size_t n = std::min(out.size() - done, buffer_.size() - pos_);
    std::memcpy(out.data() + done, buffer_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
}

uint64_t Prng::NextU64() {
  if (buffer_.size() - pos_ < 8) Refill();
  uint64_t v;
  std::memcpy(&v, buffer_.data() + pos_, 8);
  pos_ += 8;
  return v;
}

double Prng::NextUnit() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

uint64_t Prng::Uniform(uint64_t bound) {
  // Largest multiple of bound that fits in 64 bits.
  const uint64_t limit = bound * (~uint64_t{0} / bound);
  uint64_t v;
  do {
    v = NextU64();
  } while (v >= limit);
  return v % bound;
}

double Prng::NextGaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = NextUnit();
  } while (u1 <= 0.0);
  const double u2 = NextUnit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace vfi::ring
