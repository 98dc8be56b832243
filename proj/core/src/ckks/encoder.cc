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

#include "vfi/ckks/encoder.h"

#include <cmath>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "vfi/common/status.h"
#include "vfi/ring/ntt.h"

namespace vfi::ckks {
namespace {

using ring::i128;
using ring::RoundToI128;
using ring::Modulus;


void BitReverseArray(std::vector<std::complex<double>>& vals) {
  const size_t n = vals.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j >= bit; bit >>= 1) j -= bit;
    j += bit;
    if (i < j) std::swap(vals[i], vals[j]);
  }
}

}  // namespace

Encoder::Encoder(ring::RingContextPtr ctx)
    : ctx_(std::move(ctx)), slots_(ctx_->n() / 2) {
  const size_t m = 2 * ctx_->n();
  rot_group_.resize(slots_);
  size_t g = 1;
  for (size_t j = 0; j < slots_; ++j) {
    rot_group_[j] = g;
    g = g * 5 % m;
  }
  ksi_pows_.resize(m + 1);
  for (size_t k = 0; k <= m; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(m);
    ksi_pows_[k] = {std::cos(angle), std::sin(angle)};
  }
  const size_t levels = ctx_->max_level() + 1;
  prefix_mod_.resize(levels);
  prefix_inv_.resize(levels);
  prefix_ld_.resize(levels);
  long double prod_ld = 1.0L;
  for (size_t i = 0; i < levels; ++i) {
    const Modulus& qi = ctx_->modulus(i);
    prefix_ld_[i] = prod_ld;
    prod_ld *= static_cast<long double>(qi.value());
    // prefix_mod_[i][k] = (q_0 ... q_{k-1}) mod q_i for k <= i.
    uint64_t acc = 1;
    for (size_t k = 0; k <= i; ++k) {
      prefix_mod_[i].push_back(acc);
      if (k < i) acc = qi.Mul(acc, qi.Reduce(ctx_->modulus(k).value()));
    }
    prefix_inv_[i] = qi.Inverse(acc);
  }
}

void Encoder::Embed(std::vector<std::complex<double>>& vals) const {
  const size_t size = vals.size();
  const size_t m = 2 * ctx_->n();
  BitReverseArray(vals);
  for (size_t len = 2; len <= size; len <<= 1) {
    const size_t lenh = len >> 1;
    const size_t lenq = len << 2;
    for (size_t i = 0; i < size; i += len) {
      for (size_t j = 0; j < lenh; ++j) {
        const size_t idx = (rot_group_[j] % lenq) * (m / lenq);
        const std::complex<double> u = vals[i + j];
        const std::complex<double> v = vals[i + j + lenh] * ksi_pows_[idx];
        vals[i + j] = u + v;
        vals[i + j + lenh] = u - v;
      }
    }
  }
}

void Encoder::EmbedInverse(std::vector<std::complex<double>>& vals) const {
  const size_t size = vals.size();
  const size_t m = 2 * ctx_->n();
  for (size_t len = size; len >= 2; len >>= 1) {
    const size_t lenh = len >> 1;
    const size_t lenq = len << 2;
    for (size_t i = 0; i < size; i += len) {
      for (size_t j = 0; j < lenh; ++j) {
        const size_t idx = (lenq - (rot_group_[j] % lenq)) * (m / lenq);
        const std::complex<double> u = vals[i + j] + vals[i + j + lenh];
        const std::complex<double> v =
            (vals[i + j] - vals[i + j + lenh]) * ksi_pows_[idx];
        vals[i + j] = u;
        vals[i + j + lenh] = v;
      }
    }
  }
  BitReverseArray(vals);
  const double inv = 1.0 / static_cast<double>(size);
  for (auto& v : vals) v *= inv;
}

absl::StatusOr<Plaintext> Encoder::Encode(std::span<const double> values,
                                          int level, double scale) const {
  std::vector<std::complex<double>> c(values.begin(), values.end());
  return EncodeComplex(c, level, scale);
}

absl::StatusOr<Plaintext> Encoder::EncodeComplex(
    std::span<const std::complex<double>> values, int level,
    double scale) const {
  if (values.size() > slots_) {
    return CapacityError(absl::StrCat(values.size(), " values exceed ",
                                      slots_, " slots"));
  }
  if (level < 0 || level > ctx_->max_level()) {
    return LevelError(absl::StrCat("level ", level, " out of range"));
  }
  if (!(scale > 0) || !std::isfinite(scale)) {
    return StructuralError("scale must be positive and finite");
  }
  std::vector<std::complex<double>> vals(slots_);
  std::copy(values.begin(), values.end(), vals.begin());
  EmbedInverse(vals);
  const size_t n = ctx_->n();
  const size_t half = n / 2;
  std::vector<i128> coeffs(n);
  const long double s = scale;
  for (size_t i = 0; i < half; ++i) {
    coeffs[i] = RoundToI128(static_cast<long double>(vals[i].real()) * s);
    coeffs[i + half] =
        RoundToI128(static_cast<long double>(vals[i].imag()) * s);
  }
  Plaintext pt{RnsPoly(ctx_, level, ring::PolyForm::kCoefficient), scale};
  for (size_t k = 0; k < pt.poly.num_residues(); ++k) {
    const Modulus& q = pt.poly.modulus(k);
    auto r = pt.poly.residue(k);
    for (size_t i = 0; i < n; ++i) r[i] = q.FromSigned(coeffs[i]);
  }
  pt.poly.ToNttInPlace();
  return pt;
}

std::vector<long double> Encoder::CenteredCoefficients(
    const RnsPoly& poly) const {
  RnsPoly p = ring::ToCoeff(poly);
  const size_t n = p.n();
  const size_t count = static_cast<size_t>(p.level()) + 1;
  std::vector<long double> out(n);
  std::vector<int64_t> digits(count);
  for (size_t c = 0; c < n; ++c) {
    // Balanced mixed-radix (Garner) digits: x = sum_i d_i * q_0 ... q_{i-1}
    // with d_i in (-q_i/2, q_i/2], which yields the centered value exactly.
    long double value = 0.0L;
    for (size_t i = 0; i < count; ++i) {
      const Modulus& qi = p.modulus(i);
      uint64_t acc = 0;
      for (size_t k = 0; k < i; ++k) {
        acc = qi.Add(acc, qi.Mul(qi.FromSigned64(digits[k]), prefix_mod_[i][k]));
      }
      const uint64_t v = qi.Mul(qi.Sub(p.residue(i)[c], acc), prefix_inv_[i]);
      digits[i] = qi.Centered(v);
      value += static_cast<long double>(digits[i]) * prefix_ld_[i];
    }
    out[c] = value;
  }
  return out;
}

std::vector<std::complex<double>> Encoder::DecodeComplex(
    const Plaintext& pt) const {
  const auto coeffs = CenteredCoefficients(pt.poly);
  const size_t half = ctx_->n() / 2;
  const long double inv = 1.0L / static_cast<long double>(pt.scale);
  std::vector<std::complex<double>> vals(slots_);
  for (size_t i = 0; i < half; ++i) {
    vals[i] = {static_cast<double>(coeffs[i] * inv),
               static_cast<double>(coeffs[i + half] * inv)};
  }
  Embed(vals);
  return vals;
}

std::vector<double> Encoder::Decode(const Plaintext& pt) const {
  const auto vals = DecodeComplex(pt);
  std::vector<double> out(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) out[i] = vals[i].real();
  return out;
}

}  // namespace vfi::ckks
