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

#include "vfi/ring/sampler.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "vfi/common/status.h"

namespace vfi::ring {

std::vector<int64_t> SampleTernaryCoeffs(size_t n, double density,
                                         Prng& prng) {
  std::vector<int64_t> out(n, 0);
  for (size_t i = 0; i < n; ++i) {
    if (prng.NextUnit() < density) out[i] = (prng.NextU64() & 1) ? 1 : -1;
  }
  return out;
}

std::vector<int64_t> SampleGaussianCoeffs(size_t n, double sigma, Prng& prng) {
  std::vector<int64_t> out(n);
  const double bound = 6.0 * sigma;
  for (size_t i = 0; i < n; ++i) {
    double x;
    do {
      x = prng.NextGaussian() * sigma;
    } while (std::fabs(x) > bound);
    out[i] = std::llround(x);
  }
  return out;
}

RnsPoly SampleUniform(const RingContextPtr& ctx, int level, bool extended,
                      Prng& prng) {
  RnsPoly p(ctx, level, PolyForm::kNtt, extended);
  for (size_t k = 0; k < p.num_residues(); ++k) {
    const uint64_t q = p.modulus(k).value();
    for (auto& x : p.residue(k)) x = prng.Uniform(q);
  }
  return p;
}

RnsPoly Sample(Distribution dist, const RingContextPtr& ctx, int level,
               bool extended, Prng& prng) {
  const CryptoParams& params = ctx->params();
  switch (dist) {
    case Distribution::kUniform:
      return SampleUniform(ctx, level, extended, prng);
    case Distribution::kTernary:
      return RnsPoly::FromSigned(
          ctx, level,
          SampleTernaryCoeffs(ctx->n(), params.ternary_density, prng),
          extended);
    case Distribution::kGaussian:
      return RnsPoly::FromSigned(
          ctx, level, SampleGaussianCoeffs(ctx->n(), params.gaussian_sigma, prng),
          extended);
    case Distribution::kSmudge:
      return RnsPoly::FromSigned(
          ctx, level, SampleGaussianCoeffs(ctx->n(), params.smudge_sigma, prng),
          extended);
  }
  return RnsPoly(ctx, level, PolyForm::kCoefficient, extended);
}

absl::StatusOr<RnsPoly> SampleCrs(const RingContextPtr& ctx,
                                  std::span<const uint8_t> seed,
                                  absl::string_view label, int level,
                                  bool extended) {
  if (seed.size() != sizeof(Seed)) {
    return StructuralError(absl::StrCat("CRS seed must be ", sizeof(Seed),
                                        " bytes, got ", seed.size()));
  }
  if (level < 0 || level > ctx->max_level()) {
    return LevelError("CRS level out of range");
  }
  Seed s;
  std::copy(seed.begin(), seed.end(), s.begin());
  Prng prng(s, absl::StrCat("crs/", label));
  return SampleUniform(ctx, level, extended, prng);
}

}  // namespace vfi::ring
