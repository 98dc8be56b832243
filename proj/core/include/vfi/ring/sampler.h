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

#ifndef VFI_RING_SAMPLER_H_
#define VFI_RING_SAMPLER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "vfi/ring/prng.h"
#include "vfi/ring/rns_poly.h"

namespace vfi::ring {

enum class Distribution { kUniform, kTernary, kGaussian, kSmudge };

// Signed coefficient samplers. Gaussian samples are rounded and truncated at
// six standard deviations.
std::vector<int64_t> SampleTernaryCoeffs(size_t n, double density, Prng& prng);
std::vector<int64_t> SampleGaussianCoeffs(size_t n, double sigma, Prng& prng);

// Uniform polynomial, returned in NTT form.
RnsPoly SampleUniform(const RingContextPtr& ctx, int level, bool extended,
                      Prng& prng);

// Samples from `dist` using the parameter set's density / sigma. Small
// distributions are returned in coefficient form, uniform in NTT form.
RnsPoly Sample(Distribution dist, const RingContextPtr& ctx, int level,
               bool extended, Prng& prng);

// Public common-reference polynomial expanded from (seed, label). Fails with a
// structural error when the seed is not 32 bytes.
absl::StatusOr<RnsPoly> SampleCrs(const RingContextPtr& ctx,
                                  std::span<const uint8_t> seed,
                                  absl::string_view label, int level,
                                  bool extended);

}  // namespace vfi::ring

#endif  // VFI_RING_SAMPLER_H_
