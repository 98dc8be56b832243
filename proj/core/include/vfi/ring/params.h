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

#ifndef VFI_RING_PARAMS_H_
#define VFI_RING_PARAMS_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "vfi/ring/prng.h"

namespace vfi::ring {

// Parameters shared by every party of a session.
//
// `moduli` is the ciphertext chain q_0..q_L. `special_moduli` holds the single
// auxiliary prime P used by hybrid key switching; it never appears in
// ciphertexts, only in evaluation keys.
struct CryptoParams {
  std::string name;
  size_t ring_degree = 0;
  std::vector<uint64_t> moduli;
  std::vector<uint64_t> special_moduli;
  double log2_scale = 0;
  double ternary_density = 0.5;
  double gaussian_sigma = 3.2;
  double smudge_sigma = 0;
  Seed crs_seed{};
  // Advisory only; nothing in this repository estimates lattice security.
  std::string claimed_security;

  int max_level() const { return static_cast<int>(moduli.size()) - 1; }
  size_t slots() const { return ring_degree / 2; }
  double scale() const { return std::exp2(log2_scale); }

  absl::Status Validate() const;
  // SHA-256 over the canonical JSON form; carried in every protocol message.
  Seed Hash() const;
};

absl::StatusOr<CryptoParams> ParseParamsJson(absl::string_view json);
std::string ParamsToJson(const CryptoParams& params);
absl::StatusOr<CryptoParams> LoadParams(const std::string& path);

// Built-in presets: "tiny" (N = 16, oracle tests), "small" (N = 2048) and
// "paper8192" (N = 8192, L = 4).
absl::StatusOr<CryptoParams> Preset(absl::string_view name);
std::vector<std::string> PresetNames();

// Accepts either a preset name or a path to a parameter JSON file.
absl::StatusOr<CryptoParams> ResolveParams(const std::string& preset_or_path);

}  // namespace vfi::ring

#endif  // VFI_RING_PARAMS_H_
