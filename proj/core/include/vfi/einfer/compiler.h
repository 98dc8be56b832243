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

#ifndef VFI_EINFER_COMPILER_H_
#define VFI_EINFER_COMPILER_H_

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "vfi/ckks/ciphertext.h"
#include "vfi/ckks/keys.h"
#include "vfi/einfer/model.h"
#include "vfi/ring/params.h"
#include "vfi/ring/prng.h"
#include "vfi/ring/ring_context.h"
#include "vfi/vpack/vpack.h"

namespace vfi::einfer {

// A dense or convolutional layer lowered to a slot-wise linear map
// y = sum_k diag_k * rot(x, k) over one layout period, evaluated with the
// baby-step/giant-step split k = giant + baby.
struct LinearStage {
  size_t layer_index = 0;
  int in_level = 0;
  double in_scale = 1.0;
  // Weights are encoded at this scale so the rescaled output lands on
  // out_scale = in_scale * weight_scale / q_in_level (= the default scale).
  double weight_scale = 1.0;
  double out_scale = 1.0;
  // Slot (within one period) holding each flattened input / output entry.
  std::vector<int> in_positions;
  std::vector<int> out_positions;

  struct Term {
    int baby = 0;      // index into baby_rotations
    int diagonal = 0;  // index into diagonals
  };
  struct GiantStep {
    int rotation = 0;
    std::vector<Term> terms;
  };
  int baby_step = 1;
  std::vector<int> baby_rotations;
  std::vector<GiantStep> giants;
  // Diagonal offsets k (for reference) and their slot vectors, already
  // rotated by -giant and replicated over all slots. Empty for
  // structure-only compilation.
  std::vector<int> offsets;
  std::vector<std::vector<double>> diagonals;
  std::vector<double> bias;

  std::vector<ckks::Plaintext> plain_diagonals;
  ckks::Plaintext plain_bias;
  std::vector<ckks::Ciphertext> cipher_diagonals;
  ckks::Ciphertext cipher_bias;
};

struct ActivationStage {
  size_t layer_index = 0;
  std::vector<double> coefficients;
  int in_level = 0;
  double in_scale = 1.0;
  double out_scale = 1.0;
  int depth = 0;
};

using Stage = std::variant<LinearStage, ActivationStage>;

enum class WeightMode { kStructure, kPlaintext, kCiphertext };

struct CompiledModel {
  vpack::PackLayout layout;
  std::vector<Stage> stages;
  // Sorted rotation offsets for which evaluation keys are required.
  std::vector<int> rotations;
  int input_level = 0;
  double input_scale = 1.0;
  int depth = 0;
  int output_level = 0;
  double output_scale = 1.0;
  // Level after each stage.
  std::vector<int> level_trace;
  // Slots (replica 0) holding the model outputs, in output order.
  std::vector<int> output_positions;
  WeightMode mode = WeightMode::kStructure;
  ring::RingContextPtr ctx;
};

// Constants of the depth-optimal activation evaluation for input scale s at
// `level`; shared by the compiler and the evaluator so both agree exactly.
struct ActivationPlan {
  int degree = 1;
  int depth = 0;
  double out_scale = 1.0;
};
ActivationPlan PlanActivation(std::span<const double> coefficients, double s,
                              int level, std::span<const uint64_t> moduli);

// Compiles shapes, slot placement, the baby-step/giant-step schedule and the
// rotation manifest. Works on weight-stripped models; no weights are encoded.
absl::StatusOr<CompiledModel> CompileStructure(
    const ModelSpec& model, const vpack::PackLayout& layout,
    const ring::CryptoParams& params);
// Full compilation: structure plus plaintext-encoded diagonals and biases.
absl::StatusOr<CompiledModel> Compile(const ModelSpec& model,
                                      const vpack::PackLayout& layout,
                                      const ring::RingContextPtr& ctx);
// Sorted rotation offsets the model needs (from structure only).
absl::StatusOr<std::vector<int>> RotationManifest(
    const ModelSpec& model, const vpack::PackLayout& layout,
    const ring::CryptoParams& params);

// Replaces every weight plaintext by an encryption under `cpk`; structure
// and the level trace are unchanged.
absl::Status EncryptModel(CompiledModel& cm, const ckks::PublicKey& cpk,
                          ring::Prng& prng);
// Encrypted-weight sidecar in the ckks object format.
std::vector<uint8_t> SerializeEncryptedWeights(const CompiledModel& cm);
absl::Status LoadEncryptedWeights(CompiledModel& cm,
                                  std::span<const uint8_t> bytes);

absl::StatusOr<ckks::Ciphertext> DenseForward(const ckks::Ciphertext& ct,
                                              const LinearStage& stage,
                                              const ckks::EvalKeySet& keys);
absl::StatusOr<ckks::Ciphertext> ActivationForward(
    const ckks::Ciphertext& ct, std::span<const double> coefficients,
    const ckks::EvalKeySet& keys);
// Runs every stage; errors are annotated with the layer index.
absl::StatusOr<ckks::Ciphertext> Infer(const ckks::Ciphertext& input,
                                       const CompiledModel& cm,
                                       const ckks::EvalKeySet& keys);

// The compiled schedule evaluated on plain slot vectors (double precision).
absl::StatusOr<std::vector<double>> EvaluateCompiledClear(
    const CompiledModel& cm, std::span<const double> slots);
// Reads the model outputs out of a decoded slot vector.
std::vector<double> ExtractOutput(const CompiledModel& cm,
                                  std::span<const double> slots);

}  // namespace vfi::einfer

#endif  // VFI_EINFER_COMPILER_H_
