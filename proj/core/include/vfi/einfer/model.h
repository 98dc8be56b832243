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

#ifndef VFI_EINFER_MODEL_H_
#define VFI_EINFER_MODEL_H_

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace vfi::einfer {

// Fully connected layer y = W x + b, W row-major (rows x cols).
struct DenseLayer {
  int rows = 0;
  int cols = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

// Valid (unpadded) 2-D convolution. Weights are indexed
// [out][in][ky][kx], row-major.
struct Conv2dLayer {
  int in_channels = 1;
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride_h = 1;
  int stride_w = 1;
  std::vector<double> weights;
  std::vector<double> bias;
};

// Elementwise polynomial p(x) = sum_k coefficients[k] x^k.
struct ActivationLayer {
  std::vector<double> coefficients;
};

using Layer = std::variant<DenseLayer, Conv2dLayer, ActivationLayer>;

// Channel-major tensor shape; dense layers see the flattened tensor.
struct TensorShape {
  int channels = 1;
  int height = 1;
  int width = 1;
  int size() const { return channels * height * width; }
  bool operator==(const TensorShape&) const = default;
};

// Per-feature affine map x' = x * scale + shift applied by each client to the
// columns it owns. Empty vectors mean the identity.
struct Normalization {
  std::vector<double> scale;
  std::vector<double> shift;
};

struct ModelSpec {
  std::string name;
  int input_height = 1;
  int input_width = 1;
  Normalization normalization;
  std::vector<Layer> layers;
  // False for structure-only models (weights stripped).
  bool has_weights = true;

  TensorShape input_shape() const { return {1, input_height, input_width}; }
  int feature_count() const { return input_height * input_width; }
};

// Effective polynomial degree (highest non-zero coefficient, at least 1).
int ActivationDegree(const ActivationLayer& act);
// Multiplicative depth: one per linear layer, ceil(log2 deg) per activation.
int LayerDepth(const Layer& layer);
int ModelDepth(const ModelSpec& model);
size_t ParameterCount(const ModelSpec& model);

// Checks shape composition and weight sizes; load error naming the layer.
// Depth-overflow error when the model needs more than `max_depth` levels
// (pass a negative value to skip the depth check).
absl::Status ValidateModel(const ModelSpec& model, int max_depth = -1);
// Output shape of every layer (index i is the shape after layer i).
absl::StatusOr<std::vector<TensorShape>> LayerShapes(const ModelSpec& model);

absl::StatusOr<ModelSpec> ParseModelJson(absl::string_view json,
                                         int max_depth = -1);
absl::StatusOr<ModelSpec> LoadModel(const std::string& path,
                                    int max_depth = -1);
std::string ModelToJson(const ModelSpec& model, bool include_weights = true);

// Structure only: shapes, normalization and activation coefficients are kept,
// weights and biases are removed.
ModelSpec StripWeights(const ModelSpec& model);

// Applies the model's normalization to a raw feature vector (row-major
// height x width).
std::vector<double> Normalize(const ModelSpec& model,
                              std::span<const double> raw);

// Reference forward pass in double precision on raw (unnormalized) input.
absl::StatusOr<std::vector<double>> InferClear(const ModelSpec& model,
                                               std::span<const double> raw);
// Same, on already-normalized input.
absl::StatusOr<std::vector<double>> InferClearNormalized(
    const ModelSpec& model, std::span<const double> x);

}  // namespace vfi::einfer

#endif  // VFI_EINFER_MODEL_H_
