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

#include "vfi/einfer/model.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "vfi/common/status.h"
#include "vfi/common/status_macros.h"

namespace vfi::einfer {
namespace {

using nlohmann::json;

absl::Status LayerError(size_t index, absl::string_view message) {
  return LoadError(absl::StrCat("layer ", index, ": ", message));
}

int CeilLog2(int v) {
  int d = 0;
  while ((1 << d) < v) ++d;
  return d;
}

absl::StatusOr<std::vector<double>> ReadArray(const json& j,
                                              absl::string_view key) {
  if (!j.contains(key)) {
    return LoadError(absl::StrCat("missing '", key, "'"));
  }
  const json& a = j.at(std::string(key));
  if (!a.is_array()) return LoadError(absl::StrCat("'", key, "' not an array"));
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& v : a) {
    if (!v.is_number()) {
      return LoadError(absl::StrCat("'", key, "' has a non-numeric entry"));
    }
    out.push_back(v.get<double>());
    if (!std::isfinite(out.back())) {
      return LoadError(absl::StrCat("'", key, "' has a non-finite entry"));
    }
  }
  return out;
}

absl::StatusOr<int> ReadInt(const json& j, absl::string_view key) {
  if (!j.contains(key) || !j.at(std::string(key)).is_number_integer()) {
    return LoadError(absl::StrCat("missing integer '", key, "'"));
  }
  int64_t v = j.at(std::string(key)).get<int64_t>();
  if (v < 1 || v > (1 << 20)) {
    return LoadError(absl::StrCat("'", key, "' out of range"));
  }
  return static_cast<int>(v);
}

absl::StatusOr<std::pair<int, int>> ReadPair(const json& j,
                                             absl::string_view key) {
  if (!j.contains(key)) return LoadError(absl::StrCat("missing '", key, "'"));
  const json& a = j.at(std::string(key));
  if (a.is_number_integer()) {
    int64_t v = a.get<int64_t>();
    if (v < 1 || v > 4096) return LoadError(absl::StrCat("bad '", key, "'"));
    return std::make_pair(static_cast<int>(v), static_cast<int>(v));
  }
  if (!a.is_array() || a.size() != 2 || !a[0].is_number_integer() ||
      !a[1].is_number_integer()) {
    return LoadError(absl::StrCat("'", key, "' must be [h, w]"));
  }
  int64_t h = a[0].get<int64_t>(), w = a[1].get<int64_t>();
  if (h < 1 || w < 1 || h > 4096 || w > 4096) {
    return LoadError(absl::StrCat("'", key, "' out of range"));
  }
  return std::make_pair(static_cast<int>(h), static_cast<int>(w));
}

absl::StatusOr<std::vector<double>> ReadNormalizationVector(
    const json& j, absl::string_view key, int features) {
  if (!j.contains(key)) return std::vector<double>{};
  const json& v = j.at(std::string(key));
  if (v.is_number()) return std::vector<double>(features, v.get<double>());
  VFI_ASSIGN_OR_RETURN(std::vector<double> out, ReadArray(j, key));
  if (static_cast<int>(out.size()) != features) {
    return LoadError(absl::StrCat("normalization '", key, "' has ",
                                  out.size(), " entries, expected ",
                                  features));
  }
  return out;
}

absl::Status AnnotateLayer(size_t index, const absl::Status& s) {
  return MakeError(GetErrorKind(s) == ErrorKind::kUnknown ? ErrorKind::kLoad
                                                          : GetErrorKind(s),
                   absl::StrCat("layer ", index, ": ", s.message()));
}

absl::StatusOr<Layer> ParseLayer(const json& j, bool* has_weights) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    return LoadError("layer without a string 'type'");
  }
  std::string type = j["type"].get<std::string>();
  bool weights_present = j.contains("weights") || j.contains("bias");
  if (type == "activation") {
    ActivationLayer act;
    VFI_ASSIGN_OR_RETURN(act.coefficients, ReadArray(j, "coefficients"));
    return act;
  }
  *has_weights = weights_present;
  if (type == "dense") {
    DenseLayer d;
    VFI_ASSIGN_OR_RETURN(d.rows, ReadInt(j, "rows"));
    VFI_ASSIGN_OR_RETURN(d.cols, ReadInt(j, "cols"));
    if (weights_present) {
      VFI_ASSIGN_OR_RETURN(d.weights, ReadArray(j, "weights"));
      VFI_ASSIGN_OR_RETURN(d.bias, ReadArray(j, "bias"));
    }
    return d;
  }
  if (type == "conv2d") {
    Conv2dLayer c;
    VFI_ASSIGN_OR_RETURN(c.in_channels, ReadInt(j, "inChannels"));
    VFI_ASSIGN_OR_RETURN(c.out_channels, ReadInt(j, "outChannels"));
    VFI_ASSIGN_OR_RETURN(auto kernel, ReadPair(j, "kernel"));
    c.kernel_h = kernel.first;
    c.kernel_w = kernel.second;
    std::pair<int, int> stride{1, 1};
    if (j.contains("stride")) {
      VFI_ASSIGN_OR_RETURN(stride, ReadPair(j, "stride"));
    }
    c.stride_h = stride.first;
    c.stride_w = stride.second;
    if (weights_present) {
      VFI_ASSIGN_OR_RETURN(c.weights, ReadArray(j, "weights"));
      VFI_ASSIGN_OR_RETURN(c.bias, ReadArray(j, "bias"));
    }
    return c;
  }
  return LoadError(absl::StrCat("unknown layer type '", type, "'"));
}

json ArrayJson(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

void DenseForward(const DenseLayer& d, const std::vector<double>& in,
                  std::vector<double>& out) {
  out.assign(d.rows, 0.0);
  for (int r = 0; r < d.rows; ++r) {
    double acc = d.bias[r];
    for (int c = 0; c < d.cols; ++c) {
      acc += d.weights[static_cast<size_t>(r) * d.cols + c] * in[c];
    }
    out[r] = acc;
  }
}

void ConvForward(const Conv2dLayer& c, const TensorShape& in_shape,
                 const TensorShape& out_shape, const std::vector<double>& in,
                 std::vector<double>& out) {
  out.assign(out_shape.size(), 0.0);
  for (int o = 0; o < c.out_channels; ++o) {
    for (int y = 0; y < out_shape.height; ++y) {
      for (int x = 0; x < out_shape.width; ++x) {
        double acc = c.bias[o];
        for (int ch = 0; ch < c.in_channels; ++ch) {
          for (int ky = 0; ky < c.kernel_h; ++ky) {
            for (int kx = 0; kx < c.kernel_w; ++kx) {
              size_t w = ((static_cast<size_t>(o) * c.in_channels + ch) *
                              c.kernel_h +
                          ky) *
                             c.kernel_w +
                         kx;
              size_t i = (static_cast<size_t>(ch) * in_shape.height +
                          y * c.stride_h + ky) *
                             in_shape.width +
                         x * c.stride_w + kx;
              acc += c.weights[w] * in[i];
            }
          }
        }
        out[(static_cast<size_t>(o) * out_shape.height + y) *
                out_shape.width +
            x] = acc;
      }
    }
  }
}

double EvalPolynomial(const std::vector<double>& coeffs, double x) {
  double acc = 0.0;
  for (size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
  return acc;
}

}  // namespace

int ActivationDegree(const ActivationLayer& act) {
  int deg = 0;
  for (size_t k = 0; k < act.coefficients.size(); ++k) {
    if (act.coefficients[k] != 0.0) deg = static_cast<int>(k);
  }
  return deg < 1 ? 1 : deg;
}

int LayerDepth(const Layer& layer) {
  if (const auto* act = std::get_if<ActivationLayer>(&layer)) {
    return CeilLog2(ActivationDegree(*act));
  }
  return 1;
}

int ModelDepth(const ModelSpec& model) {
  int depth = 0;
  for (const Layer& l : model.layers) depth += LayerDepth(l);
  return depth;
}

size_t ParameterCount(const ModelSpec& model) {
  size_t count = 0;
  for (const Layer& l : model.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&l)) {
      count += static_cast<size_t>(d->rows) * d->cols + d->rows;
    } else if (const auto* c = std::get_if<Conv2dLayer>(&l)) {
      count += static_cast<size_t>(c->out_channels) * c->in_channels *
                   c->kernel_h * c->kernel_w +
               c->out_channels;
    }
  }
  return count;
}

absl::StatusOr<std::vector<TensorShape>> LayerShapes(const ModelSpec& model) {
  if (model.input_height < 1 || model.input_width < 1) {
    return LoadError("inputShape must be positive");
  }
  std::vector<TensorShape> shapes;
  TensorShape cur = model.input_shape();
  for (size_t i = 0; i < model.layers.size(); ++i) {
    const Layer& l = model.layers[i];
    if (const auto* d = std::get_if<DenseLayer>(&l)) {
      if (d->cols != cur.size()) {
        return LayerError(i, absl::StrCat("dense expects ", d->cols,
                                          " inputs, previous layer yields ",
                                          cur.size()));
      }
      cur = {1, 1, d->rows};
    } else if (const auto* c = std::get_if<Conv2dLayer>(&l)) {
      if (c->in_channels != cur.channels) {
        return LayerError(i, absl::StrCat("conv2d expects ", c->in_channels,
                                          " channels, got ", cur.channels));
      }
      if (c->kernel_h > cur.height || c->kernel_w > cur.width) {
        return LayerError(i, "conv2d kernel larger than its input");
      }
      cur = {c->out_channels, (cur.height - c->kernel_h) / c->stride_h + 1,
             (cur.width - c->kernel_w) / c->stride_w + 1};
    }
    shapes.push_back(cur);
  }
  return shapes;
}

absl::Status ValidateModel(const ModelSpec& model, int max_depth) {
  if (model.layers.empty()) return LoadError("model has no layers");
  const int features = model.feature_count();
  const auto& norm = model.normalization;
  if ((!norm.scale.empty() && static_cast<int>(norm.scale.size()) != features) ||
      (!norm.shift.empty() && static_cast<int>(norm.shift.size()) != features)) {
    return LoadError("normalization size does not match inputShape");
  }
  VFI_ASSIGN_OR_RETURN(auto shapes, LayerShapes(model));
  (void)shapes;
  for (size_t i = 0; i < model.layers.size(); ++i) {
    const Layer& l = model.layers[i];
    if (const auto* act = std::get_if<ActivationLayer>(&l)) {
      if (act->coefficients.size() < 2) {
        return LayerError(i, "activation needs at least [a0, a1]");
      }
      if (ActivationDegree(*act) > 3) {
        return LayerError(i, "activation degree above 3 is not supported");
      }
      continue;
    }
    if (!model.has_weights) continue;
    if (const auto* d = std::get_if<DenseLayer>(&l)) {
      if (d->weights.size() != static_cast<size_t>(d->rows) * d->cols) {
        return LayerError(i, absl::StrCat("dense weights have ",
                                          d->weights.size(), " entries, need ",
                                          d->rows * d->cols));
      }
      if (d->bias.size() != static_cast<size_t>(d->rows)) {
        return LayerError(i, "dense bias size != rows");
      }
    } else if (const auto* c = std::get_if<Conv2dLayer>(&l)) {
      size_t need = static_cast<size_t>(c->out_channels) * c->in_channels *
                    c->kernel_h * c->kernel_w;
      if (c->weights.size() != need) {
        return LayerError(i, absl::StrCat("conv2d weights have ",
                                          c->weights.size(),
                                          " entries, need ", need));
      }
      if (c->bias.size() != static_cast<size_t>(c->out_channels)) {
        return LayerError(i, "conv2d bias size != outChannels");
      }
    }
  }
  if (max_depth >= 0) {
    int used = 0;
    for (size_t i = 0; i < model.layers.size(); ++i) {
      used += LayerDepth(model.layers[i]);
      if (used > max_depth) {
        return DepthOverflowError(absl::StrCat(
            "layer ", i, ": model needs depth ", ModelDepth(model),
            " but only ", max_depth, " levels are available"));
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<ModelSpec> ParseModelJson(absl::string_view text,
                                         int max_depth) {
  json j;
  try {
    j = json::parse(std::string(text));
  } catch (const json::exception& e) {
    return LoadError(absl::StrCat("model JSON: ", e.what()));
  }
  if (!j.is_object()) return LoadError("model JSON must be an object");
  ModelSpec m;
  if (j.contains("name") && j["name"].is_string()) {
    m.name = j["name"].get<std::string>();
  }
  VFI_ASSIGN_OR_RETURN(auto shape, ReadPair(j, "inputShape"));
  m.input_height = shape.first;
  m.input_width = shape.second;
  if (j.contains("normalization")) {
    const json& n = j["normalization"];
    if (!n.is_object()) return LoadError("normalization must be an object");
    VFI_ASSIGN_OR_RETURN(
        m.normalization.scale,
        ReadNormalizationVector(n, "scale", m.feature_count()));
    VFI_ASSIGN_OR_RETURN(
        m.normalization.shift,
        ReadNormalizationVector(n, "shift", m.feature_count()));
  }
  if (!j.contains("layers") || !j["layers"].is_array()) {
    return LoadError("missing 'layers' array");
  }
  int linear_with = 0, linear_without = 0;
  for (size_t i = 0; i < j["layers"].size(); ++i) {
    bool has_weights = false;
    auto layer = ParseLayer(j["layers"][i], &has_weights);
    if (!layer.ok()) return AnnotateLayer(i, layer.status());
    if (!std::holds_alternative<ActivationLayer>(*layer)) {
      (has_weights ? linear_with : linear_without) += 1;
    }
    m.layers.push_back(std::move(*layer));
  }
  if (linear_with > 0 && linear_without > 0) {
    return LoadError("either all linear layers carry weights or none do");
  }
  m.has_weights = linear_without == 0;
  VFI_RETURN_IF_ERROR(ValidateModel(m, max_depth));
  return m;
}

absl::StatusOr<ModelSpec> LoadModel(const std::string& path, int max_depth) {
  std::ifstream in(path);
  if (!in) return IoError(absl::StrCat("cannot open model file ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseModelJson(ss.str(), max_depth);
}

std::string ModelToJson(const ModelSpec& model, bool include_weights) {
  include_weights = include_weights && model.has_weights;
  json j;
  j["name"] = model.name;
  j["inputShape"] = {model.input_height, model.input_width};
  json norm = json::object();
  if (!model.normalization.scale.empty()) {
    norm["scale"] = ArrayJson(model.normalization.scale);
  }
  if (!model.normalization.shift.empty()) {
    norm["shift"] = ArrayJson(model.normalization.shift);
  }
  j["normalization"] = norm;
  json layers = json::array();
  for (const Layer& l : model.layers) {
    json lj;
    if (const auto* d = std::get_if<DenseLayer>(&l)) {
      lj["type"] = "dense";
      lj["rows"] = d->rows;
      lj["cols"] = d->cols;
      if (include_weights) {
        lj["weights"] = ArrayJson(d->weights);
        lj["bias"] = ArrayJson(d->bias);
      }
    } else if (const auto* c = std::get_if<Conv2dLayer>(&l)) {
      lj["type"] = "conv2d";
      lj["inChannels"] = c->in_channels;
      lj["outChannels"] = c->out_channels;
      lj["kernel"] = {c->kernel_h, c->kernel_w};
      lj["stride"] = {c->stride_h, c->stride_w};
      if (include_weights) {
        lj["weights"] = ArrayJson(c->weights);
        lj["bias"] = ArrayJson(c->bias);
      }
    } else {
      lj["type"] = "activation";
      lj["coefficients"] = ArrayJson(std::get<ActivationLayer>(l).coefficients);
    }
    layers.push_back(lj);
  }
  j["layers"] = layers;
  return j.dump(1);
}

ModelSpec StripWeights(const ModelSpec& model) {
  ModelSpec out = model;
  out.has_weights = false;
  for (Layer& l : out.layers) {
    if (auto* d = std::get_if<DenseLayer>(&l)) {
      d->weights.clear();
      d->bias.clear();
    } else if (auto* c = std::get_if<Conv2dLayer>(&l)) {
      c->weights.clear();
      c->bias.clear();
    }
  }
  return out;
}

std::vector<double> Normalize(const ModelSpec& model,
                              std::span<const double> raw) {
  std::vector<double> x(raw.begin(), raw.end());
  const auto& n = model.normalization;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!n.scale.empty()) x[i] *= n.scale[i];
    if (!n.shift.empty()) x[i] += n.shift[i];
  }
  return x;
}

absl::StatusOr<std::vector<double>> InferClearNormalized(
    const ModelSpec& model, std::span<const double> x) {
  if (!model.has_weights) return ShapeError("model has no weights");
  if (static_cast<int>(x.size()) != model.feature_count()) {
    return ShapeError(absl::StrCat("input has ", x.size(),
                                   " features, model expects ",
                                   model.feature_count()));
  }
  VFI_ASSIGN_OR_RETURN(auto shapes, LayerShapes(model));
  std::vector<double> cur(x.begin(), x.end()), next;
  TensorShape shape = model.input_shape();
  for (size_t i = 0; i < model.layers.size(); ++i) {
    const Layer& l = model.layers[i];
    if (const auto* d = std::get_if<DenseLayer>(&l)) {
      DenseForward(*d, cur, next);
      cur.swap(next);
    } else if (const auto* c = std::get_if<Conv2dLayer>(&l)) {
      ConvForward(*c, shape, shapes[i], cur, next);
      cur.swap(next);
    } else {
      const auto& coeffs = std::get<ActivationLayer>(l).coefficients;
      for (double& v : cur) v = EvalPolynomial(coeffs, v);
    }
    shape = shapes[i];
  }
  return cur;
}

absl::StatusOr<std::vector<double>> InferClear(const ModelSpec& model,
                                               std::span<const double> raw) {
  if (static_cast<int>(raw.size()) != model.feature_count()) {
    return ShapeError(absl::StrCat("input has ", raw.size(),
                                   " features, model expects ",
                                   model.feature_count()));
  }
  std::vector<double> x = Normalize(model, raw);
  return InferClearNormalized(model, x);
}

}  // namespace vfi::einfer
