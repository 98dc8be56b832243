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

#include "vfi/einfer/compiler.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "absl/strings/str_cat.h"
#include "vfi/ckks/encoder.h"
#include "vfi/ckks/encryptor.h"
#include "vfi/ckks/evaluator.h"
#include "vfi/ckks/serialization.h"
#include "vfi/common/bytes.h"
#include "vfi/common/status.h"
#include "vfi/common/status_macros.h"

namespace vfi::einfer {
namespace {

using ckks::Ciphertext;
using ckks::Evaluator;

// One non-zero of the lowered matrix: out_flat <- weight * in_flat.
struct Entry {
  int out = 0;
  int in = 0;
  int weight = -1;  // index into the layer's weight array
};

int BabyStep(int period) {
  int log = 0;
  while ((1 << log) < period) ++log;
  return 1 << ((log + 1) / 2);
}

int Mod(int64_t a, int m) {
  int64_t r = a % m;
  return static_cast<int>(r < 0 ? r + m : r);
}

std::vector<Entry> LowerDense(const DenseLayer& d) {
  std::vector<Entry> entries;
  entries.reserve(static_cast<size_t>(d.rows) * d.cols);
  for (int r = 0; r < d.rows; ++r) {
    for (int c = 0; c < d.cols; ++c) {
      entries.push_back({r, c, r * d.cols + c});
    }
  }
  return entries;
}

// im2col: every output pixel reads a kernel window of every input channel.
std::vector<Entry> LowerConv(const Conv2dLayer& cv, const TensorShape& in,
                             const TensorShape& out) {
  std::vector<Entry> entries;
  for (int o = 0; o < cv.out_channels; ++o) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        int out_flat = (o * out.height + y) * out.width + x;
        for (int c = 0; c < cv.in_channels; ++c) {
          for (int ky = 0; ky < cv.kernel_h; ++ky) {
            for (int kx = 0; kx < cv.kernel_w; ++kx) {
              int in_flat = (c * in.height + y * cv.stride_h + ky) * in.width +
                            x * cv.stride_w + kx;
              int w = ((o * cv.in_channels + c) * cv.kernel_h + ky) *
                          cv.kernel_w +
                      kx;
              entries.push_back({out_flat, in_flat, w});
            }
          }
        }
      }
    }
  }
  return entries;
}

bool ValidPlacement(const std::vector<int>& pos, int period) {
  std::set<int> seen;
  for (int p : pos) {
    if (p < 0 || p >= period || !seen.insert(p).second) return false;
  }
  return true;
}

size_t CountOffsets(const std::vector<Entry>& entries,
                    const std::vector<int>& in_pos,
                    const std::vector<int>& out_pos, int period) {
  std::set<int> offsets;
  for (const Entry& e : entries) {
    offsets.insert(Mod(in_pos[e.in] - out_pos[e.out], period));
  }
  return offsets.size();
}

// Chooses output slots for a linear layer among a few deterministic
// candidates, minimizing the number of distinct diagonals.
std::vector<int> PlaceOutputs(const Layer& layer, const TensorShape& in_shape,
                              const TensorShape& out_shape,
                              const std::vector<int>& in_pos,
                              const std::vector<Entry>& entries, int period) {
  std::vector<std::vector<int>> candidates;
  if (const auto* cv = std::get_if<Conv2dLayer>(&layer)) {
    // Anchor each output pixel at the top-left input of its window and
    // interleave the output channels next to it.
    std::vector<int> anchored(out_shape.size());
    for (int o = 0; o < out_shape.channels; ++o) {
      for (int y = 0; y < out_shape.height; ++y) {
        for (int x = 0; x < out_shape.width; ++x) {
          int anchor =
              in_pos[(y * cv->stride_h) * in_shape.width + x * cv->stride_w];
          anchored[(o * out_shape.height + y) * out_shape.width + x] =
              anchor + o;
        }
      }
    }
    candidates.push_back(std::move(anchored));
  } else if (out_shape.size() <= in_shape.size()) {
    std::vector<int> aligned(in_pos.begin(), in_pos.begin() + out_shape.size());
    candidates.push_back(std::move(aligned));
  }
  std::vector<int> compact(out_shape.size());
  for (int i = 0; i < out_shape.size(); ++i) compact[i] = i;
  candidates.push_back(std::move(compact));

  size_t best = 0, best_count = SIZE_MAX;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (!ValidPlacement(candidates[i], period)) continue;
    size_t count = CountOffsets(entries, in_pos, candidates[i], period);
    if (count < best_count) {
      best = i;
      best_count = count;
    }
  }
  return candidates[best];
}

absl::StatusOr<LinearStage> BuildLinearStage(
    size_t index, const Layer& layer, const TensorShape& in_shape,
    const TensorShape& out_shape, const std::vector<int>& in_pos,
    const vpack::PackLayout& layout, bool with_weights) {
  const int period = layout.period;
  if (out_shape.size() > period) {
    return CapacityError(absl::StrCat("layer ", index, " output width ",
                                      out_shape.size(), " exceeds period ",
                                      period));
  }
  std::vector<Entry> entries;
  const std::vector<double>* weights = nullptr;
  const std::vector<double>* bias = nullptr;
  if (const auto* d = std::get_if<DenseLayer>(&layer)) {
    entries = LowerDense(*d);
    weights = &d->weights;
    bias = &d->bias;
  } else {
    const auto& cv = std::get<Conv2dLayer>(layer);
    entries = LowerConv(cv, in_shape, out_shape);
    weights = &cv.weights;
    bias = &cv.bias;
  }
  LinearStage st;
  st.layer_index = index;
  st.in_positions = in_pos;
  st.out_positions =
      PlaceOutputs(layer, in_shape, out_shape, in_pos, entries, period);

  std::set<int> offset_set;
  for (const Entry& e : entries) {
    offset_set.insert(Mod(in_pos[e.in] - st.out_positions[e.out], period));
  }
  st.offsets.assign(offset_set.begin(), offset_set.end());
  std::map<int, int> offset_index;
  for (size_t i = 0; i < st.offsets.size(); ++i) {
    offset_index[st.offsets[i]] = static_cast<int>(i);
  }

  st.baby_step = BabyStep(period);
  std::set<int> babies;
  std::map<int, std::vector<int>> giant_members;  // giant -> diagonal ids
  for (size_t i = 0; i < st.offsets.size(); ++i) {
    int k = st.offsets[i];
    babies.insert(k % st.baby_step);
    giant_members[k - k % st.baby_step].push_back(static_cast<int>(i));
  }
  st.baby_rotations.assign(babies.begin(), babies.end());
  std::map<int, int> baby_index;
  for (size_t i = 0; i < st.baby_rotations.size(); ++i) {
    baby_index[st.baby_rotations[i]] = static_cast<int>(i);
  }
  for (const auto& [giant, members] : giant_members) {
    LinearStage::GiantStep g;
    g.rotation = giant;
    for (int d : members) {
      g.terms.push_back({baby_index[st.offsets[d] % st.baby_step], d});
    }
    st.giants.push_back(std::move(g));
  }

  if (with_weights) {
    // Periodic diagonals over one period, then pre-rotated by -giant and
    // replicated over all slots.
    std::vector<std::vector<double>> periodic(
        st.offsets.size(), std::vector<double>(period, 0.0));
    for (const Entry& e : entries) {
      int row = st.out_positions[e.out];
      int k = Mod(in_pos[e.in] - row, period);
      periodic[offset_index[k]][row] += (*weights)[e.weight];
    }
    const size_t slots = layout.total_slots;
    st.diagonals.assign(st.offsets.size(), std::vector<double>(slots));
    for (size_t i = 0; i < st.offsets.size(); ++i) {
      int giant = st.offsets[i] - st.offsets[i] % st.baby_step;
      for (size_t j = 0; j < slots; ++j) {
        st.diagonals[i][j] = periodic[i][Mod(static_cast<int64_t>(j) - giant,
                                             period)];
      }
    }
    st.bias.assign(slots, 0.0);
    // Conv biases are per output channel, dense biases per output.
    const int per_channel = std::holds_alternative<Conv2dLayer>(layer)
                                ? out_shape.height * out_shape.width
                                : 1;
    for (int r = 0; r < out_shape.size(); ++r) {
      for (int rep = 0; rep < layout.replication; ++rep) {
        st.bias[st.out_positions[r] + rep * period] = (*bias)[r / per_channel];
      }
    }
  }
  return st;
}

}  // namespace

ActivationPlan PlanActivation(std::span<const double> a, double s, int level,
                              std::span<const uint64_t> moduli) {
  ActivationPlan plan;
  ActivationLayer layer{{a.begin(), a.end()}};
  plan.degree = ActivationDegree(layer);
  if (plan.degree == 1) {
    plan.depth = 0;
    plan.out_scale = a.size() > 1 && a[1] != 0.0 ? s / std::fabs(a[1]) : s;
    return plan;
  }
  const double ql = static_cast<double>(moduli[level]);
  const double s2 = (s * s) / ql;
  if (plan.degree == 2) {
    plan.depth = 1;
    plan.out_scale = s2 / std::fabs(a[2]);
    return plan;
  }
  const double ql1 = static_cast<double>(moduli[level - 1]);
  plan.depth = 2;
  plan.out_scale = (s2 * s2) / ql1;
  return plan;
}

absl::StatusOr<CompiledModel> CompileStructure(
    const ModelSpec& model, const vpack::PackLayout& layout,
    const ring::CryptoParams& params) {
  const int max_level = params.max_level();
  VFI_RETURN_IF_ERROR(ValidateModel(model, max_level));
  VFI_RETURN_IF_ERROR(layout.Validate(model.input_height, model.input_width));
  if (layout.total_slots != params.slots()) {
    return CapacityError("layout slot count does not match the parameters");
  }
  if (layout.gap != 1) {
    return CapacityError("the compiler supports gap = 1 layouts only");
  }
  VFI_ASSIGN_OR_RETURN(auto shapes, LayerShapes(model));

  CompiledModel cm;
  cm.layout = layout;
  cm.input_level = max_level;
  cm.input_scale = params.scale();
  std::vector<int> positions(model.feature_count());
  for (int f = 0; f < model.feature_count(); ++f) {
    positions[f] = layout.gap * f;
  }
  TensorShape shape = model.input_shape();
  int level = max_level;
  double scale = params.scale();
  std::set<int> rotations;
  for (size_t i = 0; i < model.layers.size(); ++i) {
    const Layer& layer = model.layers[i];
    if (const auto* act = std::get_if<ActivationLayer>(&layer)) {
      ActivationStage st;
      st.layer_index = i;
      st.coefficients = act->coefficients;
      st.in_level = level;
      st.in_scale = scale;
      ActivationPlan plan =
          PlanActivation(act->coefficients, scale, level, params.moduli);
      st.depth = plan.depth;
      st.out_scale = plan.out_scale;
      level -= plan.depth;
      scale = plan.out_scale;
      cm.stages.push_back(std::move(st));
    } else {
      VFI_ASSIGN_OR_RETURN(
          LinearStage st,
          BuildLinearStage(i, layer, shape, shapes[i], positions, layout,
                           model.has_weights));
      const double ql = static_cast<double>(params.moduli[level]);
      st.in_level = level;
      st.in_scale = scale;
      st.weight_scale = params.scale() * ql / scale;
      st.out_scale = (scale * st.weight_scale) / ql;
      for (int b : st.baby_rotations) {
        if (b != 0) rotations.insert(b);
      }
      for (const auto& g : st.giants) {
        if (g.rotation != 0) rotations.insert(g.rotation);
      }
      positions = st.out_positions;
      level -= 1;
      scale = st.out_scale;
      cm.stages.push_back(std::move(st));
    }
    shape = shapes[i];
    cm.level_trace.push_back(level);
  }
  cm.rotations.assign(rotations.begin(), rotations.end());
  cm.depth = max_level - level;
  cm.output_level = level;
  cm.output_scale = scale;
  cm.output_positions = positions;
  cm.mode = WeightMode::kStructure;
  return cm;
}

absl::StatusOr<std::vector<int>> RotationManifest(
    const ModelSpec& model, const vpack::PackLayout& layout,
    const ring::CryptoParams& params) {
  VFI_ASSIGN_OR_RETURN(CompiledModel cm,
                       CompileStructure(StripWeights(model), layout, params));
  return cm.rotations;
}

absl::StatusOr<CompiledModel> Compile(const ModelSpec& model,
                                      const vpack::PackLayout& layout,
                                      const ring::RingContextPtr& ctx) {
  if (!model.has_weights) return LoadError("model has no weights to compile");
  VFI_ASSIGN_OR_RETURN(CompiledModel cm,
                       CompileStructure(model, layout, ctx->params()));
  cm.ctx = ctx;
  ckks::Encoder encoder(ctx);
  for (Stage& stage : cm.stages) {
    auto* st = std::get_if<LinearStage>(&stage);
    if (st == nullptr) continue;
    st->plain_diagonals.reserve(st->diagonals.size());
    for (const auto& diag : st->diagonals) {
      VFI_ASSIGN_OR_RETURN(ckks::Plaintext pt,
                           encoder.Encode(diag, st->in_level, st->weight_scale));
      st->plain_diagonals.push_back(std::move(pt));
    }
    VFI_ASSIGN_OR_RETURN(st->plain_bias,
                         encoder.Encode(st->bias, st->in_level - 1,
                                        st->out_scale));
  }
  cm.mode = WeightMode::kPlaintext;
  return cm;
}

absl::Status EncryptModel(CompiledModel& cm, const ckks::PublicKey& cpk,
                          ring::Prng& prng) {
  if (cm.mode != WeightMode::kPlaintext || cm.ctx == nullptr) {
    return StructuralError("only a plaintext-compiled model can be encrypted");
  }
  ckks::Encoder encoder(cm.ctx);
  Evaluator eval;
  const int top = cm.ctx->max_level();
  for (Stage& stage : cm.stages) {
    auto* st = std::get_if<LinearStage>(&stage);
    if (st == nullptr) continue;
    st->cipher_diagonals.clear();
    for (const auto& diag : st->diagonals) {
      VFI_ASSIGN_OR_RETURN(ckks::Plaintext pt,
                           encoder.Encode(diag, top, st->weight_scale));
      VFI_ASSIGN_OR_RETURN(Ciphertext ct, ckks::Encrypt(cpk, pt, prng));
      VFI_ASSIGN_OR_RETURN(ct, eval.DropToLevel(ct, st->in_level));
      st->cipher_diagonals.push_back(std::move(ct));
    }
    VFI_ASSIGN_OR_RETURN(ckks::Plaintext pb,
                         encoder.Encode(st->bias, top, st->out_scale));
    VFI_ASSIGN_OR_RETURN(Ciphertext cb, ckks::Encrypt(cpk, pb, prng));
    VFI_ASSIGN_OR_RETURN(st->cipher_bias, eval.DropToLevel(cb, st->in_level - 1));
    // Only structure stays in the clear.
    st->diagonals.clear();
    st->bias.clear();
    st->plain_diagonals.clear();
    st->plain_bias = ckks::Plaintext{};
  }
  cm.mode = WeightMode::kCiphertext;
  return absl::OkStatus();
}

std::vector<uint8_t> SerializeEncryptedWeights(const CompiledModel& cm) {
  ByteWriter w;
  w.U8(ckks::kSerializationVersion);
  uint32_t count = 0;
  for (const Stage& s : cm.stages) count += std::holds_alternative<LinearStage>(s);
  w.U32(count);
  for (const Stage& s : cm.stages) {
    const auto* st = std::get_if<LinearStage>(&s);
    if (st == nullptr) continue;
    w.U32(static_cast<uint32_t>(st->layer_index));
    w.U32(static_cast<uint32_t>(st->cipher_diagonals.size()));
    for (const auto& ct : st->cipher_diagonals) ckks::WriteCiphertext(w, ct);
    ckks::WriteCiphertext(w, st->cipher_bias);
  }
  return w.Take();
}

absl::Status LoadEncryptedWeights(CompiledModel& cm,
                                  std::span<const uint8_t> bytes) {
  if (cm.ctx == nullptr) return StructuralError("compiled model has no ring");
  ByteReader r(bytes);
  VFI_ASSIGN_OR_RETURN(uint8_t version, r.U8());
  if (version != ckks::kSerializationVersion) {
    return FramingError("unsupported weight sidecar version");
  }
  VFI_ASSIGN_OR_RETURN(uint32_t count, r.U32());
  uint32_t expected = 0;
  for (const Stage& s : cm.stages) {
    expected += std::holds_alternative<LinearStage>(s);
  }
  if (count != expected) {
    return StructuralError("weight sidecar does not match the model");
  }
  for (Stage& s : cm.stages) {
    auto* st = std::get_if<LinearStage>(&s);
    if (st == nullptr) continue;
    VFI_ASSIGN_OR_RETURN(uint32_t index, r.U32());
    VFI_ASSIGN_OR_RETURN(uint32_t diags, r.U32());
    if (index != st->layer_index || diags != st->offsets.size()) {
      return StructuralError(
          absl::StrCat("weight sidecar mismatch at layer ", st->layer_index));
    }
    std::vector<Ciphertext> cts;
    for (uint32_t d = 0; d < diags; ++d) {
      VFI_ASSIGN_OR_RETURN(Ciphertext ct, ckks::ReadCiphertext(r, cm.ctx));
      if (ct.level() != st->in_level ||
          !ckks::ScalesEqual(ct.scale, st->weight_scale)) {
        return StructuralError("sidecar diagonal has the wrong level/scale");
      }
      cts.push_back(std::move(ct));
    }
    VFI_ASSIGN_OR_RETURN(Ciphertext bias, ckks::ReadCiphertext(r, cm.ctx));
    if (bias.level() != st->in_level - 1 ||
        !ckks::ScalesEqual(bias.scale, st->out_scale)) {
      return StructuralError("sidecar bias has the wrong level/scale");
    }
    st->cipher_diagonals = std::move(cts);
    st->cipher_bias = std::move(bias);
    st->diagonals.clear();
    st->bias.clear();
    st->plain_diagonals.clear();
  }
  VFI_RETURN_IF_ERROR(r.ExpectDone());
  cm.mode = WeightMode::kCiphertext;
  return absl::OkStatus();
}

absl::StatusOr<Ciphertext> DenseForward(const Ciphertext& ct,
                                        const LinearStage& st,
                                        const ckks::EvalKeySet& keys) {
  if (ct.empty()) return StructuralError("empty input ciphertext");
  if (ct.level() < 1) {
    return DepthExhaustedError("linear layer needs one level, none left");
  }
  if (ct.level() != st.in_level) {
    return LevelError(absl::StrCat("linear layer expects level ", st.in_level,
                                   ", got ", ct.level()));
  }
  if (!ckks::ScalesEqual(ct.scale, st.in_scale)) {
    return AlignmentError("input scale differs from the compiled schedule");
  }
  const bool encrypted = !st.cipher_diagonals.empty();
  if (!encrypted && st.plain_diagonals.size() != st.offsets.size()) {
    return StructuralError("linear layer has no encoded weights");
  }
  if (encrypted && !keys.relin.has_value()) {
    return KeyNotFoundError("encrypted weights need a relinearization key");
  }
  Evaluator eval;
  std::vector<int> nonzero;
  for (int b : st.baby_rotations) {
    if (b != 0) nonzero.push_back(b);
  }
  VFI_ASSIGN_OR_RETURN(std::vector<Ciphertext> rotated,
                       eval.RotateHoisted(ct, nonzero, keys));
  std::vector<const Ciphertext*> babies(st.baby_rotations.size());
  for (size_t i = 0, n = 0; i < st.baby_rotations.size(); ++i) {
    babies[i] = st.baby_rotations[i] == 0 ? &ct : &rotated[n++];
  }
  Ciphertext total;
  for (const auto& giant : st.giants) {
    Ciphertext acc;
    if (encrypted) {
      ckks::TensorCiphertext tensor;
      for (const auto& t : giant.terms) {
        VFI_RETURN_IF_ERROR(eval.MulAccumulate(tensor, *babies[t.baby],
                                               st.cipher_diagonals[t.diagonal]));
      }
      VFI_ASSIGN_OR_RETURN(acc, eval.Relinearize(tensor, *keys.relin));
    } else {
      for (const auto& t : giant.terms) {
        VFI_RETURN_IF_ERROR(eval.MulPlainAccumulate(
            acc, *babies[t.baby], st.plain_diagonals[t.diagonal]));
      }
    }
    if (giant.rotation != 0) {
      VFI_ASSIGN_OR_RETURN(acc, eval.Rotate(acc, giant.rotation, keys));
    }
    if (total.empty()) {
      total = std::move(acc);
    } else {
      VFI_ASSIGN_OR_RETURN(total, eval.Add(total, acc));
    }
  }
  VFI_ASSIGN_OR_RETURN(total, eval.Rescale(total));
  if (encrypted) {
    return eval.Add(total, st.cipher_bias);
  }
  return eval.AddPlain(total, st.plain_bias);
}

absl::StatusOr<Ciphertext> ActivationForward(
    const Ciphertext& x, std::span<const double> a,
    const ckks::EvalKeySet& keys) {
  if (x.empty()) return StructuralError("empty input ciphertext");
  if (a.size() < 2) return StructuralError("activation needs [a0, a1, ...]");
  const auto& moduli = x.context().params().moduli;
  const int l = x.level();
  ActivationLayer layer{{a.begin(), a.end()}};
  const int degree = ActivationDegree(layer);
  if (degree > 3) return StructuralError("activation degree above 3");
  const int depth = degree == 1 ? 0 : (degree == 2 ? 1 : 2);
  if (l < depth) {
    return DepthExhaustedError(absl::StrCat("activation needs ", depth,
                                            " levels, ", l, " left"));
  }
  if (depth > 0 && !keys.relin.has_value()) {
    return KeyNotFoundError("activation needs a relinearization key");
  }
  const ActivationPlan plan = PlanActivation(a, x.scale, l, moduli);
  Evaluator eval;
  const double s = x.scale;
  auto coeff = [&](int k) { return k < static_cast<int>(a.size()) ? a[k] : 0.0; };

  // Re-reads a ciphertext of v at scale `scale` as c * v by folding |c| into
  // the recorded scale (and the sign into the ciphertext).
  auto fold = [&](Ciphertext ct, double c) {
    if (c < 0) ct = eval.Negate(ct);
    ct.scale = ct.scale / std::fabs(c);
    return ct;
  };
  // c * v moved to `target_level` at scale `target_scale`, one rescale.
  auto linear_term = [&](const Ciphertext& v, double c, int target_level,
                         double target_scale) -> absl::StatusOr<Ciphertext> {
    const double qv = static_cast<double>(moduli[v.level()]);
    VFI_ASSIGN_OR_RETURN(
        Ciphertext t,
        eval.MulConstNoRescale(v, c, target_scale * qv / v.scale));
    VFI_ASSIGN_OR_RETURN(t, eval.Rescale(t));
    if (t.level() > target_level) {
      VFI_ASSIGN_OR_RETURN(t, eval.DropToLevel(t, target_level));
    }
    return t;
  };

  Ciphertext y;
  if (degree == 1) {
    if (coeff(1) == 0.0) {
      VFI_ASSIGN_OR_RETURN(y, eval.MulConstNoRescale(x, 0.0, 1.0));
    } else {
      y = fold(x, coeff(1));
    }
  } else if (degree == 2) {
    VFI_ASSIGN_OR_RETURN(Ciphertext sq, eval.Mul(x, x, *keys.relin));
    y = fold(std::move(sq), coeff(2));
    y.scale = plan.out_scale;
    if (coeff(1) != 0.0) {
      VFI_ASSIGN_OR_RETURN(Ciphertext t,
                           linear_term(x, coeff(1), l - 1, plan.out_scale));
      VFI_ASSIGN_OR_RETURN(y, eval.Add(y, t));
    }
  } else {
    VFI_ASSIGN_OR_RETURN(Ciphertext sq, eval.Mul(x, x, *keys.relin));
    // a3 * x at the scale of x^2, then (a3 x) * x^2.
    VFI_ASSIGN_OR_RETURN(Ciphertext t, eval.MulConstNoRescale(x, coeff(3), s));
    VFI_ASSIGN_OR_RETURN(t, eval.Rescale(t));
    VFI_ASSIGN_OR_RETURN(y, eval.Mul(t, sq, *keys.relin));
    if (coeff(2) != 0.0) {
      VFI_ASSIGN_OR_RETURN(Ciphertext t2,
                           linear_term(sq, coeff(2), l - 2, y.scale));
      VFI_ASSIGN_OR_RETURN(y, eval.Add(y, t2));
    }
    if (coeff(1) != 0.0) {
      VFI_ASSIGN_OR_RETURN(Ciphertext t1,
                           linear_term(x, coeff(1), l - 2, y.scale));
      VFI_ASSIGN_OR_RETURN(y, eval.Add(y, t1));
    }
  }
  if (coeff(0) != 0.0) {
    VFI_ASSIGN_OR_RETURN(y, eval.AddConst(y, coeff(0)));
  }
  return y;
}

absl::StatusOr<Ciphertext> Infer(const Ciphertext& input,
                                 const CompiledModel& cm,
                                 const ckks::EvalKeySet& keys) {
  if (cm.mode == WeightMode::kStructure) {
    return StructuralError("model compiled without weights");
  }
  if (input.empty()) return StructuralError("empty input ciphertext");
  if (input.level() != cm.input_level) {
    return LevelError(absl::StrCat("inference input must be at level ",
                                   cm.input_level, ", got ", input.level()));
  }
  for (int k : cm.rotations) {
    if (keys.FindRotation(k) == nullptr) {
      return KeyNotFoundError(absl::StrCat("missing rotation key for offset ",
                                           k));
    }
  }
  Ciphertext ct = input;
  for (const Stage& stage : cm.stages) {
    absl::StatusOr<Ciphertext> next;
    size_t index;
    if (const auto* st = std::get_if<LinearStage>(&stage)) {
      index = st->layer_index;
      next = DenseForward(ct, *st, keys);
    } else {
      const auto& act = std::get<ActivationStage>(stage);
      index = act.layer_index;
      if (ct.level() != act.in_level) {
        next = LevelError("activation input level differs from the schedule");
      } else {
        next = ActivationForward(ct, act.coefficients, keys);
      }
    }
    if (!next.ok()) {
      return MakeError(GetErrorKind(next.status()),
                       absl::StrCat("layer ", index, ": ",
                                    next.status().message()));
    }
    ct = std::move(*next);
  }
  return ct;
}

absl::StatusOr<std::vector<double>> EvaluateCompiledClear(
    const CompiledModel& cm, std::span<const double> slots_in) {
  const size_t slots = cm.layout.total_slots;
  if (slots_in.size() != slots) {
    return ShapeError(absl::StrCat("expected ", slots, " slots, got ",
                                   slots_in.size()));
  }
  auto rotate = [slots](const std::vector<double>& v, int k) {
    std::vector<double> out(slots);
    for (size_t j = 0; j < slots; ++j) out[j] = v[(j + k) % slots];
    return out;
  };
  std::vector<double> x(slots_in.begin(), slots_in.end());
  for (const Stage& stage : cm.stages) {
    if (const auto* st = std::get_if<LinearStage>(&stage)) {
      if (st->diagonals.size() != st->offsets.size()) {
        return StructuralError("clear evaluation needs clear weights");
      }
      std::vector<std::vector<double>> babies;
      for (int b : st->baby_rotations) babies.push_back(rotate(x, b));
      std::vector<double> total(slots, 0.0);
      for (const auto& giant : st->giants) {
        std::vector<double> acc(slots, 0.0);
        for (const auto& t : giant.terms) {
          const auto& d = st->diagonals[t.diagonal];
          const auto& b = babies[t.baby];
          for (size_t j = 0; j < slots; ++j) acc[j] += d[j] * b[j];
        }
        acc = rotate(acc, giant.rotation);
        for (size_t j = 0; j < slots; ++j) total[j] += acc[j];
      }
      for (size_t j = 0; j < slots; ++j) total[j] += st->bias[j];
      x = std::move(total);
    } else {
      const auto& coeffs = std::get<ActivationStage>(stage).coefficients;
      for (double& v : x) {
        double acc = 0.0;
        for (size_t k = coeffs.size(); k-- > 0;) acc = acc * v + coeffs[k];
        v = acc;
      }
    }
  }
  return x;
}

std::vector<double> ExtractOutput(const CompiledModel& cm,
                                  std::span<const double> slots) {
  std::vector<double> out;
  out.reserve(cm.output_positions.size());
  for (int p : cm.output_positions) {
    out.push_back(static_cast<size_t>(p) < slots.size() ? slots[p] : 0.0);
  }
  return out;
}

}  // namespace vfi::einfer
