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

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "vfi/ckks/encoder.h"
#include "vfi/ckks/encryptor.h"
#include "vfi/ckks/evaluator.h"
#include "vfi/ckks/serialization.h"
#include "vfi/common/status.h"
#include "vfi/einfer/compiler.h"
#include "vfi/einfer/model.h"
#include "vfi/vpack/vpack.h"

namespace vfi::einfer {
namespace {

using ::vfi::testing::MaxAbsDiff;
using ::vfi::testing::PresetContext;
using ::vfi::testing::RandomVector;

std::vector<double> Uniform(size_t n, std::mt19937_64& rng, double bound) {
  return RandomVector(n, rng, -bound, bound);
}

DenseLayer RandomDense(int rows, int cols, std::mt19937_64& rng) {
  DenseLayer d{rows, cols, {}, {}};
  d.weights = Uniform(static_cast<size_t>(rows) * cols, rng,
                      1.0 / std::sqrt(static_cast<double>(cols)));
  d.bias = Uniform(rows, rng, 0.1);
  return d;
}

Conv2dLayer RandomConv(int in, int out, int k, int stride,
                       std::mt19937_64& rng) {
  Conv2dLayer c{in, out, k, k, stride, stride, {}, {}};
  c.weights = Uniform(static_cast<size_t>(out) * in * k * k, rng,
                      1.0 / std::sqrt(static_cast<double>(in * k * k)));
  c.bias = Uniform(out, rng, 0.1);
  return c;
}

ModelSpec Sequential(int h, int w, std::vector<Layer> layers) {
  ModelSpec m;
  m.name = "test";
  m.input_height = h;
  m.input_width = w;
  m.layers = std::move(layers);
  return m;
}

// 28x28 -> conv 7x7/3 (3 ch) -> x^2 -> conv 2x2/2 (6 ch) -> dense 96 -> 10.
ModelSpec CnnShaped(std::mt19937_64& rng) {
  return Sequential(28, 28,
                    {RandomConv(1, 3, 7, 3, rng), ActivationLayer{{0, 0, 1}},
                     RandomConv(3, 6, 2, 2, rng), RandomDense(10, 96, rng)});
}

ModelSpec IdentityModel(int n) {
  DenseLayer d{n, n, std::vector<double>(n * n, 0.0),
               std::vector<double>(n, 0.0)};
  for (int i = 0; i < n; ++i) d.weights[i * n + i] = 1.0;
  return Sequential(1, n, {d});
}

// Independent reference: conv lowered to an explicit matrix, polynomial
// evaluated by powers.
std::vector<double> NaiveInfer(const ModelSpec& m, std::vector<double> x) {
  int ch = 1, h = m.input_height, w = m.input_width;
  for (size_t i = 0; i < m.normalization.scale.size(); ++i) {
    x[i] = x[i] * m.normalization.scale[i] + m.normalization.shift[i];
  }
  for (const Layer& layer : m.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      std::vector<double> y(d->bias);
      for (int r = 0; r < d->rows; ++r) {
        for (int c = 0; c < d->cols; ++c) y[r] += d->weights[r * d->cols + c] * x[c];
      }
      x = y;
      ch = 1;
      h = 1;
      w = d->rows;
    } else if (const auto* c = std::get_if<Conv2dLayer>(&layer)) {
      int oh = (h - c->kernel_h) / c->stride_h + 1;
      int ow = (w - c->kernel_w) / c->stride_w + 1;
      int rows = c->out_channels * oh * ow, cols = ch * h * w;
      std::vector<double> mat(static_cast<size_t>(rows) * cols, 0.0);
      for (int o = 0; o < c->out_channels; ++o)
        for (int y = 0; y < oh; ++y)
          for (int xx = 0; xx < ow; ++xx)
            for (int ci = 0; ci < ch; ++ci)
              for (int ky = 0; ky < c->kernel_h; ++ky)
                for (int kx = 0; kx < c->kernel_w; ++kx) {
                  int row = (o * oh + y) * ow + xx;
                  int col = (ci * h + y * c->stride_h + ky) * w +
                            xx * c->stride_w + kx;
                  mat[static_cast<size_t>(row) * cols + col] = c->weights
                      [((o * ch + ci) * c->kernel_h + ky) * c->kernel_w + kx];
                }
      std::vector<double> y(rows);
      for (int r = 0; r < rows; ++r) {
        y[r] = c->bias[r / (oh * ow)];
        for (int k = 0; k < cols; ++k) y[r] += mat[static_cast<size_t>(r) * cols + k] * x[k];
      }
      x = y;
      ch = c->out_channels;
      h = oh;
      w = ow;
    } else {
      const auto& a = std::get<ActivationLayer>(layer).coefficients;
      for (double& v : x) {
        double acc = 0;
        for (size_t k = 0; k < a.size(); ++k) acc += a[k] * std::pow(v, k);
        v = acc;
      }
    }
  }
  return x;
}

// Random model with at most three layers and widths <= 16.
ModelSpec RandomSmallModel(std::mt19937_64& rng) {
  const std::vector<std::vector<double>> activations = {
      {0, 0, 1}, {0.5, 0.197, 0, -0.004}, {0.1, 1.0, 0.5}, {0, -0.7}};
  int width = 2 + static_cast<int>(rng() % 15);
  int layers = 1 + static_cast<int>(rng() % 3);
  std::vector<Layer> out;
  int depth = 0;
  int cur = width;
  for (int i = 0; i < layers; ++i) {
    bool act = i > 0 && rng() % 2 == 0 &&
               !std::holds_alternative<ActivationLayer>(out.back());
    if (act) {
      auto a = activations[rng() % activations.size()];
      ActivationLayer layer{a};
      if (depth + LayerDepth(layer) > 3) continue;
      depth += LayerDepth(layer);
      out.push_back(layer);
    } else {
      int rows = 1 + static_cast<int>(rng() % 16);
      out.push_back(RandomDense(rows, cur, rng));
      cur = rows;
      depth += 1;
    }
  }
  return Sequential(1, width, std::move(out));
}

// Single-key CKKS environment with lazily generated rotation keys.
class KeyEnv {
 public:
  explicit KeyEnv(const char* preset)
      : ctx_(PresetContext(preset)),
        prng_(ring::Prng::SystemSeed()),
        sk_(ckks::GenerateSecretKey(ctx_, prng_)),
        pk_(ckks::GeneratePublicKey(sk_, prng_)),
        encoder_(ctx_) {
    keys_.relin = ckks::GenerateRelinKey(sk_, prng_);
  }

  const ring::RingContextPtr& ctx() const { return ctx_; }
  const ckks::PublicKey& pk() const { return pk_; }
  ring::Prng& prng() { return prng_; }
  const ckks::EvalKeySet& keys() const { return keys_; }
  ckks::EvalKeySet& mutable_keys() { return keys_; }

  void EnsureRotations(const std::vector<int>& rotations) {
    for (int k : rotations) {
      if (keys_.FindRotation(k) == nullptr) {
        keys_.rotations[k] = ckks::GenerateRotationKey(sk_, k, prng_);
      }
    }
  }
  ckks::Ciphertext Encrypt(const std::vector<double>& slots) {
    return *ckks::Encrypt(
        pk_, *encoder_.Encode(slots, ctx_->max_level(), ctx_->params().scale()),
        prng_);
  }
  std::vector<double> Decrypt(const ckks::Ciphertext& ct) {
    return encoder_.Decode(ckks::Decrypt(sk_, ct));
  }

 private:
  ring::RingContextPtr ctx_;
  ring::Prng prng_;
  ckks::SecretKey sk_;
  ckks::PublicKey pk_;
  ckks::Encoder encoder_;
  ckks::EvalKeySet keys_;
};

std::vector<double> PackVector(const CompiledModel& cm,
                               const std::vector<double>& x, int h, int w) {
  vpack::Matrix m(h, w);
  m.data = x;
  return vpack::Vpack(m, *vpack::MakePartition(h, w, {0}), 0, cm.layout)
      ->slots;
}

// Encrypted inference on normalized input; returns the decoded outputs.
std::vector<double> RunEncrypted(KeyEnv& env, const ModelSpec& m,
                                 const std::vector<double>& x,
                                 bool encrypt_weights = false,
                                 CompiledModel* compiled = nullptr) {
  auto layout = *vpack::LayoutForModel(m, env.ctx()->params());
  auto cm = Compile(m, layout, env.ctx());
  EXPECT_TRUE(cm.ok()) << cm.status();
  if (encrypt_weights) EXPECT_TRUE(EncryptModel(*cm, env.pk(), env.prng()).ok());
  env.EnsureRotations(cm->rotations);
  auto ct = env.Encrypt(PackVector(*cm, x, m.input_height, m.input_width));
  auto out = Infer(ct, *cm, env.keys());
  EXPECT_TRUE(out.ok()) << out.status();
  if (!out.ok()) return {};
  EXPECT_EQ(out->level(), cm->output_level);
  EXPECT_EQ(out->level(), env.ctx()->max_level() - cm->depth);
  auto result = ExtractOutput(*cm, env.Decrypt(*out));
  if (compiled != nullptr) *compiled = std::move(*cm);
  return result;
}

// ---------------------------------------------------------------- model --

TEST(ModelTest, CnnShapedModelHas1198Parameters) {
  std::mt19937_64 rng(1);
  ModelSpec m = CnnShaped(rng);
  ASSERT_TRUE(ValidateModel(m, 4).ok());
  EXPECT_EQ(ParameterCount(m), 1198u);
  EXPECT_EQ(ModelDepth(m), 4);
  auto shapes = *LayerShapes(m);
  EXPECT_EQ(shapes[0], (TensorShape{3, 8, 8}));
  EXPECT_EQ(shapes[2], (TensorShape{6, 4, 4}));
  EXPECT_EQ(shapes[3], (TensorShape{1, 1, 10}));
}

TEST(ModelTest, JsonRoundTrip) {
  std::mt19937_64 rng(2);
  ModelSpec m = CnnShaped(rng);
  m.normalization.scale.assign(784, 2.0);
  m.normalization.shift.assign(784, -1.0);
  auto parsed = ParseModelJson(ModelToJson(m), 4);
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  EXPECT_EQ(ParameterCount(*parsed), 1198u);
  std::vector<double> x = RandomVector(784, rng, 0, 1);
  EXPECT_EQ(*InferClear(*parsed, x), *InferClear(m, x));

  auto stripped = ParseModelJson(ModelToJson(m, false));
  ASSERT_TRUE(stripped.ok());
  EXPECT_FALSE(stripped->has_weights);
  EXPECT_EQ(ParameterCount(*stripped), 1198u);
  EXPECT_FALSE(InferClear(*stripped, x).ok());
}

TEST(ModelTest, ScalarNormalizationExpands) {
  auto m = ParseModelJson(R"({"inputShape":[1,3],
      "normalization":{"scale":0.5,"shift":-1},
      "layers":[{"type":"dense","rows":1,"cols":3,
                 "weights":[1,1,1],"bias":[0]}]})");
  ASSERT_TRUE(m.ok()) << m.status();
  std::vector<double> x = {2, 4, 6};
  EXPECT_EQ((*InferClear(*m, x))[0], 0.0 + 1.0 + 2.0);
}

TEST(ModelTest, IdentityModelLoadsAndIsIdentity) {
  auto m = ParseModelJson(ModelToJson(IdentityModel(4)));
  ASSERT_TRUE(m.ok());
  std::vector<double> x = {0.5, -0.25, 1, 0};
  EXPECT_EQ(*InferClear(*m, x), x);
}

TEST(ModelTest, DepthOverflowAtTwentyLayers) {
  std::vector<Layer> layers;
  for (int i = 0; i < 20; ++i) layers.push_back(IdentityModel(4).layers[0]);
  ModelSpec m = Sequential(1, 4, layers);
  auto s = ParseModelJson(ModelToJson(m), 4);
  EXPECT_EQ(GetErrorKind(s.status()), ErrorKind::kDepthOverflow);
  EXPECT_NE(s.status().message().find("layer 4"), absl::string_view::npos);
  EXPECT_TRUE(ParseModelJson(ModelToJson(m)).ok());
}

TEST(ModelTest, ShapeMismatchNamesLayer) {
  std::mt19937_64 rng(3);
  ModelSpec m = Sequential(1, 4, {RandomDense(3, 4, rng), RandomDense(2, 5, rng)});
  auto s = ParseModelJson(ModelToJson(m));
  EXPECT_EQ(GetErrorKind(s.status()), ErrorKind::kLoad);
  EXPECT_NE(s.status().message().find("layer 1"), absl::string_view::npos);

  auto bad_weights = ParseModelJson(R"({"inputShape":[1,2],"layers":[
      {"type":"dense","rows":1,"cols":2,"weights":[1],"bias":[0]}]})");
  EXPECT_EQ(GetErrorKind(bad_weights.status()), ErrorKind::kLoad);
  EXPECT_NE(bad_weights.status().message().find("layer 0"),
            absl::string_view::npos);
  auto bad_type = ParseModelJson(R"({"inputShape":[1,2],"layers":[
      {"type":"pool"}]})");
  EXPECT_EQ(GetErrorKind(bad_type.status()), ErrorKind::kLoad);
  EXPECT_EQ(GetErrorKind(ParseModelJson("{").status()), ErrorKind::kLoad);
  EXPECT_EQ(GetErrorKind(LoadModel("/nonexistent.json").status()),
            ErrorKind::kIo);
}

TEST(ModelTest, ZeroWeightsYieldBias) {
  DenseLayer d{3, 4, std::vector<double>(12, 0.0), {0.25, -1, 3}};
  ModelSpec m = Sequential(1, 4, {d});
  std::vector<double> x = {1, 2, 3, 4};
  EXPECT_EQ(*InferClear(m, x), d.bias);
  EXPECT_EQ(GetErrorKind(InferClear(m, std::vector<double>(3)).status()),
            ErrorKind::kShape);
}

TEST(ModelTest, InferClearMatchesNaiveOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    ModelSpec m = (trial % 4 == 0) ? CnnShaped(rng) : RandomSmallModel(rng);
    m.normalization.scale = RandomVector(m.feature_count(), rng, 0.5, 2);
    m.normalization.shift = RandomVector(m.feature_count(), rng, -1, 1);
    ASSERT_TRUE(ValidateModel(m).ok());
    std::vector<double> x = RandomVector(m.feature_count(), rng);
    auto got = *InferClear(m, x);
    auto want = NaiveInfer(m, x);
    ASSERT_EQ(got.size(), want.size());
    EXPECT_LT(MaxAbsDiff(got, want), 1e-12) << "trial " << trial;
    // Fixed summation order: bit-reproducible.
    EXPECT_EQ(got, *InferClear(m, x));
  }
}

// ------------------------------------------------------------- compiler --

TEST(CompilerTest, PointwiseConvIsScaledIdentity) {
  Conv2dLayer c{1, 1, 1, 1, 1, 1, {2.5}, {0}};
  ModelSpec m = Sequential(3, 4, {c});
  auto params = *ring::Preset("tiny");  // 8 slots
  ModelSpec small = Sequential(2, 4, {c});
  auto layout = *vpack::LayoutForModel(small, params);
  auto cm = CompileStructure(small, layout, params);
  ASSERT_TRUE(cm.ok()) << cm.status();
  const auto& st = std::get<LinearStage>(cm->stages[0]);
  ASSERT_EQ(st.offsets, std::vector<int>{0});
  EXPECT_TRUE(cm->rotations.empty());
  // With weights, the only diagonal is 2.5 on the 8 occupied slots.
  auto params16 = *ring::Preset("small");
  auto layout16 = *vpack::LayoutForModel(m, params16);
  auto full = CompileStructure(m, layout16, params16);
  ASSERT_TRUE(full.ok());
  const auto& fs = std::get<LinearStage>(full->stages[0]);
  ASSERT_EQ(fs.diagonals.size(), 1u);
  for (size_t j = 0; j < fs.diagonals[0].size(); ++j) {
    EXPECT_EQ(fs.diagonals[0][j], j % layout16.period < 12 ? 2.5 : 0.0) << j;
  }
}

TEST(CompilerTest, CompiledClearEvaluationIsExact) {
  std::mt19937_64 rng(5);
  auto params = *ring::Preset("small");
  for (int trial = 0; trial < 20; ++trial) {
    DenseLayer d{3, 4, {}, {}};
    for (int i = 0; i < 12; ++i) d.weights.push_back(static_cast<int>(rng() % 9) - 4);
    for (int i = 0; i < 3; ++i) d.bias.push_back(static_cast<int>(rng() % 5) - 2);
    ModelSpec m = Sequential(1, 4, {d});
    auto layout = *vpack::LayoutForModel(m, params);
    auto cm = *CompileStructure(m, layout, params);
    std::vector<double> x;
    for (int i = 0; i < 4; ++i) x.push_back(static_cast<int>(rng() % 11) - 5);
    auto slots = *EvaluateCompiledClear(cm, PackVector(cm, x, 1, 4));
    std::vector<double> want(3);
    for (int r = 0; r < 3; ++r) {
      want[r] = d.bias[r];
      for (int c = 0; c < 4; ++c) want[r] += d.weights[r * 4 + c] * x[c];
    }
    EXPECT_EQ(ExtractOutput(cm, slots), want);
  }
}

TEST(CompilerTest, CompiledClearMatchesInferClearForCnn) {
  std::mt19937_64 rng(6);
  ModelSpec m = CnnShaped(rng);
  auto params = *ring::Preset("paper8192");
  auto layout = *vpack::LayoutForModel(m, params);
  auto cm = *CompileStructure(m, layout, params);
  std::vector<double> x = RandomVector(784, rng, 0, 1);
  auto slots = *EvaluateCompiledClear(cm, PackVector(cm, x, 28, 28));
  EXPECT_LT(MaxAbsDiff(ExtractOutput(cm, slots), *InferClear(m, x)), 1e-12);
}

TEST(CompilerTest, CnnManifestWithinSixtyFourKeys) {
  std::mt19937_64 rng(7);
  ModelSpec m = CnnShaped(rng);
  auto params = *ring::Preset("paper8192");
  auto layout = *vpack::LayoutForModel(m, params);
  auto rotations = *RotationManifest(m, layout, params);
  EXPECT_LE(rotations.size(), 64u);
  EXPECT_EQ(rotations.size(), 41u);
  EXPECT_TRUE(std::is_sorted(rotations.begin(), rotations.end()));
  // The manifest depends on structure only.
  EXPECT_EQ(rotations, *RotationManifest(StripWeights(m), layout, params));
  auto cm = *CompileStructure(m, layout, params);
  EXPECT_EQ(cm.depth, 4);
  EXPECT_EQ(cm.level_trace, (std::vector<int>{3, 2, 1, 0}));
  EXPECT_EQ(cm.output_positions.size(), 10u);
}

TEST(CompilerTest, CapacityAndDepthErrors) {
  auto params = *ring::Preset("tiny");
  std::mt19937_64 rng(8);
  ModelSpec wide = Sequential(1, 4, {RandomDense(9, 4, rng)});
  vpack::PackLayout layout = *vpack::LayoutForWidth(4, 8);
  EXPECT_EQ(GetErrorKind(CompileStructure(wide, layout, params).status()),
            ErrorKind::kCapacity);
  ModelSpec deep = Sequential(1, 4, {RandomDense(4, 4, rng), RandomDense(4, 4, rng)});
  EXPECT_EQ(GetErrorKind(CompileStructure(deep, layout, params).status()),
            ErrorKind::kDepthOverflow);
}

// ------------------------------------------------------------ encrypted --

class EncryptedTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { env_ = new KeyEnv("small"); }
  static void TearDownTestSuite() { delete env_; }
  KeyEnv& env() { return *env_; }
  static KeyEnv* env_;
};
KeyEnv* EncryptedTest::env_ = nullptr;

TEST_F(EncryptedTest, IdentityDenseReturnsInput) {
  std::vector<double> x = {0.5, -0.25, 1, 0, 0.125, -1, 0.75, 0.3};
  auto got = RunEncrypted(env(), IdentityModel(8), x);
  EXPECT_LT(MaxAbsDiff(got, x), 0x1p-20);
}

TEST_F(EncryptedTest, SquareActivation) {
  auto ct = env().Encrypt({0, 1, -1, 0.5});
  auto out = ActivationForward(ct, std::vector<double>{0, 0, 1}, env().keys());
  ASSERT_TRUE(out.ok()) << out.status();
  EXPECT_EQ(out->level(), ct.level() - 1);
  auto got = env().Decrypt(*out);
  EXPECT_LT(MaxAbsDiff({got.data(), 4}, std::vector<double>{0, 1, 1, 0.25}),
            0x1p-15);
}

TEST_F(EncryptedTest, ActivationDegreesAndDepth) {
  std::mt19937_64 rng(9);
  std::vector<double> x = RandomVector(1024, rng, -4, 4);
  auto ct = env().Encrypt(x);
  const std::vector<std::vector<double>> polys = {
      {0.3, -0.7}, {0.1, 0.5, -2}, {0.5, 0.197, 0, -0.004}, {1, -1, 0.5, 0.25},
      {0.2, 0}};
  for (const auto& p : polys) {
    auto out = ActivationForward(ct, p, env().keys());
    ASSERT_TRUE(out.ok()) << out.status();
    int depth = LayerDepth(ActivationLayer{p});
    EXPECT_EQ(out->level(), ct.level() - depth);
    auto got = env().Decrypt(*out);
    double err = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      double want = 0;
      for (size_t k = 0; k < p.size(); ++k) want += p[k] * std::pow(x[i], k);
      err = std::max(err, std::fabs(got[i] - want));
    }
    EXPECT_LT(err, 0x1p-15) << p.size();
  }
}

TEST_F(EncryptedTest, RandomDenseMatchesClear) {
  std::mt19937_64 rng(10);
  ModelSpec m = Sequential(1, 8, {RandomDense(8, 8, rng)});
  std::vector<double> x = RandomVector(8, rng);
  EXPECT_LT(MaxAbsDiff(RunEncrypted(env(), m, x), *InferClear(m, x)), 0x1p-15);
}

TEST_F(EncryptedTest, ToyMlpMatchesClear) {
  std::mt19937_64 rng(11);
  ModelSpec m = Sequential(1, 4, {RandomDense(3, 4, rng), ActivationLayer{{0, 0, 1}},
                                  RandomDense(2, 3, rng)});
  for (int t = 0; t < 5; ++t) {
    std::vector<double> x = RandomVector(4, rng);
    EXPECT_LT(MaxAbsDiff(RunEncrypted(env(), m, x), *InferClear(m, x)), 1e-3);
  }
}

TEST_F(EncryptedTest, RandomSmallModelsMatchClear) {
  std::mt19937_64 rng(12);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ModelSpec m = RandomSmallModel(rng);
    std::vector<double> x = RandomVector(m.feature_count(), rng);
    auto got = RunEncrypted(env(), m, x);
    auto want = *InferClear(m, x);
    ASSERT_EQ(got.size(), want.size());
    worst = std::max(worst, MaxAbsDiff(got, want));
  }
  EXPECT_LT(worst, 1e-3);
}

TEST_F(EncryptedTest, CiphertextWeightsMatchPlaintextWeights) {
  std::mt19937_64 rng(13);
  ModelSpec m = Sequential(1, 8, {RandomDense(6, 8, rng), ActivationLayer{{0, 0, 1}},
                                  RandomDense(4, 6, rng)});
  std::vector<double> x = RandomVector(8, rng);
  CompiledModel plain, cipher;
  auto a = RunEncrypted(env(), m, x, false, &plain);
  auto b = RunEncrypted(env(), m, x, true, &cipher);
  EXPECT_EQ(cipher.mode, WeightMode::kCiphertext);
  EXPECT_LT(MaxAbsDiff(a, b), 0x1p-15);
  EXPECT_EQ(plain.level_trace, cipher.level_trace);
  EXPECT_EQ(plain.level_trace, (std::vector<int>{3, 2, 1}));
  // Weights are no longer present in the clear.
  for (const Stage& s : cipher.stages) {
    if (const auto* st = std::get_if<LinearStage>(&s)) {
      EXPECT_TRUE(st->diagonals.empty());
      EXPECT_TRUE(st->plain_diagonals.empty());
      EXPECT_EQ(st->cipher_diagonals.size(), st->offsets.size());
    }
  }
}

TEST_F(EncryptedTest, ReencryptionChangesBytesNotBehavior) {
  std::mt19937_64 rng(14);
  ModelSpec m = IdentityModel(4);
  auto layout = *vpack::LayoutForModel(m, env().ctx()->params());
  auto c1 = *Compile(m, layout, env().ctx());
  auto c2 = *Compile(m, layout, env().ctx());
  ASSERT_TRUE(EncryptModel(c1, env().pk(), env().prng()).ok());
  ASSERT_TRUE(EncryptModel(c2, env().pk(), env().prng()).ok());
  auto b1 = SerializeEncryptedWeights(c1);
  auto b2 = SerializeEncryptedWeights(c2);
  EXPECT_EQ(b1.size(), b2.size());
  EXPECT_NE(b1, b2);
  // Sidecar round trip into a fresh plaintext compilation.
  auto c3 = *Compile(m, layout, env().ctx());
  ASSERT_TRUE(LoadEncryptedWeights(c3, b1).ok());
  std::vector<double> x = {0.5, -0.5, 0.25, 1};
  env().EnsureRotations(c1.rotations);
  auto ct = env().Encrypt(PackVector(c1, x, 1, 4));
  for (const CompiledModel* cm : {&c1, &c2, &c3}) {
    auto out = *Infer(ct, *cm, env().keys());
    EXPECT_LT(MaxAbsDiff(ExtractOutput(*cm, env().Decrypt(out)), x), 0x1p-15);
  }
  // Truncated sidecar is rejected.
  std::vector<uint8_t> cut(b1.begin(), b1.end() - 1);
  auto c4 = *Compile(m, layout, env().ctx());
  EXPECT_EQ(GetErrorKind(LoadEncryptedWeights(c4, cut)), ErrorKind::kFraming);
}

TEST_F(EncryptedTest, MissingRotationKeyAndWrongLevel) {
  std::mt19937_64 rng(15);
  ModelSpec m = Sequential(1, 8, {RandomDense(8, 8, rng)});
  auto layout = *vpack::LayoutForModel(m, env().ctx()->params());
  auto cm = *Compile(m, layout, env().ctx());
  env().EnsureRotations(cm.rotations);
  auto ct = env().Encrypt(PackVector(cm, RandomVector(8, rng), 1, 8));
  ckks::EvalKeySet partial = env().keys();
  partial.rotations.erase(cm.rotations.back());
  auto s = Infer(ct, cm, partial);
  EXPECT_EQ(GetErrorKind(s.status()), ErrorKind::kKeyNotFound);
  ckks::Evaluator eval;
  auto low = *eval.DropToLevel(ct, 2);
  EXPECT_EQ(GetErrorKind(Infer(low, cm, env().keys()).status()),
            ErrorKind::kLevel);
  auto zero = *eval.DropToLevel(ct, 0);
  const auto& st = std::get<LinearStage>(cm.stages[0]);
  EXPECT_EQ(GetErrorKind(DenseForward(zero, st, env().keys()).status()),
            ErrorKind::kDepthExhausted);
  EXPECT_EQ(GetErrorKind(
                ActivationForward(zero, std::vector<double>{0, 0, 1}, env().keys())
                    .status()),
            ErrorKind::kDepthExhausted);
}

TEST(CnnEncryptedTest, ShippedCnnMatchesClear) {
  KeyEnv env("paper8192");
  std::mt19937_64 rng(16);
  ModelSpec m = CnnShaped(rng);
  std::vector<double> x = RandomVector(784, rng, 0, 1);
  CompiledModel cm;
  auto got = RunEncrypted(env, m, x, false, &cm);
  EXPECT_LT(MaxAbsDiff(got, *InferClear(m, x)), 1e-2);
  EXPECT_EQ(cm.depth, 4);
}

}  // namespace
}  // namespace vfi::einfer
