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
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "vfi/ckks/ciphertext.h"
#include "vfi/ckks/encoder.h"
#include "vfi/ckks/encryptor.h"
#include "vfi/ckks/evaluator.h"
#include "vfi/ckks/keys.h"
#include "vfi/ckks/serialization.h"
#include "vfi/common/status.h"
#include "vfi/ring/params.h"
#include "vfi/ring/ring_context.h"

namespace vfi::ckks {
namespace {

using ring::Prng;
using ring::RingContextPtr;
using ring::Seed;

RingContextPtr Context(const char* preset) {
  return *ring::RingContext::Create(*ring::Preset(preset));
}

std::vector<double> RandomVector(size_t n, std::mt19937_64& rng,
                                 double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double MaxAbsDiff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

TEST(EncoderTest, ZeroVectorEncodesToZeroPolynomial) {
  auto ctx = Context("small");
  Encoder enc(ctx);
  auto pt = enc.Encode(std::vector<double>(enc.slots(), 0.0), 4, 0x1p40);
  ASSERT_TRUE(pt.ok());
  EXPECT_EQ(pt->poly, ring::RnsPoly(ctx, 4, ring::PolyForm::kNtt));
  for (double x : enc.Decode(*pt)) EXPECT_EQ(x, 0.0);
}

TEST(EncoderTest, OnesEncodeToRoundedScaleConstant) {
  auto ctx = Context("small");
  Encoder enc(ctx);
  const double scale = 0x1p40;
  auto pt = enc.Encode(std::vector<double>(enc.slots(), 1.0), 2, scale);
  ASSERT_TRUE(pt.ok());
  const auto coeffs = enc.CenteredCoefficients(pt->poly);
  EXPECT_EQ(coeffs[0], std::roundl(scale));
  for (size_t i = 1; i < coeffs.size(); ++i) ASSERT_EQ(coeffs[i], 0.0L) << i;
}

TEST(EncoderTest, RoundTripPrecisionAtScale40) {
  auto ctx = Context("paper8192");
  Encoder enc(ctx);
  std::mt19937_64 rng(11);
  const auto v = RandomVector(enc.slots(), rng);
  auto pt = enc.Encode(v, ctx->max_level(), 0x1p40);
  ASSERT_TRUE(pt.ok());
  EXPECT_LT(MaxAbsDiff(enc.Decode(*pt), v), 0x1p-30);
}

TEST(EncoderTest, SlotsAreEvaluationsAtPowersOfFive) {
  // Direct O(N^2) evaluation of the encoded polynomial.
  auto ctx = Context("tiny");
  Encoder enc(ctx);
  const size_t n = ctx->n();
  std::mt19937_64 rng(5);
  const auto v = RandomVector(enc.slots(), rng);
  const double scale = 0x1p20;
  auto pt = enc.Encode(v, 1, scale);
  ASSERT_TRUE(pt.ok());
  const auto coeffs = enc.CenteredCoefficients(pt->poly);
  size_t g = 1;
  for (size_t j = 0; j < enc.slots(); ++j) {
    std::complex<double> acc = 0;
    for (size_t i = 0; i < n; ++i) {
      const double angle = std::numbers::pi * static_cast<double>(g * i) /
                           static_cast<double>(n);
      acc += static_cast<double>(coeffs[i]) *
             std::complex<double>(std::cos(angle), std::sin(angle));
    }
    EXPECT_NEAR(acc.real() / scale, v[j], 1e-5) << j;
    EXPECT_NEAR(acc.imag() / scale, 0.0, 1e-5) << j;
    g = g * 5 % (2 * n);
  }
}

TEST(EncoderTest, CapacityAndScaleBookkeeping) {
  auto ctx = Context("tiny");
  Encoder enc(ctx);
  EXPECT_EQ(GetErrorKind(
                enc.Encode(std::vector<double>(enc.slots() + 1), 1, 16).status()),
            ErrorKind::kCapacity);
  const std::vector<double> v = {0.25, -0.5, 0.75};
  auto a = enc.Encode(v, 1, 0x1p20);
  auto b = enc.Encode(v, 1, 0x1p21);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(b->scale, 2 * a->scale);
  EXPECT_NEAR(enc.Decode(*b)[1], -0.5, 1e-5);
}

// Shared single-key material at the N = 8192 preset.
class CkksTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ctx_ = new RingContextPtr(Context("paper8192"));
    Prng prng(Seed{42});
    sk_ = new SecretKey(GenerateSecretKey(*ctx_, prng));
    pk_ = new PublicKey(GeneratePublicKey(*sk_, prng));
    keys_ = new EvalKeySet();
    keys_->relin = GenerateRelinKey(*sk_, prng);
    for (int k : {1, 3, -3, 5}) {
      EvalKey key = GenerateRotationKey(*sk_, k, prng);
      keys_->rotations.emplace(key.rotation, std::move(key));
    }
  }
  static void TearDownTestSuite() {
    delete keys_;
    delete pk_;
    delete sk_;
    delete ctx_;
  }

  const RingContextPtr& ctx() const { return *ctx_; }
  double scale() const { return ctx()->params().scale(); }
  int top() const { return ctx()->max_level(); }

  Ciphertext Enc(const std::vector<double>& v) {
    Encoder enc(ctx());
    auto ct = Encrypt(*pk_, *enc.Encode(v, top(), scale()), prng_);
    EXPECT_TRUE(ct.ok()) << ct.status();
    return *ct;
  }
  std::vector<double> Dec(const Ciphertext& ct) {
    return Encoder(ctx()).Decode(Decrypt(*sk_, ct));
  }

  static RingContextPtr* ctx_;
  static SecretKey* sk_;
  static PublicKey* pk_;
  static EvalKeySet* keys_;
  Prng prng_{Seed{7}};
  std::mt19937_64 rng_{99};
  Evaluator eval_;
};

RingContextPtr* CkksTest::ctx_ = nullptr;
SecretKey* CkksTest::sk_ = nullptr;
PublicKey* CkksTest::pk_ = nullptr;
EvalKeySet* CkksTest::keys_ = nullptr;

TEST_F(CkksTest, EncryptDecryptRoundTrip) {
  const auto v = RandomVector(4096, rng_);
  const Ciphertext ct = Enc(v);
  EXPECT_EQ(ct.level(), top());
  EXPECT_EQ(ct.slots(), 4096u);
  EXPECT_LT(MaxAbsDiff(Dec(ct), v), 0x1p-25);
}

TEST_F(CkksTest, EncryptionIsRandomized) {
  const auto v = RandomVector(16, rng_);
  EXPECT_FALSE(Enc(v).c0 == Enc(v).c0);
}

TEST_F(CkksTest, EncryptRequiresTopLevel) {
  Encoder enc(ctx());
  auto pt = enc.Encode(std::vector<double>{1.0}, top() - 1, scale());
  ASSERT_TRUE(pt.ok());
  EXPECT_EQ(GetErrorKind(Encrypt(*pk_, *pt, prng_).status()),
            ErrorKind::kLevel);
}

TEST_F(CkksTest, AddMatchesPlaintext) {
  const auto u = RandomVector(4096, rng_), v = RandomVector(4096, rng_);
  auto sum = eval_.Add(Enc(u), Enc(v));
  ASSERT_TRUE(sum.ok());
  std::vector<double> want(4096);
  for (size_t i = 0; i < 4096; ++i) want[i] = u[i] + v[i];
  EXPECT_LT(MaxAbsDiff(Dec(*sum), want), 0x1p-24);
  std::vector<double> neg(u.size());
  for (size_t i = 0; i < u.size(); ++i) neg[i] = -u[i];
  EXPECT_LT(MaxAbsDiff(Dec(*eval_.Add(Enc(u), Enc(neg))),
                       std::vector<double>(4096, 0.0)),
            0x1p-24);
  EXPECT_LT(MaxAbsDiff(Dec(*eval_.Add(Enc(u), Enc({}))), u), 0x1p-24);
}

TEST_F(CkksTest, MulRelinearizesAndRescales) {
  const auto u = RandomVector(4096, rng_), v = RandomVector(4096, rng_);
  const Ciphertext a = Enc(u), b = Enc(v);
  auto prod = eval_.Mul(a, b, *keys_->relin);
  ASSERT_TRUE(prod.ok()) << prod.status();
  EXPECT_EQ(prod->level(), top() - 1);
  const double q = static_cast<double>(ctx()->modulus(top()).value());
  EXPECT_EQ(prod->scale, a.scale * b.scale / q);
  std::vector<double> want(4096);
  for (size_t i = 0; i < 4096; ++i) want[i] = u[i] * v[i];
  EXPECT_LT(MaxAbsDiff(Dec(*prod), want), 0x1p-20);
  auto by_one = eval_.Mul(a, Enc(std::vector<double>(4096, 1.0)), *keys_->relin);
  ASSERT_TRUE(by_one.ok());
  EXPECT_LT(MaxAbsDiff(Dec(*by_one), u), 0x1p-20);
}

TEST_F(CkksTest, DepthLedgerIsEnforced) {
  Ciphertext ct = Enc(std::vector<double>(8, 0.9));
  for (int d = 1; d <= top(); ++d) {
    auto next = eval_.Mul(ct, ct, *keys_->relin);
    ASSERT_TRUE(next.ok()) << next.status();
    ct = *next;
    EXPECT_EQ(ct.level(), top() - d);
  }
  EXPECT_NEAR(Dec(ct)[0], std::pow(0.9, 16), 1e-4);
  EXPECT_EQ(GetErrorKind(eval_.Mul(ct, ct, *keys_->relin).status()),
            ErrorKind::kDepthExhausted);
  EXPECT_EQ(GetErrorKind(eval_.Rescale(ct).status()),
            ErrorKind::kDepthExhausted);
  EXPECT_EQ(GetErrorKind(eval_.MulConst(ct, 2.0).status()),
            ErrorKind::kDepthExhausted);
}

TEST_F(CkksTest, MulPlainMatchesPlaintext) {
  const auto u = RandomVector(4096, rng_), v = RandomVector(4096, rng_);
  Encoder enc(ctx());
  auto prod = eval_.MulPlain(Enc(u), *enc.Encode(v, top(), scale()));
  ASSERT_TRUE(prod.ok());
  EXPECT_EQ(prod->level(), top() - 1);
  std::vector<double> want(4096);
  for (size_t i = 0; i < 4096; ++i) want[i] = u[i] * v[i];
  EXPECT_LT(MaxAbsDiff(Dec(*prod), want), 0x1p-20);
}

TEST_F(CkksTest, ConstantsKeepScale) {
  const auto u = RandomVector(64, rng_);
  const Ciphertext a = Enc(u);
  auto m = eval_.MulConst(a, -2.5);
  auto s = eval_.AddConst(a, 0.125);
  ASSERT_TRUE(m.ok() && s.ok());
  EXPECT_EQ(m->scale, a.scale);
  EXPECT_EQ(m->level(), top() - 1);
  const auto dm = Dec(*m), ds = Dec(*s);
  for (size_t i = 0; i < u.size(); ++i) {
    EXPECT_NEAR(dm[i], -2.5 * u[i], 1e-6);
    EXPECT_NEAR(ds[i], u[i] + 0.125, 1e-6);
  }
}

TEST_F(CkksTest, RotationConventionIsLeft) {
  std::vector<double> e0(4096, 0.0);
  e0[0] = 1.0;
  auto r = eval_.Rotate(Enc(e0), 3, *keys_);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->level(), top());
  const auto d = Dec(*r);
  for (size_t j = 0; j < d.size(); ++j) {
    ASSERT_NEAR(d[j], j == 4096 - 3 ? 1.0 : 0.0, 1e-6) << j;
  }
}

TEST_F(CkksTest, RotationInversesAndIdentity) {
  const auto u = RandomVector(4096, rng_);
  const Ciphertext a = Enc(u);
  auto id = eval_.Rotate(a, 0, *keys_);
  ASSERT_TRUE(id.ok());
  EXPECT_EQ(id->c0, a.c0);
  auto there = eval_.Rotate(a, 3, *keys_);
  ASSERT_TRUE(there.ok());
  auto back = eval_.Rotate(*there, -3, *keys_);
  ASSERT_TRUE(back.ok());
  EXPECT_LT(MaxAbsDiff(Dec(*back), u), 0x1p-20);
  auto five = eval_.Rotate(a, 5, *keys_);
  const auto d5 = Dec(*five);
  for (size_t j = 0; j < 4096; ++j) ASSERT_NEAR(d5[j], u[(j + 5) % 4096], 1e-6);
}

TEST_F(CkksTest, HoistedRotationsMatchIndividualOnes) {
  const auto u = RandomVector(4096, rng_);
  const Ciphertext a = Enc(u);
  const int ks[] = {1, 0, 3, 5};
  auto many = eval_.RotateHoisted(a, ks, *keys_);
  ASSERT_TRUE(many.ok());
  for (size_t i = 0; i < 4; ++i) {
    const auto d = Dec((*many)[i]);
    for (size_t j = 0; j < 4096; j += 97) {
      ASSERT_NEAR(d[j], u[(j + ks[i]) % 4096], 1e-6);
    }
  }
}

TEST_F(CkksTest, MissingRotationKeyIsReported) {
  EXPECT_EQ(GetErrorKind(eval_.Rotate(Enc({1.0}), 2, *keys_).status()),
            ErrorKind::kKeyNotFound);
}

TEST_F(CkksTest, ScaleAlignmentPolicy) {
  const auto u = RandomVector(64, rng_), v = RandomVector(64, rng_);
  Ciphertext a = Enc(u), b = Enc(v);
  b.scale *= 1 + 0x1p-20;  // Message now reads v / (1 + 2^-20).
  auto sum = eval_.Add(a, b);
  ASSERT_TRUE(sum.ok()) << sum.status();
  EXPECT_EQ(sum->level(), top() - 1);
  EXPECT_EQ(sum->scale, a.scale);
  const auto d = Dec(*sum);
  for (size_t i = 0; i < 64; ++i) {
    EXPECT_NEAR(d[i], u[i] + v[i] / (1 + 0x1p-20), 1e-7);
  }
  b.scale = a.scale * (1 + 0x1p-5);
  EXPECT_EQ(GetErrorKind(eval_.Add(a, b).status()), ErrorKind::kAlignment);
  auto low = eval_.DropToLevel(a, 1);
  ASSERT_TRUE(low.ok());
  EXPECT_EQ(GetErrorKind(eval_.Add(a, *low).status()), ErrorKind::kAlignment);
  EXPECT_EQ(GetErrorKind(eval_.DropToLevel(*low, 2).status()),
            ErrorKind::kLevel);
}

TEST_F(CkksTest, SerializationRoundTripsAndRejectsDamage) {
  const Ciphertext ct = Enc(RandomVector(32, rng_));
  const Bytes bytes = SerializeCiphertext(ct);
  EXPECT_EQ(bytes.size(), SerializedCiphertextSize(ctx()->n(), ct.level()));
  auto back = DeserializeCiphertext(bytes, ctx());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->c0, ct.c0);
  EXPECT_EQ(back->c1, ct.c1);
  EXPECT_EQ(back->scale, ct.scale);
  EXPECT_EQ(SerializeCiphertext(*back), bytes);

  Bytes truncated(bytes.begin(), bytes.end() - 9);
  EXPECT_EQ(GetErrorKind(DeserializeCiphertext(truncated, ctx()).status()),
            ErrorKind::kFraming);
  Bytes unreduced = bytes;
  for (int i = 0; i < 8; ++i) unreduced[20 + i] = 0xff;
  EXPECT_EQ(GetErrorKind(DeserializeCiphertext(unreduced, ctx()).status()),
            ErrorKind::kStructural);
  Bytes trailing = bytes;
  trailing.push_back(0);
  EXPECT_EQ(GetErrorKind(DeserializeCiphertext(trailing, ctx()).status()),
            ErrorKind::kFraming);
  EXPECT_EQ(GetErrorKind(DeserializeCiphertext(bytes, Context("small")).status()),
            ErrorKind::kStructural);

  const EvalKey& rot = keys_->rotations.at(3);
  auto key = DeserializeEvalKey(SerializeEvalKey(rot), ctx());
  ASSERT_TRUE(key.ok()) << key.status();
  EXPECT_EQ(key->galois, rot.galois);
  EXPECT_EQ(key->b[2], rot.b[2]);
  auto pk = DeserializePublicKey(SerializePublicKey(*pk_), ctx());
  ASSERT_TRUE(pk.ok());
  EXPECT_EQ(pk->p0, pk_->p0);
  Encoder enc(ctx());
  const Plaintext pt = *enc.Encode(std::vector<double>{0.5}, 2, 0x1p30);
  auto pt2 = DeserializePlaintext(SerializePlaintext(pt), ctx());
  ASSERT_TRUE(pt2.ok());
  EXPECT_EQ(pt2->poly, pt.poly);
  EXPECT_EQ(pt2->scale, pt.scale);
}

}  // namespace
}  // namespace vfi::ckks
