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

#include "vfi/mphe/mphe.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "vfi/ckks/encoder.h"
#include "vfi/ckks/encryptor.h"
#include "vfi/ckks/evaluator.h"
#include "vfi/common/status.h"

namespace vfi::mphe {
namespace {

using ::vfi::testing::MaxAbsDiff;
using ::vfi::testing::PresetContext;
using ::vfi::testing::RandomVector;
using ::vfi::testing::SumSecretKeys;

class MpheTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ctx_ = new RingContextPtr(PresetContext("paper8192"));
  }
  static void TearDownTestSuite() { delete ctx_; }

  const RingContextPtr& ctx() const { return *ctx_; }

  std::vector<PartyKeys> Parties(int n) {
    std::vector<PartyKeys> p;
    for (int i = 0; i < n; ++i) p.push_back(KeyGen(ctx(), i, prng_));
    return p;
  }
  PublicKey Cpk(const std::vector<PartyKeys>& parties) {
    std::vector<PublicKey> shares;
    for (const auto& p : parties) shares.push_back(p.pk);
    return *DKeyGen(shares);
  }
  Ciphertext Enc(const PublicKey& pk, const std::vector<double>& v) {
    ckks::Encoder enc(ctx());
    return *ckks::Encrypt(
        pk, *enc.Encode(v, ctx()->max_level(), ctx()->params().scale()),
        prng_);
  }
  std::vector<double> Dec(const SecretKey& sk, const Ciphertext& ct) {
    return ckks::Encoder(ctx()).Decode(ckks::Decrypt(sk, ct));
  }
  std::vector<RnsPoly> Partials(const std::vector<PartyKeys>& parties,
                                const Ciphertext& ct) {
    std::vector<RnsPoly> pds;
    for (const auto& p : parties) pds.push_back(Reconstruct(ct, p.sk, prng_));
    return pds;
  }
  EvalKey CollectiveRelin(const std::vector<PartyKeys>& parties) {
    std::vector<RelinEphemeral> eph(parties.size());
    std::vector<RelinShareR1> r1;
    for (size_t i = 0; i < parties.size(); ++i) {
      r1.push_back(GenRelinShareR1(parties[i].sk, eph[i], prng_));
    }
    auto agg = AggregateRelinR1(r1, parties.size());
    EXPECT_TRUE(agg.ok());
    std::vector<RelinShareR2> r2;
    for (size_t i = 0; i < parties.size(); ++i) {
      r2.push_back(GenRelinShareR2(parties[i].sk, eph[i], *agg, prng_));
    }
    return *ColRelinKeyGen(r2, *agg, parties.size());
  }
  EvalKey CollectiveRot(const std::vector<PartyKeys>& parties, int k) {
    std::vector<RotKeyShare> shares;
    for (const auto& p : parties) {
      shares.push_back(GenRotKeyShare(p.sk, k, prng_));
    }
    return *ColRotKeyGen(shares, parties.size());
  }

  static RingContextPtr* ctx_;
  Prng prng_{ring::Seed{21}};
  std::mt19937_64 rng_{5};
};

RingContextPtr* MpheTest::ctx_ = nullptr;

TEST_F(MpheTest, KeyGenProducesDistinctValidShares) {
  auto parties = Parties(2);
  EXPECT_FALSE(parties[0].sk.s == parties[1].sk.s);
  EXPECT_EQ(parties[0].pk.p1, parties[1].pk.p1);
  // p0 + a s is the Gaussian error.
  RnsPoly e = parties[0].pk.p0;
  e.MulAddInPlace(parties[0].pk.p1,
                  ckks::SecretAtLevel(parties[0].sk.s, ctx()->max_level()));
  for (int64_t c : e.CenteredFirstResidue()) {
    ASSERT_LE(std::abs(c), 6 * ctx()->params().gaussian_sigma + 1);
  }
}

TEST_F(MpheTest, SingleShareDegeneratesToPlainKey) {
  auto parties = Parties(1);
  const PublicKey cpk = Cpk(parties);
  EXPECT_EQ(cpk.p0, parties[0].pk.p0);
  const auto v = RandomVector(4096, rng_);
  EXPECT_LT(MaxAbsDiff(Dec(parties[0].sk, Enc(cpk, v)), v), 0x1p-25);
}

TEST_F(MpheTest, DKeyGenIsOrderIndependentAndChecksCrs) {
  auto parties = Parties(3);
  std::vector<PublicKey> shares = {parties[2].pk, parties[0].pk, parties[1].pk};
  EXPECT_EQ(DKeyGen(shares)->p0, Cpk(parties).p0);
  PublicKey rogue = ckks::GeneratePublicKey(parties[0].sk, prng_);
  shares.push_back(rogue);
  EXPECT_EQ(GetErrorKind(DKeyGen(shares).status()), ErrorKind::kProtocol);
  EXPECT_EQ(GetErrorKind(DKeyGen({}).status()),
            ErrorKind::kIncompleteProtocol);
}

TEST_F(MpheTest, SummedKeyAndDistributedDecryptionAgree) {
  for (int n : {1, 2, 3, 5}) {
    auto parties = Parties(n);
    const PublicKey cpk = Cpk(parties);
    const auto v = RandomVector(4096, rng_);
    const Ciphertext ct = Enc(cpk, v);
    const auto summed = Dec(SumSecretKeys(parties), ct);
    EXPECT_LT(MaxAbsDiff(summed, v), 0x1p-25) << n;
    auto distributed = DecAgg(Partials(parties, ct), ct, n);
    ASSERT_TRUE(distributed.ok());
    EXPECT_LT(MaxAbsDiff(*distributed, summed), 0x1p-20) << n;
    EXPECT_LT(MaxAbsDiff(*distributed, v), 0x1p-20) << n;
  }
}

TEST_F(MpheTest, CollectiveRelinKeySupportsMultiplication) {
  auto parties = Parties(3);
  const PublicKey cpk = Cpk(parties);
  const EvalKey rlk = CollectiveRelin(parties);
  const auto u = RandomVector(4096, rng_), v = RandomVector(4096, rng_);
  ckks::Evaluator eval;
  auto prod = eval.Mul(Enc(cpk, u), Enc(cpk, v), rlk);
  ASSERT_TRUE(prod.ok());
  std::vector<double> want(4096);
  for (size_t i = 0; i < want.size(); ++i) want[i] = u[i] * v[i];
  auto got = DecAgg(Partials(parties, *prod), *prod, 3);
  ASSERT_TRUE(got.ok());
  EXPECT_LT(MaxAbsDiff(*got, want), 0x1p-20);
}

TEST_F(MpheTest, SinglePartyRelinMatchesSingleKeyGeneration) {
  auto parties = Parties(1);
  const PublicKey cpk = Cpk(parties);
  const EvalKey collective = CollectiveRelin(parties);
  const EvalKey single = ckks::GenerateRelinKey(parties[0].sk, prng_);
  const auto u = RandomVector(4096, rng_);
  const Ciphertext a = Enc(cpk, u);
  ckks::Evaluator eval;
  const auto x = Dec(parties[0].sk, *eval.Mul(a, a, collective));
  const auto y = Dec(parties[0].sk, *eval.Mul(a, a, single));
  EXPECT_LT(MaxAbsDiff(x, y), 0x1p-20);
}

TEST_F(MpheTest, CollectiveRotationMatchesSummedKeyRotation) {
  auto parties = Parties(3);
  const PublicKey cpk = Cpk(parties);
  ckks::EvalKeySet collective, summed;
  collective.rotations.emplace(7, CollectiveRot(parties, 7));
  summed.rotations.emplace(
      7, ckks::GenerateRotationKey(SumSecretKeys(parties), 7, prng_));
  const auto u = RandomVector(4096, rng_);
  const Ciphertext a = Enc(cpk, u);
  ckks::Evaluator eval;
  auto r1 = eval.Rotate(a, 7, collective);
  auto r2 = eval.Rotate(a, 7, summed);
  ASSERT_TRUE(r1.ok() && r2.ok());
  const ckks::SecretKey csk = SumSecretKeys(parties);
  const auto d1 = Dec(csk, *r1), d2 = Dec(csk, *r2);
  EXPECT_LT(MaxAbsDiff(d1, d2), 0x1p-20);
  for (size_t j = 0; j < 4096; ++j) {
    ASSERT_NEAR(d1[j], u[(j + 7) % 4096], 0x1p-20);
  }
}

TEST_F(MpheTest, IncompleteEvalKeyCeremoniesAreRejected) {
  auto parties = Parties(2);
  std::vector<RotKeyShare> one = {GenRotKeyShare(parties[0].sk, 1, prng_)};
  EXPECT_EQ(GetErrorKind(ColRotKeyGen(one, 2).status()),
            ErrorKind::kIncompleteProtocol);
  RelinEphemeral eph;
  std::vector<RelinShareR1> r1 = {GenRelinShareR1(parties[0].sk, eph, prng_)};
  EXPECT_EQ(GetErrorKind(AggregateRelinR1(r1, 2).status()),
            ErrorKind::kIncompleteProtocol);
  auto agg = AggregateRelinR1(r1, 1);
  ASSERT_TRUE(agg.ok());
  EXPECT_EQ(GetErrorKind(ColRelinKeyGen({}, *agg, 2).status()),
            ErrorKind::kIncompleteProtocol);
  one.push_back(GenRotKeyShare(parties[1].sk, 2, prng_));
  EXPECT_EQ(GetErrorKind(ColRotKeyGen(one, 2).status()), ErrorKind::kProtocol);
}

TEST_F(MpheTest, PublicKeySwitchPipeline) {
  auto parties = Parties(3);
  const PublicKey cpk = Cpk(parties);
  const TargetKeyPair target = GenTargetKeyPair(ctx(), prng_);
  const auto v = RandomVector(4096, rng_);
  const Ciphertext ct = Enc(cpk, v);
  std::vector<KsShare> shares;
  for (const auto& p : parties) {
    shares.push_back(PubKeySwitch(ct, p.sk, target.tpk, p.party_id == 0, prng_));
  }
  auto out = AggDec(shares, target, ct.scale, 3);
  ASSERT_TRUE(out.ok());
  EXPECT_LT(MaxAbsDiff(*out, v), 0x1p-20);

  std::vector<KsShare> permuted = {shares[1], shares[2], shares[0]};
  auto out2 = AggDec(permuted, target, ct.scale, 3);
  ASSERT_TRUE(out2.ok());
  EXPECT_EQ(*out, *out2);

  auto partial = DecAgg(Partials(parties, ct), ct, 3);
  ASSERT_TRUE(partial.ok());
  EXPECT_LT(MaxAbsDiff(*out, *partial), 0x1p-18);

  // A single share is useless under tsk.
  std::vector<KsShare> single = {shares[0]};
  auto alone = AggDec(single, target, ct.scale, 1);
  ASSERT_TRUE(alone.ok());
  double signal = 0;
  for (double x : v) signal = std::max(signal, std::fabs(x));
  EXPECT_GT(MaxAbsDiff(*alone, v), 1e6 * signal);

  EXPECT_EQ(GetErrorKind(AggDec(single, target, ct.scale, 3).status()),
            ErrorKind::kIncompleteProtocol);
}

TEST_F(MpheTest, SelfSwitchWithSinglePartyTarget) {
  auto parties = Parties(1);
  const PublicKey cpk = Cpk(parties);
  TargetKeyPair self{ckks::GeneratePublicKey(parties[0].sk, prng_),
                     parties[0].sk};
  const auto v = RandomVector(4096, rng_);
  const Ciphertext ct = Enc(cpk, v);
  std::vector<KsShare> shares = {
      PubKeySwitch(ct, parties[0].sk, self.tpk, true, prng_)};
  auto out = AggDec(shares, self, ct.scale, 1);
  ASSERT_TRUE(out.ok());
  EXPECT_LT(MaxAbsDiff(*out, v), 0x1p-20);
  auto direct = DecAgg(Partials(parties, ct), ct, 1);
  EXPECT_LT(MaxAbsDiff(*direct, Dec(parties[0].sk, ct)), 0x1p-20);
}

TEST_F(MpheTest, MissingPartialDecryptionIsUseless) {
  auto parties = Parties(3);
  const Ciphertext ct = Enc(Cpk(parties), RandomVector(4096, rng_));
  auto pds = Partials(parties, ct);
  pds.pop_back();
  EXPECT_EQ(GetErrorKind(DecAgg(pds, ct, 3).status()),
            ErrorKind::kIncompleteProtocol);
  auto garbage = DecAgg(pds, ct, 2);
  ASSERT_TRUE(garbage.ok());
  double worst = 0;
  for (double x : *garbage) worst = std::max(worst, std::fabs(x));
  EXPECT_GT(worst, 1e6);
}

TEST_F(MpheTest, SmudgedDecryptionAfterDepthStaysAccurate) {
  auto parties = Parties(3);
  const PublicKey cpk = Cpk(parties);
  const EvalKey rlk = CollectiveRelin(parties);
  const TargetKeyPair target = GenTargetKeyPair(ctx(), prng_);
  ckks::Evaluator eval;
  Ciphertext ct = Enc(cpk, std::vector<double>(4096, 0.99));
  for (int d = 0; d < ctx()->max_level(); ++d) ct = *eval.Mul(ct, ct, rlk);
  ASSERT_EQ(ct.level(), 0);
  std::vector<KsShare> shares;
  for (const auto& p : parties) {
    shares.push_back(PubKeySwitch(ct, p.sk, target.tpk, p.party_id == 0, prng_));
  }
  auto out = AggDec(shares, target, ct.scale, 3);
  ASSERT_TRUE(out.ok());
  EXPECT_LT(MaxAbsDiff(*out, std::vector<double>(4096, std::pow(0.99, 16))),
            0x1p-10);
}

}  // namespace
}  // namespace vfi::mphe
