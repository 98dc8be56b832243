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

#include "vfi/vpack/vpack.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "vfi/ckks/encoder.h"
#include "vfi/ckks/encryptor.h"
#include "vfi/ckks/evaluator.h"
#include "vfi/common/status.h"
#include "vfi/mphe/mphe.h"

namespace vfi::vpack {
namespace {

using ::vfi::testing::MaxAbsDiff;
using ::vfi::testing::PresetContext;
using ::vfi::testing::SumSecretKeys;

Matrix RandomMatrix(int rows, int cols, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  std::uniform_real_distribution<double> d(-1, 1);
  for (double& v : m.data) v = d(rng);
  return m;
}

PackLayout FullLayout(size_t slots, int period) {
  auto l = LayoutForWidth(period, slots);
  return *l;
}

std::vector<double> SumPacked(const Matrix& x, const ColumnPartition& part,
                              const PackLayout& layout,
                              std::span<const int> order) {
  std::vector<double> sum(layout.total_slots, 0.0);
  for (int owner : order) {
    Matrix slice = SliceColumns(x, part.begin(owner), part.end(owner));
    auto packed = Vpack(slice, part, owner, layout);
    EXPECT_TRUE(packed.ok()) << packed.status();
    for (size_t j = 0; j < sum.size(); ++j) sum[j] += packed->slots[j];
  }
  return sum;
}

TEST(PartitionTest, ValidatesCuts) {
  EXPECT_TRUE(MakePartition(1, 5, {0, 2, 4}).ok());
  EXPECT_EQ(GetErrorKind(MakePartition(1, 5, {1, 2}).status()),
            ErrorKind::kShape);
  EXPECT_EQ(GetErrorKind(MakePartition(1, 5, {0, 2, 2}).status()),
            ErrorKind::kShape);
  EXPECT_EQ(GetErrorKind(MakePartition(1, 5, {0, 5}).status()),
            ErrorKind::kShape);
  EXPECT_EQ(GetErrorKind(MakePartition(1, 5, {}).status()), ErrorKind::kShape);
  auto p = *MakePartition(1, 5, {0, 2, 4});
  EXPECT_EQ(p.parties(), 3);
  EXPECT_EQ(p.columns(0), 2);
  EXPECT_EQ(p.columns(1), 2);
  EXPECT_EQ(p.columns(2), 1);
  EXPECT_EQ(p.OwnerOf(0), 0);
  EXPECT_EQ(p.OwnerOf(3), 1);
  EXPECT_EQ(p.OwnerOf(4), 2);
}

TEST(PartitionTest, RowSplitsAreRejected) {
  auto s = MakePartition2d(4, 5, {0, 2}, {0, 3});
  EXPECT_EQ(GetErrorKind(s.status()), ErrorKind::kShape);
  EXPECT_NE(s.status().message().find("row"), absl::string_view::npos);
  EXPECT_TRUE(MakePartition2d(4, 5, {0}, {0, 3}).ok());
}

TEST(PartitionTest, EvenPartitionCoversAllColumns) {
  for (int n = 1; n <= 14; ++n) {
    auto p = EvenPartition(28, 28, n);
    ASSERT_TRUE(p.ok());
    int total = 0;
    for (int i = 0; i < n; ++i) total += p->columns(i);
    EXPECT_EQ(total, 28);
  }
  EXPECT_FALSE(EvenPartition(1, 3, 4).ok());
}

TEST(LayoutTest, SmallestLayoutForTinyDense) {
  einfer::ModelSpec m;
  m.input_height = 1;
  m.input_width = 4;
  m.layers.push_back(einfer::DenseLayer{2, 4, {}, {}});
  m.has_weights = false;
  auto layout = LayoutForModel(m, *ring::Preset("tiny"));
  ASSERT_TRUE(layout.ok()) << layout.status();
  EXPECT_EQ(layout->gap, 1);
  EXPECT_EQ(layout->replication, 1);
  EXPECT_EQ(layout->total_slots, 8u);
  // Deterministic.
  EXPECT_EQ(*layout, *LayoutForModel(m, *ring::Preset("tiny")));
}

TEST(LayoutTest, SixteenSlotsUseOnePeriod) {
  auto layout = *LayoutForWidth(4, 16);
  EXPECT_EQ(layout.gap, 1);
  EXPECT_EQ(layout.replication, 1);
  EXPECT_EQ(layout.period, 16);
}

TEST(LayoutTest, MnistShapeFitsLargestPreset) {
  einfer::ModelSpec m;
  m.input_height = 28;
  m.input_width = 28;
  m.layers.push_back(einfer::DenseLayer{10, 784, {}, {}});
  m.has_weights = false;
  auto layout = LayoutForModel(m, *ring::Preset("paper8192"));
  ASSERT_TRUE(layout.ok());
  EXPECT_EQ(layout->total_slots, 4096u);
  EXPECT_EQ(layout->period, 1024);
  EXPECT_EQ(layout->replication, 4);
  EXPECT_LE(static_cast<size_t>(layout->replication) * layout->gap * 784,
            layout->total_slots);
  EXPECT_TRUE(layout->Validate(28, 28).ok());
}

TEST(LayoutTest, CapacityError) {
  EXPECT_EQ(GetErrorKind(LayoutForWidth(17, 16).status()),
            ErrorKind::kCapacity);
  einfer::ModelSpec m;
  m.input_height = 5;
  m.input_width = 5;
  m.layers.push_back(einfer::DenseLayer{2, 25, {}, {}});
  m.has_weights = false;
  EXPECT_EQ(GetErrorKind(LayoutForModel(m, *ring::Preset("tiny")).status()),
            ErrorKind::kCapacity);
  PackLayout bad{1, 2, 16, 16};
  EXPECT_EQ(GetErrorKind(bad.Validate(1, 4)), ErrorKind::kCapacity);
}

TEST(VpackTest, FiveColumnsSplitTwoTwoOne) {
  std::mt19937_64 rng(3);
  const Matrix x = RandomMatrix(3, 5, rng);
  auto part = *MakePartition(3, 5, {0, 2, 4});
  const PackLayout layout = FullLayout(64, 16);
  std::vector<std::vector<bool>> masks;
  for (int owner = 0; owner < 3; ++owner) {
    Matrix slice = SliceColumns(x, part.begin(owner), part.end(owner));
    auto packed = Vpack(slice, part, owner, layout);
    ASSERT_TRUE(packed.ok()) << packed.status();
    for (int rep = 0; rep < layout.replication; ++rep) {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 5; ++c) {
          int slot = layout.SlotOf(r, c, 5, rep);
          bool owned = part.OwnerOf(c) == owner;
          EXPECT_EQ(packed->owner_mask[slot], owned);
          EXPECT_EQ(packed->slots[slot], owned ? x.at(r, c) : 0.0);
        }
      }
    }
    for (size_t j = 0; j < layout.total_slots; ++j) {
      if (!packed->owner_mask[j]) EXPECT_EQ(packed->slots[j], 0.0);
    }
    masks.push_back(packed->owner_mask);
  }
  // Masks are pairwise disjoint and cover every feature position.
  for (size_t j = 0; j < layout.total_slots; ++j) {
    int owners = masks[0][j] + masks[1][j] + masks[2][j];
    EXPECT_LE(owners, 1);
    if (j % layout.period < 15) EXPECT_EQ(owners, 1) << j;
  }
}

TEST(VpackTest, SingleOwnerIsFullPacking) {
  std::mt19937_64 rng(4);
  const Matrix x = RandomMatrix(2, 3, rng);
  auto part = *MakePartition(2, 3, {0});
  const PackLayout layout = FullLayout(16, 8);
  auto packed = *Vpack(x, part, 0, layout);
  for (int rep = 0; rep < layout.replication; ++rep) {
    for (int f = 0; f < 6; ++f) {
      EXPECT_EQ(packed.slots[f + rep * layout.period], x.data[f]);
    }
  }
  EXPECT_EQ(Unpack(packed.slots, layout, 2, 3), x);
}

TEST(VpackTest, SumOfSlicesEqualsFullPackingExactly) {
  std::mt19937_64 rng(5);
  const PackLayout layout = FullLayout(4096, 1024);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = std::vector<int>{2, 3, 5}[trial % 3];
    const int width = 5 + static_cast<int>(rng() % 24);
    const int height = 1 + static_cast<int>(rng() % 28);
    if (height * width > layout.period) continue;
    std::vector<int> cols(width - 1);
    std::iota(cols.begin(), cols.end(), 1);
    std::shuffle(cols.begin(), cols.end(), rng);
    std::vector<int> cuts = {0};
    cuts.insert(cuts.end(), cols.begin(), cols.begin() + (n - 1));
    std::sort(cuts.begin(), cuts.end());
    auto part = *MakePartition(height, width, cuts);
    const Matrix x = RandomMatrix(height, width, rng);
    auto full = *Vpack(x, *MakePartition(height, width, {0}), 0, layout);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    EXPECT_EQ(SumPacked(x, part, layout, order), full.slots);
    // Relabeling / reordering the clients changes nothing.
    std::shuffle(order.begin(), order.end(), rng);
    EXPECT_EQ(SumPacked(x, part, layout, order), full.slots);
  }
}

TEST(VpackTest, ShapeMismatch) {
  auto part = *MakePartition(2, 5, {0, 2, 4});
  const PackLayout layout = FullLayout(16, 16);
  EXPECT_EQ(GetErrorKind(Vpack(Matrix(2, 3), part, 0, layout).status()),
            ErrorKind::kShape);
  EXPECT_EQ(GetErrorKind(Vpack(Matrix(1, 2), part, 0, layout).status()),
            ErrorKind::kShape);
  EXPECT_EQ(GetErrorKind(Vpack(Matrix(2, 1), part, 3, layout).status()),
            ErrorKind::kShape);
  EXPECT_TRUE(Vpack(Matrix(2, 1), part, 2, layout).ok());
}

TEST(VpackTest, UnpackRoundTrip) {
  std::mt19937_64 rng(6);
  const PackLayout layout = FullLayout(4096, 1024);
  const Matrix x = RandomMatrix(28, 28, rng);
  auto packed = *Vpack(x, *MakePartition(28, 28, {0}), 0, layout);
  EXPECT_EQ(Unpack(packed.slots, layout, 28, 28), x);
  std::vector<double> zeros(4096, 0.0);
  EXPECT_EQ(Unpack(zeros, layout, 28, 28), Matrix(28, 28));
}

TEST(VpackTest, EncryptedSumMatchesFullPacking) {
  auto ctx = PresetContext("paper8192");
  ring::Prng prng(ring::Prng::SystemSeed());
  ckks::Encoder enc(ctx);
  ckks::Evaluator eval;
  std::mt19937_64 rng(7);
  const PackLayout layout = FullLayout(4096, 1024);
  for (int n : {2, 3, 5}) {
    std::vector<mphe::PartyKeys> parties;
    std::vector<ckks::PublicKey> shares;
    for (int i = 0; i < n; ++i) {
      parties.push_back(mphe::KeyGen(ctx, i, prng));
      shares.push_back(parties.back().pk);
    }
    auto cpk = *mphe::DKeyGen(shares);
    auto part = *EvenPartition(4, 11, n);
    const Matrix x = RandomMatrix(4, 11, rng);
    ckks::Ciphertext sum;
    for (int i = 0; i < n; ++i) {
      auto packed = *Vpack(SliceColumns(x, part.begin(i), part.end(i)), part,
                           i, layout);
      auto ct = *ckks::Encrypt(
          cpk, *enc.Encode(packed.slots, ctx->max_level(), ctx->params().scale()),
          prng);
      sum = sum.empty() ? ct : *eval.Add(sum, ct);
    }
    auto full = *Vpack(x, *MakePartition(4, 11, {0}), 0, layout);
    auto csk = SumSecretKeys(parties);
    auto got = enc.Decode(ckks::Decrypt(csk, sum));
    EXPECT_LT(MaxAbsDiff(got, full.slots), 0x1p-20) << "N=" << n;
  }
}

TEST(DatasetTest, CsvRoundTripAndSplit) {
  ClientDataset full;
  for (int c = 0; c < 5; ++c) full.features.push_back({0, c});
  full.record_ids = {"r1", "r2", "r3"};
  full.values = {{1, 2, 3, 4, 5}, {-1.5, 0, 2.25, 7, 8}, {0, 0, 0, 0, 1e-3}};
  const std::string csv = DatasetToCsv(full, 1);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "id,0,1,2,3,4");
  auto parsed = ParseDatasetCsv(csv);
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  EXPECT_EQ(parsed->values, full.values);
  EXPECT_EQ(parsed->record_ids, full.record_ids);

  auto part = *MakePartition(1, 5, {0, 2, 4});
  auto split = SplitDataset(full, part);
  ASSERT_TRUE(split.ok());
  ASSERT_EQ(split->size(), 3u);
  EXPECT_EQ((*split)[0].features.size(), 2u);
  EXPECT_EQ((*split)[2].features.size(), 1u);
  for (int owner = 0; owner < 3; ++owner) {
    EXPECT_TRUE(CheckDatasetOwnership((*split)[owner], part, owner).ok());
    EXPECT_FALSE(
        CheckDatasetOwnership((*split)[owner], part, (owner + 1) % 3).ok());
  }
  // Re-joining the per-client slices reproduces every cell.
  for (size_t r = 0; r < full.values.size(); ++r) {
    std::vector<double> joined;
    for (const auto& d : *split) {
      joined.insert(joined.end(), d.values[r].begin(), d.values[r].end());
    }
    EXPECT_EQ(joined, full.values[r]);
  }
  auto slice = RecordSlice((*split)[1], 1, part, 1);
  ASSERT_TRUE(slice.ok());
  EXPECT_EQ(slice->data, (std::vector<double>{2.25, 7}));
  EXPECT_EQ((*split)[1].FindRecord("r3"), 2);
  EXPECT_EQ((*split)[1].FindRecord("nope"), -1);
}

TEST(DatasetTest, TwoDimensionalKeysAndErrors) {
  auto d = ParseDatasetCsv("id,0:1,1:1\na,1,2\n");
  ASSERT_TRUE(d.ok());
  EXPECT_EQ(d->features[1], (std::pair<int, int>{1, 1}));
  EXPECT_FALSE(ParseDatasetCsv("").ok());
  EXPECT_FALSE(ParseDatasetCsv("id,0,0\na,1,2\n").ok());
  EXPECT_FALSE(ParseDatasetCsv("id,0,1\na,1\n").ok());
  EXPECT_FALSE(ParseDatasetCsv("id,0,x\na,1,2\n").ok());
  EXPECT_FALSE(ParseDatasetCsv("id,0,1\na,1,zz\n").ok());
  EXPECT_FALSE(ParseDatasetCsv("id,0\na,1\na,2\n").ok());
}

}  // namespace
}  // namespace vfi::vpack
