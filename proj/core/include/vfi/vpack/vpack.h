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

#ifndef VFI_VPACK_VPACK_H_
#define VFI_VPACK_VPACK_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "vfi/einfer/model.h"
#include "vfi/ring/params.h"

namespace vfi::vpack {

// Dense row-major real matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}
  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
  bool operator==(const Matrix&) const = default;
};

// Column-wise split of an F_H x F_W feature matrix: owner i holds columns
// [cuts[i], cuts[i+1]) and the last owner holds [cuts.back(), F_W).
struct ColumnPartition {
  int height = 1;
  int width = 1;
  std::vector<int> cuts = {0};

  int parties() const { return static_cast<int>(cuts.size()); }
  int begin(int owner) const { return cuts[owner]; }
  int end(int owner) const {
    return owner + 1 < parties() ? cuts[owner + 1] : width;
  }
  int columns(int owner) const { return end(owner) - begin(owner); }
  // Owner of global column `col`.
  int OwnerOf(int col) const;
  absl::Status Validate() const;
  bool operator==(const ColumnPartition&) const = default;
};

absl::StatusOr<ColumnPartition> MakePartition(int height, int width,
                                              std::vector<int> cuts);
// Rejects any split along rows: a partition description must keep every row
// whole, so `row_cuts` other than {0} is a shape error.
absl::StatusOr<ColumnPartition> MakePartition2d(int height, int width,
                                                std::vector<int> row_cuts,
                                                std::vector<int> col_cuts);
// Evenly sized contiguous slices for `parties` owners.
absl::StatusOr<ColumnPartition> EvenPartition(int height, int width,
                                              int parties);

// Feature (r, c) lands at slot gap * (r * F_W + c) + k * period for every
// replica k in [0, replication).
struct PackLayout {
  int gap = 1;
  int replication = 1;
  // Distance between replicas; a power of two dividing total_slots.
  int period = 1;
  size_t total_slots = 0;

  int SlotOf(int row, int col, int width, int replica = 0) const {
    return gap * (row * width + col) + replica * period;
  }
  absl::Status Validate(int height, int width) const;
  bool operator==(const PackLayout&) const = default;
};

// Picks the layout the compiler works with: the largest power-of-two period
// whose baby-step/giant-step rotation set stays within 64 keys (and at least
// the widest intermediate tensor), replicated to fill all slots.
absl::StatusOr<PackLayout> LayoutForModel(const einfer::ModelSpec& model,
                                          const ring::CryptoParams& params);
// Smallest layout for a given maximum tensor width and slot count.
absl::StatusOr<PackLayout> LayoutForWidth(int max_width, size_t slots);

struct PackedInput {
  std::vector<double> slots;
  std::vector<bool> owner_mask;
};

// Places the owner's slice at its global positions; everything else is 0.
absl::StatusOr<PackedInput> Vpack(const Matrix& slice,
                                  const ColumnPartition& part, int owner,
                                  const PackLayout& layout);
// Inverse of full-ownership packing (reads replica 0).
Matrix Unpack(std::span<const double> slots, const PackLayout& layout,
              int height, int width);
// Applies the model's per-feature normalization to an owner's slice.
void NormalizeSlice(const einfer::ModelSpec& model,
                    const ColumnPartition& part, int owner, Matrix& slice);
// Column slice [begin, end) of a full matrix.
Matrix SliceColumns(const Matrix& full, int begin, int end);

// Row-oriented client dataset: every record is an F_H x (owned columns)
// matrix stored as one CSV line.
struct ClientDataset {
  // Global feature keys in file order, as (row, col) pairs.
  std::vector<std::pair<int, int>> features;
  std::vector<std::string> record_ids;
  // values[record][feature].
  std::vector<std::vector<double>> values;

  int FindRecord(const std::string& id) const;
};

// Header: "id,<key>,<key>,..." where a key is "c" (single-row features) or
// "r:c". The id column may be named anything but must come first.
absl::StatusOr<ClientDataset> ParseDatasetCsv(const std::string& text);
absl::StatusOr<ClientDataset> LoadDatasetCsv(const std::string& path);
std::string DatasetToCsv(const ClientDataset& data, int height);
// Checks that the file holds exactly the owner's columns for every row.
absl::Status CheckDatasetOwnership(const ClientDataset& data,
                                   const ColumnPartition& part, int owner);
// Extracts the owner's slice for one record.
absl::StatusOr<Matrix> RecordSlice(const ClientDataset& data, int record,
                                   const ColumnPartition& part, int owner);
// Splits a full dataset into one dataset per owner.
absl::StatusOr<std::vector<ClientDataset>> SplitDataset(
    const ClientDataset& full, const ColumnPartition& part);

}  // namespace vfi::vpack

#endif  // VFI_VPACK_VPACK_H_
