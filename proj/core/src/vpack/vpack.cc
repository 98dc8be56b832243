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
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "vfi/common/status.h"
#include "vfi/common/status_macros.h"

namespace vfi::vpack {
namespace {

constexpr int kMaxRotationKeys = 64;

bool IsPowerOfTwo(size_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Rotation keys needed by a baby-step/giant-step evaluation over `period`.
int KeyBound(size_t period) {
  int log = 0;
  while ((size_t{1} << log) < period) ++log;
  size_t n1 = size_t{1} << ((log + 1) / 2);
  return static_cast<int>((n1 - 1) + (period / n1 - 1));
}

absl::StatusOr<std::pair<int, int>> ParseFeatureKey(absl::string_view key) {
  key = absl::StripAsciiWhitespace(key);
  int r = 0, c = 0;
  std::vector<absl::string_view> parts = absl::StrSplit(key, ':');
  if (parts.size() == 1) {
    if (!absl::SimpleAtoi(parts[0], &c) || c < 0) {
      return ShapeError(absl::StrCat("bad column key '", key, "'"));
    }
  } else if (parts.size() == 2) {
    if (!absl::SimpleAtoi(parts[0], &r) || !absl::SimpleAtoi(parts[1], &c) ||
        r < 0 || c < 0) {
      return ShapeError(absl::StrCat("bad column key '", key, "'"));
    }
  } else {
    return ShapeError(absl::StrCat("bad column key '", key, "'"));
  }
  return std::make_pair(r, c);
}

}  // namespace

int ColumnPartition::OwnerOf(int col) const {
  auto it = std::upper_bound(cuts.begin(), cuts.end(), col);
  return static_cast<int>(it - cuts.begin()) - 1;
}

absl::Status ColumnPartition::Validate() const {
  if (height < 1 || width < 1) return ShapeError("partition shape must be >0");
  if (cuts.empty() || cuts[0] != 0) {
    return ShapeError("partition cuts must start at column 0");
  }
  for (size_t i = 1; i < cuts.size(); ++i) {
    if (cuts[i] <= cuts[i - 1]) {
      return ShapeError("partition cuts must be strictly increasing");
    }
  }
  if (cuts.back() >= width) {
    return ShapeError(absl::StrCat("last cut ", cuts.back(),
                                   " leaves no column for its owner (width ",
                                   width, ")"));
  }
  return absl::OkStatus();
}

absl::StatusOr<ColumnPartition> MakePartition(int height, int width,
                                              std::vector<int> cuts) {
  ColumnPartition p{height, width, std::move(cuts)};
  VFI_RETURN_IF_ERROR(p.Validate());
  return p;
}

absl::StatusOr<ColumnPartition> MakePartition2d(int height, int width,
                                                std::vector<int> row_cuts,
                                                std::vector<int> col_cuts) {
  if (row_cuts != std::vector<int>{0}) {
    return ShapeError(
        "row partitioning is not supported; owners must split by column");
  }
  return MakePartition(height, width, std::move(col_cuts));
}

absl::StatusOr<ColumnPartition> EvenPartition(int height, int width,
                                              int parties) {
  if (parties < 1 || parties > width) {
    return ShapeError(absl::StrCat("cannot split ", width, " columns among ",
                                   parties, " owners"));
  }
  std::vector<int> cuts;
  for (int i = 0; i < parties; ++i) {
    cuts.push_back(static_cast<int>(static_cast<int64_t>(i) * width / parties));
  }
  return MakePartition(height, width, std::move(cuts));
}

absl::Status PackLayout::Validate(int height, int width) const {
  if (gap < 1 || replication < 1) {
    return CapacityError("gap and replication must be >= 1");
  }
  if (!IsPowerOfTwo(total_slots) || !IsPowerOfTwo(period) ||
      static_cast<size_t>(period) > total_slots) {
    return CapacityError("period and slot count must be powers of two");
  }
  const size_t span = static_cast<size_t>(gap) * height * width;
  if (span > static_cast<size_t>(period) ||
      static_cast<size_t>(replication) * period > total_slots) {
    return CapacityError(absl::StrCat(
        "layout needs ", replication, " x ", span, " slots, only ",
        total_slots, " available"));
  }
  return absl::OkStatus();
}

absl::StatusOr<PackLayout> LayoutForWidth(int max_width, size_t slots) {
  if (!IsPowerOfTwo(slots)) return CapacityError("slot count not a power of 2");
  size_t need = 1;
  while (need < static_cast<size_t>(max_width)) need <<= 1;
  if (need > slots) {
    return CapacityError(absl::StrCat("tensor width ", max_width,
                                      " exceeds the ", slots,
                                      " available slots"));
  }
  size_t period = slots;
  while (period > need && KeyBound(period) > kMaxRotationKeys) period >>= 1;
  PackLayout layout;
  layout.gap = 1;
  layout.period = static_cast<int>(period);
  layout.replication = static_cast<int>(slots / period);
  layout.total_slots = slots;
  return layout;
}

absl::StatusOr<PackLayout> LayoutForModel(const einfer::ModelSpec& model,
                                          const ring::CryptoParams& params) {
  VFI_ASSIGN_OR_RETURN(auto shapes, einfer::LayerShapes(model));
  int width = model.feature_count();
  for (const auto& s : shapes) width = std::max(width, s.size());
  return LayoutForWidth(width, params.slots());
}

absl::StatusOr<PackedInput> Vpack(const Matrix& slice,
                                  const ColumnPartition& part, int owner,
                                  const PackLayout& layout) {
  VFI_RETURN_IF_ERROR(part.Validate());
  if (owner < 0 || owner >= part.parties()) {
    return ShapeError(absl::StrCat("owner ", owner, " not in partition of ",
                                   part.parties()));
  }
  if (slice.rows != part.height || slice.cols != part.columns(owner) ||
      slice.data.size() != static_cast<size_t>(slice.rows) * slice.cols) {
    return ShapeError(absl::StrCat(
        "owner ", owner, " slice is ", slice.rows, "x", slice.cols,
        ", partition expects ", part.height, "x", part.columns(owner)));
  }
  VFI_RETURN_IF_ERROR(layout.Validate(part.height, part.width));
  PackedInput out;
  out.slots.assign(layout.total_slots, 0.0);
  out.owner_mask.assign(layout.total_slots, false);
  const int c0 = part.begin(owner);
  for (int k = 0; k < layout.replication; ++k) {
    for (int r = 0; r < slice.rows; ++r) {
      for (int c = 0; c < slice.cols; ++c) {
        int slot = layout.SlotOf(r, c0 + c, part.width, k);
        out.slots[slot] = slice.at(r, c);
        out.owner_mask[slot] = true;
      }
    }
  }
  return out;
}

Matrix Unpack(std::span<const double> slots, const PackLayout& layout,
              int height, int width) {
  Matrix m(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      size_t slot = layout.SlotOf(r, c, width);
      m.at(r, c) = slot < slots.size() ? slots[slot] : 0.0;
    }
  }
  return m;
}

Matrix SliceColumns(const Matrix& full, int begin, int end) {
  Matrix m(full.rows, end - begin);
  for (int r = 0; r < full.rows; ++r) {
    for (int c = begin; c < end; ++c) m.at(r, c - begin) = full.at(r, c);
  }
  return m;
}

void NormalizeSlice(const einfer::ModelSpec& model,
                    const ColumnPartition& part, int owner, Matrix& slice) {
  const auto& n = model.normalization;
  for (int r = 0; r < slice.rows; ++r) {
    for (int c = 0; c < slice.cols; ++c) {
      size_t f = static_cast<size_t>(r) * part.width + part.begin(owner) + c;
      double& v = slice.at(r, c);
      if (!n.scale.empty()) v *= n.scale[f];
      if (!n.shift.empty()) v += n.shift[f];
    }
  }
}

int ClientDataset::FindRecord(const std::string& id) const {
  for (size_t i = 0; i < record_ids.size(); ++i) {
    if (record_ids[i] == id) return static_cast<int>(i);
  }
  return -1;
}

absl::StatusOr<ClientDataset> ParseDatasetCsv(const std::string& text) {
  ClientDataset data;
  std::vector<absl::string_view> lines =
      absl::StrSplit(text, '\n', absl::SkipWhitespace());
  if (lines.empty()) return ShapeError("dataset CSV is empty");
  std::vector<absl::string_view> header =
      absl::StrSplit(absl::StripSuffix(lines[0], "\r"), ',');
  if (header.size() < 2) {
    return ShapeError("dataset header needs an id and at least one column");
  }
  std::set<std::pair<int, int>> seen;
  for (size_t i = 1; i < header.size(); ++i) {
    VFI_ASSIGN_OR_RETURN(auto key, ParseFeatureKey(header[i]));
    if (!seen.insert(key).second) {
      return ShapeError(absl::StrCat("duplicate column '", header[i], "'"));
    }
    data.features.push_back(key);
  }
  std::set<std::string> ids;
  for (size_t li = 1; li < lines.size(); ++li) {
    std::vector<absl::string_view> cells =
        absl::StrSplit(absl::StripSuffix(lines[li], "\r"), ',');
    if (cells.size() != header.size()) {
      return ShapeError(absl::StrCat("line ", li + 1, " has ", cells.size(),
                                     " cells, header has ", header.size()));
    }
    std::string id(absl::StripAsciiWhitespace(cells[0]));
    if (!ids.insert(id).second) {
      return ShapeError(absl::StrCat("duplicate record id '", id, "'"));
    }
    std::vector<double> row;
    row.reserve(cells.size() - 1);
    for (size_t i = 1; i < cells.size(); ++i) {
      double v;
      if (!absl::SimpleAtod(absl::StripAsciiWhitespace(cells[i]), &v)) {
        return ShapeError(absl::StrCat("line ", li + 1, ": bad number '",
                                       cells[i], "'"));
      }
      row.push_back(v);
    }
    data.record_ids.push_back(std::move(id));
    data.values.push_back(std::move(row));
  }
  return data;
}

absl::StatusOr<ClientDataset> LoadDatasetCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) return IoError(absl::StrCat("cannot open dataset ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseDatasetCsv(ss.str());
}

std::string DatasetToCsv(const ClientDataset& data, int height) {
  std::string out = "id";
  for (const auto& [r, c] : data.features) {
    absl::StrAppend(&out, ",",
                    height == 1 ? absl::StrCat(c) : absl::StrCat(r, ":", c));
  }
  out += "\n";
  for (size_t i = 0; i < data.record_ids.size(); ++i) {
    out += data.record_ids[i];
    for (double v : data.values[i]) absl::StrAppend(&out, ",", v);
    out += "\n";
  }
  return out;
}

absl::Status CheckDatasetOwnership(const ClientDataset& data,
                                   const ColumnPartition& part, int owner) {
  VFI_RETURN_IF_ERROR(part.Validate());
  std::set<std::pair<int, int>> expected, got(data.features.begin(),
                                              data.features.end());
  for (int r = 0; r < part.height; ++r) {
    for (int c = part.begin(owner); c < part.end(owner); ++c) {
      expected.insert({r, c});
    }
  }
  if (got != expected) {
    for (const auto& [r, c] : data.features) {
      if (!expected.count({r, c})) {
        return ShapeError(absl::StrCat("column ", r, ":", c,
                                       " is not owned by client ", owner));
      }
    }
    return ShapeError(absl::StrCat("client ", owner, " dataset is missing ",
                                   expected.size() - got.size(),
                                   " owned columns"));
  }
  return absl::OkStatus();
}

absl::StatusOr<Matrix> RecordSlice(const ClientDataset& data, int record,
                                   const ColumnPartition& part, int owner) {
  VFI_RETURN_IF_ERROR(CheckDatasetOwnership(data, part, owner));
  if (record < 0 || record >= static_cast<int>(data.values.size())) {
    return UnknownRecordError(absl::StrCat("record index ", record));
  }
  Matrix m(part.height, part.columns(owner));
  for (size_t i = 0; i < data.features.size(); ++i) {
    const auto& [r, c] = data.features[i];
    m.at(r, c - part.begin(owner)) = data.values[record][i];
  }
  return m;
}

absl::StatusOr<std::vector<ClientDataset>> SplitDataset(
    const ClientDataset& full, const ColumnPartition& part) {
  VFI_RETURN_IF_ERROR(part.Validate());
  std::map<std::pair<int, int>, size_t> index;
  for (size_t i = 0; i < full.features.size(); ++i) {
    index[full.features[i]] = i;
  }
  std::vector<ClientDataset> out(part.parties());
  for (int o = 0; o < part.parties(); ++o) {
    std::vector<size_t> cols;
    for (int r = 0; r < part.height; ++r) {
      for (int c = part.begin(o); c < part.end(o); ++c) {
        auto it = index.find({r, c});
        if (it == index.end()) {
          return ShapeError(absl::StrCat("dataset lacks column ", r, ":", c));
        }
        out[o].features.push_back({r, c});
        cols.push_back(it->second);
      }
    }
    out[o].record_ids = full.record_ids;
    for (const auto& row : full.values) {
      std::vector<double> v;
      v.reserve(cols.size());
      for (size_t k : cols) v.push_back(row[k]);
      out[o].values.push_back(std::move(v));
    }
  }
  if (index.size() != static_cast<size_t>(part.height) * part.width) {
    return ShapeError("dataset has columns outside the partition shape");
  }
  return out;
}

}  // namespace vfi::vpack
