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

#ifndef VFI_COMMON_BYTES_H_
#define VFI_COMMON_BYTES_H_

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "vfi/common/status.h"

namespace vfi {

using Bytes = std::vector<uint8_t>;

// Little-endian append-only encoder.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(size_t reserve) { buf_.reserve(reserve); }

  void U8(uint8_t v) { buf_.push_back(v); }
  void U16(uint16_t v) { Raw(v); }
  void U32(uint32_t v) { Raw(v); }
  void U64(uint64_t v) { Raw(v); }
  void I32(int32_t v) { Raw(static_cast<uint32_t>(v)); }
  void F64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    Raw(bits);
  }
  void Append(std::span<const uint8_t> data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
  }
  void U64Array(std::span<const uint64_t> words);
  // u32 length followed by the bytes.
  void Blob(std::span<const uint8_t> data) {
    U32(static_cast<uint32_t>(data.size()));
    Append(data);
  }
  void String(absl::string_view s) {
    Blob({reinterpret_cast<const uint8_t*>(s.data()), s.size()});
  }

  size_t size() const { return buf_.size(); }
  Bytes& bytes() { return buf_; }
  Bytes Take() { return std::move(buf_); }

 private:
  template <typename T>
  void Raw(T v) {
    for (size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
  }

  Bytes buf_;
};

// Bounds-checked little-endian decoder; every read past the end yields a
// framing error instead of touching memory.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  absl::StatusOr<uint8_t> U8() { return Raw<uint8_t>(); }
  absl::StatusOr<uint16_t> U16() { return Raw<uint16_t>(); }
  absl::StatusOr<uint32_t> U32() { return Raw<uint32_t>(); }
  absl::StatusOr<uint64_t> U64() { return Raw<uint64_t>(); }
  absl::StatusOr<int32_t> I32();
  absl::StatusOr<double> F64();
  absl::StatusOr<std::span<const uint8_t>> Take(size_t n);
  absl::Status U64Array(std::span<uint64_t> out);
  absl::StatusOr<std::span<const uint8_t>> Blob();
  absl::StatusOr<std::string> String();

  size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }
  absl::Status ExpectDone() const;

 private:
  template <typename T>
  absl::StatusOr<T> Raw() {
    if (remaining() < sizeof(T)) {
      return FramingError("truncated input");
    }
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<T>(data_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return v;
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

std::string ToHex(std::span<const uint8_t> data);
absl::StatusOr<Bytes> FromHex(absl::string_view hex);

}  // namespace vfi

#endif  // VFI_COMMON_BYTES_H_
