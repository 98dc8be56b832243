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

#include "vfi/common/bytes.h"

#include <bit>

#include "absl/strings/str_cat.h"

namespace vfi {

void ByteWriter::U64Array(std::span<const uint64_t> words) {
  size_t offset = buf_.size();
  buf_.resize(offset + words.size() * 8);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(buf_.data() + offset, words.data(), words.size() * 8);
  } else {
    for (size_t i = 0; i < words.size(); ++i) {
      for (size_t b = 0; b < 8; ++b) {
        buf_[offset + 8 * i + b] = static_cast<uint8_t>(words[i] >> (8 * b));
      }
    }
  }
}

absl::StatusOr<int32_t> ByteReader::I32() {
  auto v = U32();
  if (!v.ok()) return v.status();
  return static_cast<int32_t>(*v);
}

absl::StatusOr<double> ByteReader::F64() {
  auto v = U64();
  if (!v.ok()) return v.status();
  double d;
  uint64_t bits = *v;
  std::memcpy(&d, &bits, sizeof(d));
  return d;
}

absl::StatusOr<std::span<const uint8_t>> ByteReader::Take(size_t n) {
  if (remaining() < n) {
    return FramingError(
        absl::StrCat("truncated input: need ", n, " bytes, have ",
                     remaining()));
  }
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

absl::Status ByteReader::U64Array(std::span<uint64_t> out) {
  auto raw = Take(out.size() * 8);
  if (!raw.ok()) return raw.status();
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), raw->data(), raw->size());
  } else {
    for (size_t i = 0; i < out.size(); ++i) {
      uint64_t v = 0;
      for (size_t b = 0; b < 8; ++b) {
        v |= static_cast<uint64_t>((*raw)[8 * i + b]) << (8 * b);
      }
      out[i] = v;
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<std::span<const uint8_t>> ByteReader::Blob() {
  auto n = U32();
  if (!n.ok()) return n.status();
  return Take(*n);
}

absl::StatusOr<std::string> ByteReader::String() {
  auto blob = Blob();
  if (!blob.ok()) return blob.status();
  return std::string(blob->begin(), blob->end());
}

absl::Status ByteReader::ExpectDone() const {
  if (!done()) {
    return FramingError(
        absl::StrCat(remaining(), " trailing bytes after object"));
  }
  return absl::OkStatus();
}

std::string ToHex(std::span<const uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

absl::StatusOr<Bytes> FromHex(absl::string_view hex) {
  if (hex.size() % 2 != 0) {
    return StructuralError("hex string has odd length");
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return StructuralError("invalid hex digit");
    out[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return out;
}

}  // namespace vfi
