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

#ifndef VFI_PROTOCOL_TRANSCRIPT_H_
#define VFI_PROTOCOL_TRANSCRIPT_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "absl/strings/string_view.h"
#include "vfi/protocol/message.h"

namespace vfi::protocol {

enum class Phase : uint8_t {
  kSetup = 0,
  kAggregating = 1,
  kInferring = 2,
  kDecrypting = 3,
  kDone = 4,
};

absl::string_view PhaseName(Phase phase);

struct TranscriptEntry {
  Phase phase = Phase::kSetup;
  MsgType type = MsgType::kAck;
  uint16_t sender = 0;
  uint16_t receiver = 0;
  // Full frame size on the wire.
  size_t bytes = 0;
  int64_t t_monotonic_ns = 0;

  bool SameExceptTime(const TranscriptEntry& o) const {
    return phase == o.phase && type == o.type && sender == o.sender &&
           receiver == o.receiver && bytes == o.bytes;
  }
};

// Thread-safe ordered log of every message sent in a session.
class Transcript {
 public:
  Transcript();

  // Free-form session metadata emitted as the first JSON line (layout,
  // rotation manifest, parameters).
  void SetHeader(std::string json_object);
  void Record(Phase phase, const Message& m, uint16_t receiver, size_t bytes);

  std::vector<TranscriptEntry> entries() const;
  size_t BytesInPhase(Phase phase) const;
  size_t BytesOfType(MsgType type) const;
  size_t TotalBytes() const;
  // Entries sorted by (phase, type, sender, receiver, bytes): independent of
  // delivery interleaving, used to compare transports.
  std::vector<TranscriptEntry> Canonical() const;
  // One JSON object per line: the header, then
  // {phase, msgType, sender, receiver, bytes, tMonotonicNs}.
  std::string ToJsonLines(bool with_times = true) const;

 private:
  mutable std::mutex mu_;
  std::chrono::steady_clock::time_point start_;
  std::string header_;
  std::vector<TranscriptEntry> entries_;
};

}  // namespace vfi::protocol

#endif  // VFI_PROTOCOL_TRANSCRIPT_H_
