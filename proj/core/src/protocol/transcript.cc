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

#include "vfi/protocol/transcript.h"

#include <algorithm>
#include <tuple>

#include "absl/strings/str_cat.h"

namespace vfi::protocol {

absl::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kSetup: return "setup";
    case Phase::kAggregating: return "aggregating";
    case Phase::kInferring: return "inferring";
    case Phase::kDecrypting: return "decrypting";
    case Phase::kDone: return "done";
  }
  return "unknown";
}

Transcript::Transcript() : start_(std::chrono::steady_clock::now()) {}

void Transcript::SetHeader(std::string json_object) {
  std::lock_guard<std::mutex> lock(mu_);
  header_ = std::move(json_object);
}

void Transcript::Record(Phase phase, const Message& m, uint16_t receiver,
                        size_t bytes) {
  std::lock_guard<std::mutex> lock(mu_);
  TranscriptEntry e;
  e.phase = phase;
  e.type = m.type;
  e.sender = m.sender;
  e.receiver = receiver;
  e.bytes = bytes;
  e.t_monotonic_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                         std::chrono::steady_clock::now() - start_)
                         .count();
  entries_.push_back(e);
}

std::vector<TranscriptEntry> Transcript::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

size_t Transcript::BytesInPhase(Phase phase) const {
  std::lock_guard<std::mutex> lock(mu_);
  size_t n = 0;
  for (const auto& e : entries_) n += e.phase == phase ? e.bytes : 0;
  return n;
}

size_t Transcript::BytesOfType(MsgType type) const {
  std::lock_guard<std::mutex> lock(mu_);
  size_t n = 0;
  for (const auto& e : entries_) n += e.type == type ? e.bytes : 0;
  return n;
}

size_t Transcript::TotalBytes() const {
  std::lock_guard<std::mutex> lock(mu_);
  size_t n = 0;
  for (const auto& e : entries_) n += e.bytes;
  return n;
}

std::vector<TranscriptEntry> Transcript::Canonical() const {
  std::vector<TranscriptEntry> out = entries();
  auto key = [](const TranscriptEntry& e) {
    return std::make_tuple(e.phase, e.type, e.sender, e.receiver, e.bytes);
  };
  std::stable_sort(out.begin(), out.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });
  for (auto& e : out) e.t_monotonic_ns = 0;
  return out;
}

std::string Transcript::ToJsonLines(bool with_times) const {
  std::lock_guard<std::mutex> lock(mu_);
  std::string out;
  if (!header_.empty()) absl::StrAppend(&out, header_, "\n");
  for (const auto& e : entries_) {
    absl::StrAppend(&out, "{\"phase\":\"", PhaseName(e.phase),
                    "\",\"msgType\":\"", MsgTypeName(e.type),
                    "\",\"sender\":", e.sender, ",\"receiver\":", e.receiver,
                    ",\"bytes\":", e.bytes);
    if (with_times) absl::StrAppend(&out, ",\"tMonotonicNs\":", e.t_monotonic_ns);
    out += "}\n";
  }
  return out;
}

}  // namespace vfi::protocol
