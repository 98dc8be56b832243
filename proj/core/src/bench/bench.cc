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

#include "vfi/bench/bench.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "vfi/common/status_macros.h"

namespace vfi::bench {
namespace {

using protocol::Phase;

double Timing(const protocol::LocalSession& s, const std::string& key) {
  double t = 0;
  for (protocol::Role* r : s.roles()) {
    auto it = r->timings().find(key);
    if (it != r->timings().end()) t += it->second;
  }
  return t;
}

}  // namespace

absl::StatusOr<std::vector<BenchRecord>> RunBench(const BenchOptions& o) {
  if (o.min_parties < 1 || o.max_parties < o.min_parties) {
    return ConfigError("invalid party range");
  }
  if (o.dataset.record_ids.empty()) return ConfigError("empty dataset");
  const std::string params = o.ctx->params().name;
  std::vector<BenchRecord> out;
  for (int n = o.min_parties; n <= o.max_parties; ++n) {
    protocol::LocalSessionSpec spec;
    spec.ctx = o.ctx;
    spec.model = o.model;
    VFI_ASSIGN_OR_RETURN(spec.partition,
                         vpack::EvenPartition(o.model.input_height,
                                              o.model.input_width, n));
    VFI_ASSIGN_OR_RETURN(spec.datasets,
                         vpack::SplitDataset(o.dataset, spec.partition));
    for (int q = 0; q < o.queries; ++q) {
      spec.queries.push_back(
          o.dataset.record_ids[q % o.dataset.record_ids.size()]);
    }
    spec.seed = ring::DeriveSeed(o.seed, absl::StrCat("bench/", n));
    spec.session_id = protocol::DeriveSessionId(spec.seed);

    for (bool cipher : {false, true}) {
      if (!cipher && !o.plaintext_model) continue;
      if (cipher && !o.ciphertext_model) continue;
      spec.mode = cipher ? einfer::WeightMode::kCiphertext
                         : einfer::WeightMode::kPlaintext;
      VFI_ASSIGN_OR_RETURN(protocol::LocalSession session,
                           protocol::BuildLocalSession(spec));
      protocol::Transcript transcript;
      VFI_RETURN_IF_ERROR(
          protocol::RunInProcess(session.roles(), transcript));
      VFI_RETURN_IF_ERROR(session.CheckSecrecy());
      const auto row = [&](const char* phase, Phase p, const char* timer) {
        out.push_back(BenchRecord{phase, n, Timing(session, timer),
                                  transcript.BytesInPhase(p), params});
      };
      if (cipher) {
        row("inferCipher", Phase::kInferring, "infer");
        if (!o.plaintext_model) {
          row("keygen", Phase::kSetup, "keygen");
          row("concat", Phase::kAggregating, "concat");
          row("distDecrypt", Phase::kDecrypting, "distDecrypt");
        }
      } else {
        row("keygen", Phase::kSetup, "keygen");
        row("concat", Phase::kAggregating, "concat");
        row("inferPlain", Phase::kInferring, "infer");
        row("distDecrypt", Phase::kDecrypting, "distDecrypt");
      }
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const BenchRecord& a, const BenchRecord& b) {
                     return a.phase < b.phase;
                   });
  return out;
}

std::string BenchCsv(const std::vector<BenchRecord>& records) {
  std::string csv = "phase,N,wallTimeSec,bytes,params\n";
  for (const auto& r : records) {
    absl::StrAppend(&csv, r.phase, ",", r.parties, ",", r.wall_time_sec, ",",
                    r.bytes, ",", r.params, "\n");
  }
  return csv;
}

std::vector<ReferenceRow> ReferenceTable() {
  return {{"keygen", 54.45, 2988.24},
          {"inferPlain", 30.64, 154.2},
          {"inferCipher", 31.97, 154.2},
          {"distDecrypt", 7.34, 308.4}};
}

double AffineResidual(const std::vector<BenchRecord>& records,
                      const std::string& phase) {
  std::vector<std::pair<int64_t, int64_t>> pts;
  for (const auto& r : records) {
    if (r.phase == phase) {
      pts.push_back({r.parties, static_cast<int64_t>(r.bytes)});
    }
  }
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 3) return 0.0;
  // Exact test against the line through the end points, in integers.
  const auto [x0, y0] = pts.front();
  const auto [x1, y1] = pts.back();
  const __int128 dx = x1 - x0;
  double worst = 0;
  for (const auto& [x, y] : pts) {
    const __int128 r = static_cast<__int128>(y - y0) * dx -
                       static_cast<__int128>(y1 - y0) * (x - x0);
    worst = std::max(worst, std::fabs(static_cast<double>(r)) /
                                static_cast<double>(dx));
  }
  return worst;
}

}  // namespace vfi::bench
