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

#ifndef VFI_BENCH_BENCH_H_
#define VFI_BENCH_BENCH_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "vfi/einfer/model.h"
#include "vfi/protocol/session.h"
#include "vfi/ring/prng.h"
#include "vfi/ring/ring_context.h"
#include "vfi/vpack/vpack.h"

namespace vfi::bench {

// One measurement row. `bytes` is exactly the transcript sum of the matching
// protocol phase: keygen = setup, concat = aggregating (queries and input
// ciphertexts), inferPlain / inferCipher = inferring (result ciphertexts),
// distDecrypt = decrypting (key-switch shares). Times are advisory.
struct BenchRecord {
  std::string phase;
  int parties = 0;
  double wall_time_sec = 0.0;
  size_t bytes = 0;
  std::string params;
};

struct BenchOptions {
  ring::RingContextPtr ctx;
  einfer::ModelSpec model;      // with weights
  vpack::ClientDataset dataset;  // full feature matrix, split per N
  int min_parties = 2;
  int max_parties = 14;
  int queries = 1;
  bool plaintext_model = true;
  bool ciphertext_model = true;
  ring::Seed seed{};
};

// Sweeps N over [min_parties, max_parties] with even column partitions on
// the in-process transport.
absl::StatusOr<std::vector<BenchRecord>> RunBench(const BenchOptions& options);

// CSV with header "phase,N,wallTimeSec,bytes,params", one row per record.
std::string BenchCsv(const std::vector<BenchRecord>& records);

// Reference measurements for three clients and the 1198-parameter CNN,
// printed next to local numbers for context only.
struct ReferenceRow {
  const char* phase;
  double time_sec;
  double megabytes;
};
std::vector<ReferenceRow> ReferenceTable();

// Largest deviation of bytes(N) for `phase` from the line through the first
// and last points; 0 exactly when the bytes are affine in N.
double AffineResidual(const std::vector<BenchRecord>& records,
                      const std::string& phase);

}  // namespace vfi::bench

#endif  // VFI_BENCH_BENCH_H_
