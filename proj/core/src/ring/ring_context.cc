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

#include "vfi/ring/ring_context.h"

#include "vfi/common/status_macros.h"

namespace vfi::ring {

absl::StatusOr<std::shared_ptr<const RingContext>> RingContext::Create(
    const CryptoParams& params) {
  VFI_RETURN_IF_ERROR(params.Validate());
  std::shared_ptr<RingContext> ctx(new RingContext());
  ctx->params_ = params;
  ctx->params_hash_ = params.Hash();
  ctx->n_ = params.ring_degree;
  while ((size_t{1} << ctx->log_n_) < ctx->n_) ++ctx->log_n_;
  ctx->max_level_ = params.max_level();

  std::vector<uint64_t> all = params.moduli;
  all.push_back(params.special_moduli[0]);
  for (uint64_t q : all) {
    ctx->moduli_.emplace_back(q);
    ctx->ntt_.emplace_back(ctx->moduli_.back(), ctx->n_);
  }

  ctx->inv_q_.resize(all.size() - 1);
  for (int l = 1; l <= ctx->max_level_; ++l) {
    for (int j = 0; j < l; ++j) {
      const Modulus& qj = ctx->moduli_[j];
      ctx->inv_q_[l].push_back(qj.Inverse(qj.Reduce(all[l])));
    }
  }
  const uint64_t p = params.special_moduli[0];
  for (int j = 0; j <= ctx->max_level_; ++j) {
    const Modulus& qj = ctx->moduli_[j];
    ctx->p_mod_q_.push_back(qj.Reduce(p));
    ctx->inv_p_mod_q_.push_back(qj.Inverse(qj.Reduce(p)));
  }
  ctx->bitrev_.resize(ctx->n_);
  for (size_t i = 0; i < ctx->n_; ++i) {
    ctx->bitrev_[i] = BitReverse(static_cast<uint32_t>(i), ctx->log_n_);
  }
  return std::shared_ptr<const RingContext>(std::move(ctx));
}

}  // namespace vfi::ring
