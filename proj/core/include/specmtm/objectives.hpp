// Copyright 2026 The specmtm authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPECMTM_OBJECTIVES_HPP
#define SPECMTM_OBJECTIVES_HPP

#include "specmtm/backbone.hpp"
#include "specmtm/spectral_ops.hpp"

namespace specmtm::objectives {

struct LossWeights {
  double gamma = 0.5;
  /// Toggles the temporal-branch dual (frequency-domain) term; turning it off
  /// together with the frequency branch gives plain masked reconstruction.
  bool use_freq_dual = true;
};

/// Timestamps belonging to masked windows, as an L' x C indicator matrix.
Tensor masked_window_rows(const backbone::MaskPlan& plan, std::size_t window,
                          std::size_t length, std::size_t channels);

/// Mean squared error over the raw timestamps of masked windows only.
/// Empty mask support yields 0.
engine::Var mse_temporal(const engine::Var& pred, const Tensor& gt,
                         const backbone::MaskPlan& plan, std::size_t window);
double mse_temporal(const Tensor& pred, const Tensor& gt,
                    const backbone::MaskPlan& plan, std::size_t window);

/// Mean over bins and channels of (d_re^2 + d_im^2).
engine::Var freq_loss(const spectral::SpectrumVar& pred,
                      const spectral::Spectrum& gt);
double freq_loss(const spectral::Spectrum& pred, const spectral::Spectrum& gt);

/// Visible windows filled from ground truth, masked windows from the
/// prediction; frequency losses run on this composite so the transform stays
/// global while the learning signal stays on masked content.
engine::Var composite_series(const engine::Var& pred, const Tensor& gt,
                             const backbone::MaskPlan& plan, std::size_t window);
Tensor composite_series(const Tensor& pred, const Tensor& gt,
                        const backbone::MaskPlan& plan, std::size_t window);

/// Four-term pre-training loss:
///   L_T(pred_T, gt) + L_F(F(composite(pred_T)), F(gt))
///   + gamma * [ L_F(zf_branch, F(gt)) + L_T(F^{-1}(zf_branch), gt) ]
/// where zf_branch is the frequency branch's series-space spectrum (already
/// composited by the model) and each dual term routes its branch through the
/// other domain.
engine::Var pretrain_loss(const engine::Var& pred_temporal,
                          const spectral::SpectrumVar& zf_branch,
                          const Tensor& gt_series,
                          const backbone::MaskPlan& plan, std::size_t window,
                          const LossWeights& weights, bool has_freq_branch);
double pretrain_loss(const Tensor& pred_temporal,
                     const spectral::Spectrum& zf_branch,
                     const Tensor& gt_series, const backbone::MaskPlan& plan,
                     std::size_t window, const LossWeights& weights);

/// Mean negative log-softmax of the true class. Rejects out-of-range labels.
engine::Var finetune_loss(const engine::Var& logits,
                          const std::vector<int>& labels);
double finetune_loss(const Tensor& logits, const std::vector<int>& labels);

}  // namespace specmtm::objectives

#endif  // SPECMTM_OBJECTIVES_HPP
