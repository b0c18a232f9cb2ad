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

#include "specmtm/objectives.hpp"

#include <stdexcept>

namespace specmtm::objectives {

using engine::Var;
using spectral::Spectrum;
using spectral::SpectrumVar;

Tensor masked_window_rows(const backbone::MaskPlan& plan, std::size_t window,
                          std::size_t length, std::size_t channels) {
  Tensor ind({length, channels});
  auto& d = ind.mut();
  for (std::size_t w : plan.masked_indices) {
    for (std::size_t t = w * window; t < (w + 1) * window && t < length; ++t) {
      for (std::size_t c = 0; c < channels; ++c) d[t * channels + c] = 1.0;
    }
  }
  return ind;
}

Var mse_temporal(const Var& pred, const Tensor& gt,
                 const backbone::MaskPlan& plan, std::size_t window) {
  require_same_shape(pred.value(), gt, "mse_temporal");
  const std::size_t masked_steps = plan.masked_indices.size() * window;
  if (masked_steps == 0) return engine::constant(Tensor({1}));
  Tensor ind = masked_window_rows(plan, window, gt.rows(), gt.cols());
  Var diff = engine::mul(engine::sub(pred, engine::constant(gt)),
                         engine::constant(ind));
  const double count = static_cast<double>(masked_steps * gt.cols());
  return engine::scale(engine::sum_all(engine::square(diff)), 1.0 / count);
}

double mse_temporal(const Tensor& pred, const Tensor& gt,
                    const backbone::MaskPlan& plan, std::size_t window) {
  return mse_temporal(engine::constant(pred), gt, plan, window).value().item();
}

Var freq_loss(const SpectrumVar& pred, const Spectrum& gt) {
  require_same_shape(pred.re.value(), gt.re, "freq_loss");
  require_same_shape(pred.im.value(), gt.im, "freq_loss");
  Var dre = engine::sub(pred.re, engine::constant(gt.re));
  Var dim = engine::sub(pred.im, engine::constant(gt.im));
  Var total = engine::add(engine::sum_all(engine::square(dre)),
                          engine::sum_all(engine::square(dim)));
  return engine::scale(total, 1.0 / static_cast<double>(gt.re.size()));
}

double freq_loss(const Spectrum& pred, const Spectrum& gt) {
  return freq_loss(spectral::lift(pred), gt).value().item();
}

Var composite_series(const Var& pred, const Tensor& gt,
                     const backbone::MaskPlan& plan, std::size_t window) {
  require_same_shape(pred.value(), gt, "composite_series");
  Tensor ind = masked_window_rows(plan, window, gt.rows(), gt.cols());
  Tensor gt_visible = gt;
  auto& gv = gt_visible.mut();
  const auto& id = ind.data();
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= 1.0 - id[i];
  return engine::add(engine::mul(pred, engine::constant(ind)),
                     engine::constant(gt_visible));
}

Tensor composite_series(const Tensor& pred, const Tensor& gt,
                        const backbone::MaskPlan& plan, std::size_t window) {
  return composite_series(engine::constant(pred), gt, plan, window).value();
}

Var pretrain_loss(const Var& pred_temporal, const SpectrumVar& zf_branch,
                  const Tensor& gt_series, const backbone::MaskPlan& plan,
                  std::size_t window, const LossWeights& weights,
                  bool has_freq_branch) {
  Var loss = mse_temporal(pred_temporal, gt_series, plan, window);
  Spectrum gt_spec = spectral::dft_forward(gt_series);
  if (weights.use_freq_dual) {
    Var comp = composite_series(pred_temporal, gt_series, plan, window);
    loss = engine::add(loss, freq_loss(spectral::dft_graph(comp), gt_spec));
  }
  if (has_freq_branch && weights.gamma != 0.0) {
    Var branch = engine::add(
        freq_loss(zf_branch, gt_spec),
        mse_temporal(spectral::idft_real_graph(zf_branch), gt_series, plan,
                     window));
    loss = engine::add(loss, engine::scale(branch, weights.gamma));
  }
  return loss;
}

double pretrain_loss(const Tensor& pred_temporal, const Spectrum& zf_branch,
                     const Tensor& gt_series, const backbone::MaskPlan& plan,
                     std::size_t window, const LossWeights& weights) {
  return pretrain_loss(engine::constant(pred_temporal),
                       spectral::lift(zf_branch), gt_series, plan, window,
                       weights, true)
      .value()
      .item();
}

Var finetune_loss(const Var& logits, const std::vector<int>& labels) {
  const Tensor& lv = logits.value();
  if (lv.rows() != labels.size()) {
    throw std::invalid_argument("finetune_loss: " + std::to_string(lv.rows()) +
                                " logit rows vs " +
                                std::to_string(labels.size()) + " labels");
  }
  const int num_classes = static_cast<int>(lv.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw std::invalid_argument("finetune_loss: label " +
                                  std::to_string(labels[i]) + " at row " +
                                  std::to_string(i) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
    }
  }
  Var lse = engine::log_sum_exp_rows(logits);
  Var picked = engine::select_entry(logits, 0,
                                    static_cast<std::size_t>(labels[0]));
  for (std::size_t i = 1; i < labels.size(); ++i) {
    picked = engine::add(
        picked,
        engine::select_entry(logits, i, static_cast<std::size_t>(labels[i])));
  }
  Var total = engine::sub(engine::sum_all(lse),
                          engine::reshape(picked, {1}));
  return engine::scale(total, 1.0 / static_cast<double>(labels.size()));
}

double finetune_loss(const Tensor& logits, const std::vector<int>& labels) {
  return finetune_loss(engine::constant(logits), labels).value().item();
}

}  // namespace specmtm::objectives
