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

#include "specmtm/optim.hpp"

#include <algorithm>
#include <cmath>

namespace specmtm::engine {

AdamW::StepStatus AdamW::step(ParameterStore& store,
                              const std::vector<Tensor>& grads) {
  for (std::size_t i = 0; i < store.count() && i < grads.size(); ++i) {
    if (grads[i].size() != 0 && !grads[i].all_finite()) {
      return {false, "non-finite gradient for parameter '" +
                         store.entry(i).name + "'; step rejected"};
    }
  }
  if (m_.size() < store.count()) {
    m_.resize(store.count());
    v_.resize(store.count());
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(step_));
  const bool round_f32 = compute_precision() == Precision::f32;
  for (std::size_t i = 0; i < store.count(); ++i) {
    auto& entry = store.entry(i);
    if (!entry.trainable || i >= grads.size() || grads[i].size() == 0) {
      continue;
    }
    if (m_[i].size() == 0) {
      m_[i] = Tensor(entry.value.shape());
      v_[i] = Tensor(entry.value.shape());
    }
    auto& theta = entry.value.mut();
    auto& m = m_[i].mut();
    auto& v = v_[i].mut();
    const auto& g = grads[i].data();
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = options_.beta1 * m[k] + (1.0 - options_.beta1) * g[k];
      v[k] = options_.beta2 * v[k] + (1.0 - options_.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      theta[k] -= options_.lr * (m_hat / (std::sqrt(v_hat) + options_.eps) +
                                 options_.weight_decay * theta[k]);
      if (round_f32) theta[k] = static_cast<double>(static_cast<float>(theta[k]));
    }
  }
  return {};
}

FdResult fd_check(ParameterStore& store,
                  const std::vector<ParamRef>& params_to_probe,
                  const std::function<Var(Graph&)>& build_loss,
                  const FdOptions& options) {
  // Analytic pass.
  std::vector<Tensor> analytic;
  {
    Graph g(store);
    Var loss = build_loss(g);
    backward(loss);
    g.harvest(analytic, 1.0);
  }
  auto eval = [&]() {
    Graph g(store);
    return build_loss(g).value().item();
  };

  Rng rng(options.seed);
  FdResult result;
  for (ParamRef ref : params_to_probe) {
    auto& entry = store.entry(ref);
    const std::size_t n = entry.value.size();
    if (n == 0) continue;
    std::vector<std::size_t> coords;
    if (n <= options.probes_per_tensor) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      Rng local = rng.split(entry.name);
      for (std::size_t i = 0; i < options.probes_per_tensor; ++i) {
        coords.push_back(local.next_below(n));
      }
      std::sort(coords.begin(), coords.end());
      coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    }
    const Tensor& grad =
        ref.index < static_cast<int>(analytic.size()) &&
                analytic[ref.index].size() != 0
            ? analytic[ref.index]
            : Tensor(entry.value.shape());
    for (std::size_t c : coords) {
      const double original = entry.value.data()[c];
      entry.value.mut()[c] = original + options.step;
      const double plus = eval();
      entry.value.mut()[c] = original - options.step;
      const double minus = eval();
      entry.value.mut()[c] = original;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = grad.data()[c];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      const double rel = std::fabs(a - numeric) / denom;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = entry.name;
        result.worst_coord = c;
      }
    }
  }
  return result;
}

}  // namespace specmtm::engine
