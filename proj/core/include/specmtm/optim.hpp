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

#ifndef SPECMTM_OPTIM_HPP
#define SPECMTM_OPTIM_HPP

#include <functional>
#include <string>
#include <vector>

#include "specmtm/params.hpp"
#include "specmtm/rng.hpp"

namespace specmtm::engine {

/// AdamW with decoupled weight decay:
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
///   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta)
class AdamW {
 public:
  struct Options {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eps = 1e-8;
    double weight_decay = 3e-4;
  };

  struct StepStatus {
    bool applied = true;
    std::string message;
  };

  explicit AdamW(Options options = {}) : options_(options) {}

  /// Applies one update to every trainable parameter with a non-empty
  /// gradient slot. A non-finite gradient rejects the whole step.
  StepStatus step(ParameterStore& store, const std::vector<Tensor>& grads);

  std::size_t step_count() const { return step_; }
  const Options& options() const { return options_; }

 private:
  Options options_;
  std::size_t step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

struct FdOptions {
  double step = 1e-5;
  /// Coordinates probed per parameter tensor (all of them if smaller).
  std::size_t probes_per_tensor = 8;
  std::uint64_t seed = 2024;
};

struct FdResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_coord = 0;
};

/// Central-difference validation of reverse-mode gradients for the scalar
/// produced by `build_loss` (which must construct a fresh graph from the
/// store each call). Relative error uses max(|analytic|, |numeric|, 1e-8)
/// as denominator.
FdResult fd_check(ParameterStore& store,
                  const std::vector<ParamRef>& params_to_probe,
                  const std::function<Var(Graph&)>& build_loss,
                  const FdOptions& options = {});

}  // namespace specmtm::engine

#endif  // SPECMTM_OPTIM_HPP
