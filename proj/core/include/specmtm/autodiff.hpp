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

#ifndef SPECMTM_AUTODIFF_HPP
#define SPECMTM_AUTODIFF_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "specmtm/tensor.hpp"

namespace specmtm::engine {

/// Compute precision for newly created graph values. f32 quantizes every op
/// output (and optimizer updates) to single precision while keeping one code
/// path; verification suites force f64.
enum class Precision { f64, f32 };
void set_compute_precision(Precision p);
Precision compute_precision();
Tensor apply_precision(Tensor t);

class Node;
using NodePtr = std::shared_ptr<Node>;

/// One vertex of the dynamically recorded graph. Construction order doubles
/// as a topological order, so reverse-mode just walks ids downward.
class Node {
 public:
  Tensor value;
  Tensor grad;  // allocated on first accumulate
  bool requires_grad = false;
  std::uint64_t id = 0;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backprop;

  void accumulate(const Tensor& g);
  bool has_grad() const { return grad.size() != 0; }
};

/// Cheap handle to a Node.
class Var {
 public:
  Var() = default;
  explicit Var(NodePtr node) : node_(std::move(node)) {}

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const;
  /// Accumulated gradient; zeros of the value's shape if backward never
  /// reached this node.
  Tensor grad() const;
  bool requires_grad() const;
  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

Var leaf(Tensor value, bool requires_grad = true);
Var constant(Tensor value);

/// Reverse-mode sweep from a scalar root. Throws on non-scalar roots.
/// Deterministic: nodes run in reverse construction order and every
/// accumulation is a fixed-order sequential sum.
void backward(const Var& root);

// --- elementwise & structural ---
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var square(const Var& a);
Var reshape(const Var& a, std::vector<std::size_t> shape);

// --- linear algebra ---
Var matmul(const Var& a, const Var& b, bool trans_a = false,
           bool trans_b = false);
/// x (n x in) * w^T (in x out) + bias (1 x out) broadcast over rows.
Var linear(const Var& x, const Var& w, const Var& bias);
Var add_rowwise(const Var& x, const Var& row);
Var add_colwise(const Var& x, const Var& col);

// --- activations ---
Var relu(const Var& a);
Var tanh_act(const Var& a);
Var gelu(const Var& a);

// --- reductions & normalization ---
Var sum_all(const Var& a);
Var mean_all(const Var& a);
Var mean_rows(const Var& a);
Var softmax_rows(const Var& a);
Var softmax_cols(const Var& a);
Var log_sum_exp_rows(const Var& a);
Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias,
                    double eps = 1e-5);

// --- selection / layout ---
Var slice_cols(const Var& a, std::size_t from, std::size_t count);
Var concat_cols(const std::vector<Var>& parts);
Var gather_rows(const Var& a, std::vector<std::size_t> indices);
/// Assembles a full-length sequence: rows listed in visible_indices come from
/// `visible` in order, every other row is `fill_row` (1 x d).
Var scatter_rows(const Var& visible, const Var& fill_row,
                 std::vector<std::size_t> visible_indices,
                 std::size_t total_rows);
Var select_entry(const Var& a, std::size_t i, std::size_t j);

// --- domain-specific kernels ---
/// Entrywise sqrt(re^2 + im^2).
Var complex_abs(const Var& re, const Var& im);
/// out[s,c] = sum_k theta[k,c] * B_k^K(w[s,c]) for the degree-K Bernstein
/// basis; theta is (K+1) x d, w is S x d with entries in [0,1].
Var bernstein_mix(const Var& theta, const Var& w);
/// Per-channel affine gate: w_all is (d*(K+1)) x S, rows grouped by channel;
/// out[k,c] = sum_s w_all[c*(K+1)+k, s] * a[s,c].
Var per_channel_gate(const Var& w_all, const Var& a, std::size_t coeff_count);

}  // namespace specmtm::engine

#endif  // SPECMTM_AUTODIFF_HPP
