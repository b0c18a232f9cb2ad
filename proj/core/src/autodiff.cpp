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

#include "specmtm/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

#include "specmtm/bernstein.hpp"

namespace specmtm::engine {

namespace {

std::atomic<Precision> g_precision{Precision::f64};
std::atomic<std::uint64_t> g_next_id{1};

NodePtr make_node(Tensor value, std::vector<NodePtr> parents,
                  std::function<void(Node&)> backprop) {
  auto node = std::make_shared<Node>();
  node->value = apply_precision(std::move(value));
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  for (const auto& p : parents) {
    if (p && p->requires_grad) {
      node->requires_grad = true;
      break;
    }
  }
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backprop = std::move(backprop);
  }
  return node;
}

Var wrap(NodePtr n) { return Var(std::move(n)); }

const Tensor& val(const Var& v) { return v.value(); }

void check_defined(const Var& v, const char* op) {
  if (!v.defined()) throw std::logic_error(std::string(op) + ": undefined Var");
}

}  // namespace

void set_compute_precision(Precision p) { g_precision.store(p); }

Precision compute_precision() { return g_precision.load(); }

Tensor apply_precision(Tensor t) {
  if (g_precision.load() == Precision::f64) return t;
  for (double& x : t.mut()) x = static_cast<double>(static_cast<float>(x));
  return t;
}

void Node::accumulate(const Tensor& g) {
  if (!has_grad()) grad = Tensor(value.shape());
  auto& acc = grad.mut();
  const auto& gd = g.data();
  if (acc.size() != gd.size()) {
    throw std::logic_error("gradient shape mismatch during accumulate");
  }
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += gd[i];
}

const Tensor& Var::value() const {
  if (!node_) throw std::logic_error("Var::value on undefined Var");
  return node_->value;
}

Tensor Var::grad() const {
  if (!node_) throw std::logic_error("Var::grad on undefined Var");
  if (!node_->has_grad()) return Tensor(node_->value.shape());
  return node_->grad;
}

bool Var::requires_grad() const { return node_ && node_->requires_grad; }

Var leaf(Tensor value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value = apply_precision(std::move(value));
  node->requires_grad = requires_grad;
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  return wrap(node);
}

Var constant(Tensor value) { return leaf(std::move(value), false); }

void backward(const Var& root) {
  check_defined(root, "backward");
  if (root.value().size() != 1) {
    throw std::invalid_argument("backward: root must be scalar, got shape " +
                                root.value().shape_str());
  }
  NodePtr r = root.node();
  if (!r->requires_grad) return;  // loss constant w.r.t. every leaf
  // Reachable requires-grad subgraph; ids descend along a valid topo order.
  std::vector<NodePtr> order;
  std::unordered_set<Node*> seen;
  std::vector<NodePtr> stack{r};
  seen.insert(r.get());
  while (!stack.empty()) {
    NodePtr n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p && p->requires_grad && seen.insert(p.get()).second) {
        stack.push_back(p);
      }
    }
  }
  std::sort(order.begin(), order.end(),
            [](const NodePtr& a, const NodePtr& b) { return a->id > b->id; });
  r->accumulate(Tensor(r->value.shape(), {1.0}));
  for (const auto& n : order) {
    if (n->backprop && n->has_grad()) n->backprop(*n);
  }
}

Var add(const Var& a, const Var& b) {
  check_defined(a, "add");
  check_defined(b, "add");
  Tensor out = specmtm::add(val(a), val(b));
  NodePtr pa = a.node(), pb = b.node();
  return wrap(make_node(std::move(out), {pa, pb}, [pa, pb](Node& n) {
    if (pa->requires_grad) pa->accumulate(n.grad);
    if (pb->requires_grad) pb->accumulate(n.grad);
  }));
}

Var sub(const Var& a, const Var& b) {
  check_defined(a, "sub");
  check_defined(b, "sub");
  Tensor out = specmtm::sub(val(a), val(b));
  NodePtr pa = a.node(), pb = b.node();
  return wrap(make_node(std::move(out), {pa, pb}, [pa, pb](Node& n) {
    if (pa->requires_grad) pa->accumulate(n.grad);
    if (pb->requires_grad) pb->accumulate(scaled(n.grad, -1.0));
  }));
}

Var mul(const Var& a, const Var& b) {
  check_defined(a, "mul");
  check_defined(b, "mul");
  Tensor out = hadamard(val(a), val(b));
  NodePtr pa = a.node(), pb = b.node();
  return wrap(make_node(std::move(out), {pa, pb}, [pa, pb](Node& n) {
    if (pa->requires_grad) pa->accumulate(hadamard(n.grad, pb->value));
    if (pb->requires_grad) pb->accumulate(hadamard(n.grad, pa->value));
  }));
}

Var scale(const Var& a, double s) {
  check_defined(a, "scale");
  Tensor out = scaled(val(a), s);
  NodePtr pa = a.node();
  return wrap(make_node(std::move(out), {pa}, [pa, s](Node& n) {
    pa->accumulate(scaled(n.grad, s));
  }));
}

Var square(const Var& a) { return mul(a, a); }

Var reshape(const Var& a, std::vector<std::size_t> shape) {
  check_defined(a, "reshape");
  Tensor out = val(a).reshaped(shape);
  NodePtr pa = a.node();
  return wrap(make_node(std::move(out), {pa}, [pa](Node& n) {
    pa->accumulate(n.grad.reshaped(pa->value.shape()));
  }));
}

Var matmul(const Var& a, const Var& b, bool trans_a, bool trans_b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  Tensor out = specmtm::matmul(val(a), val(b), trans_a, trans_b);
  NodePtr pa = a.node(), pb = b.node();
  return wrap(make_node(
      std::move(out), {pa, pb}, [pa, pb, trans_a, trans_b](Node& n) {
        const Tensor& g = n.grad;
        const Tensor& av = pa->value;
        const Tensor& bv = pb->value;
        if (pa->requires_grad) {
          Tensor da;
          if (!trans_a && !trans_b) {
            da = specmtm::matmul(g, bv, false, true);
          } else if (!trans_a && trans_b) {
            da = specmtm::matmul(g, bv, false, false);
          } else if (trans_a && !trans_b) {
            da = specmtm::matmul(bv, g, false, true);
          } else {
            da = specmtm::matmul(bv, g, true, true);
          }
          pa->accumulate(da);
        }
        if (pb->requires_grad) {
          Tensor db;
          if (!trans_a && !trans_b) {
            db = specmtm::matmul(av, g, true, false);
          } else if (!trans_a && trans_b) {
            db = specmtm::matmul(g, av, true, false);
          } else if (trans_a && !trans_b) {
            db = specmtm::matmul(av, g, false, false);
          } else {
            db = specmtm::matmul(g, av, true, true);
          }
          pb->accumulate(db);
        }
      }));
}

Var add_rowwise(const Var& x, const Var& row) {
  check_defined(x, "add_rowwise");
  check_defined(row, "add_rowwise");
  const Tensor& xv = val(x);
  const Tensor& rv = val(row);
  if (rv.rank() != 2 || rv.rows() != 1 || rv.cols() != xv.cols()) {
    throw std::invalid_argument("add_rowwise: row shape " + rv.shape_str() +
                                " incompatible with " + xv.shape_str());
  }
  Tensor out = xv;
  auto& o = out.mut();
  const auto& r = rv.data();
  const std::size_t cols = xv.cols();
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) o[i * cols + j] += r[j];
  }
  NodePtr px = x.node(), pr = row.node();
  return wrap(make_node(std::move(out), {px, pr}, [px, pr](Node& n) {
    if (px->requires_grad) px->accumulate(n.grad);
    if (pr->requires_grad) {
      const std::size_t cols = n.grad.cols();
      Tensor dr({1, cols});
      auto& d = dr.mut();
      const auto& g = n.grad.data();
      for (std::size_t i = 0; i < n.grad.rows(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) d[j] += g[i * cols + j];
      }
      pr->accumulate(dr);
    }
  }));
}

Var add_colwise(const Var& x, const Var& col) {
  check_defined(x, "add_colwise");
  check_defined(col, "add_colwise");
  const Tensor& xv = val(x);
  const Tensor& cv = val(col);
  if (cv.rank() != 2 || cv.cols() != 1 || cv.rows() != xv.rows()) {
    throw std::invalid_argument("add_colwise: column shape " + cv.shape_str() +
                                " incompatible with " + xv.shape_str());
  }
  Tensor out = xv;
  auto& o = out.mut();
  const auto& c = cv.data();
  const std::size_t cols = xv.cols();
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) o[i * cols + j] += c[i];
  }
  NodePtr px = x.node(), pc = col.node();
  return wrap(make_node(std::move(out), {px, pc}, [px, pc](Node& n) {
    if (px->requires_grad) px->accumulate(n.grad);
    if (pc->requires_grad) {
      const std::size_t cols = n.grad.cols();
      Tensor dc({n.grad.rows(), 1});
      auto& d = dc.mut();
      const auto& g = n.grad.data();
      for (std::size_t i = 0; i < n.grad.rows(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) d[i] += g[i * cols + j];
      }
      pc->accumulate(dc);
    }
  }));
}

Var linear(const Var& x, const Var& w, const Var& bias) {
  return add_rowwise(matmul(x, w, false, true), bias);
}

Var relu(const Var& a) {
  check_defined(a, "relu");
  Tensor out = val(a);
  for (double& x : out.mut()) x = x > 0.0 ? x : 0.0;
  NodePtr pa = a.node();
  return wrap(make_node(std::move(out), {pa}, [pa](Node& n) {
    Tensor da = n.grad;
    auto& d = da.mut();
    const auto& x = pa->value.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (x[i] <= 0.0) d[i] = 0.0;
    }
    pa->accumulate(da);
  }));
}

Var tanh_act(const Var& a) {
  check_defined(a, "tanh");
  Tensor out = val(a);
  for (double& x : out.mut()) x = std::tanh(x);
  NodePtr pa = a.node();
  Tensor saved = out;
  return wrap(make_node(std::move(out), {pa}, [pa, saved](Node& n) {
    Tensor da = n.grad;
    auto& d = da.mut();
    const auto& y = saved.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - y[i] * y[i];
    pa->accumulate(da);
  }));
}

Var gelu(const Var& a) {
  check_defined(a, "gelu");
  Tensor out = val(a);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (double& x : out.mut()) x = 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
  NodePtr pa = a.node();
  return wrap(make_node(std::move(out), {pa}, [pa, inv_sqrt2](Node& n) {
    Tensor da = n.grad;
    auto& d = da.mut();
    const auto& x = pa->value.data();
    const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double cdf = 0.5 * (1.0 + std::erf(x[i] * inv_sqrt2));
      const double pdf = inv_sqrt2pi * std::exp(-0.5 * x[i] * x[i]);
      d[i] *= cdf + x[i] * pdf;
    }
    pa->accumulate(da);
  }));
}

Var sum_all(const Var& a) {
  check_defined(a, "sum_all");
  Tensor out({1}, {specmtm::sum_all(val(a))});
  NodePtr pa = a.node();
  return wrap(make_node(std::move(out), {pa}, [pa](Node& n) {
    pa->accumulate(Tensor::full(pa->value.shape(), n.grad.item()));
  }));
}

Var mean_all(const Var& a) {
  const double inv = 1.0 / static_cast<double>(val(a).size());
  return scale(sum_all(a), inv);
}

Var mean_rows(const Var& a) {
  check_defined(a, "mean_rows");
  const Tensor& av = val(a);
  const std::size_t rows = av.rows(), cols = av.cols();
  Tensor out({1, cols});
  auto& o = out.mut();
  const auto& x = av.data();
  const double inv = 1.0 / static_cast<double>(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) o[j] += x[i * cols + j] * inv;
  }
  NodePtr pa = a.node();
  return wrap(make_node(std::move(out), {pa}, [pa, rows, cols, inv](Node& n) {
    Tensor da({rows, cols});
    auto& d = da.mut();
    const auto& g = n.grad.data();
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) d[i * cols + j] = g[j] * inv;
    }
    pa->accumulate(da);
  }));
}

namespace {

Tensor softmax_rows_value(const Tensor& a) {
  Tensor out = a;
  auto& o = out.mut();
  const std::size_t rows = a.rows(), cols = a.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    double m = o[i * cols];
    for (std::size_t j = 1; j < cols; ++j) m = std::max(m, o[i * cols + j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      o[i * cols + j] = std::exp(o[i * cols + j] - m);
      denom += o[i * cols + j];
    }
    for (std::size_t j = 0; j < cols; ++j) o[i * cols + j] /= denom;
  }
  return out;
}

}  // namespace

Var softmax_rows(const Var& a) {
  check_defined(a, "softmax_rows");
  Tensor out = softmax_rows_value(val(a));
  NodePtr pa = a.node();
  Tensor saved = out;
  return wrap(make_node(std::move(out), {pa}, [pa, saved](Node& n) {
    const std::size_t rows = saved.rows(), cols = saved.cols();
    Tensor da({rows, cols});
    auto& d = da.mut();
    const auto& y = saved.data();
    const auto& g = n.grad.data();
    for (std::size_t i = 0; i < rows; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < cols; ++j) {
        dot += g[i * cols + j] * y[i * cols + j];
      }
      for (std::size_t j = 0; j < cols; ++j) {
        d[i * cols + j] = y[i * cols + j] * (g[i * cols + j] - dot);
      }
    }
    pa->accumulate(da);
  }));
}

Var softmax_cols(const Var& a) {
  check_defined(a, "softmax_cols");
  const Tensor& av = val(a);
  const std::size_t rows = av.rows(), cols = av.cols();
  Tensor out = av;
  auto& o = out.mut();
  for (std::size_t j = 0; j < cols; ++j) {
    double m = o[j];
    for (std::size_t i = 1; i < rows; ++i) m = std::max(m, o[i * cols + j]);
    double denom = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      o[i * cols + j] = std::exp(o[i * cols + j] - m);
      denom += o[i * cols + j];
    }
    for (std::size_t i = 0; i < rows; ++i) o[i * cols + j] /= denom;
  }
  NodePtr pa = a.node();
  Tensor saved = out;
  return wrap(make_node(std::move(out), {pa}, [pa, saved](Node& n) {
    const std::size_t rows = saved.rows(), cols = saved.cols();
    Tensor da({rows, cols});
    auto& d = da.mut();
    const auto& y = saved.data();
    const auto& g = n.grad.data();
    for (std::size_t j = 0; j < cols; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        dot += g[i * cols + j] * y[i * cols + j];
      }
      for (std::size_t i = 0; i < rows; ++i) {
        d[i * cols + j] = y[i * cols + j] * (g[i * cols + j] - dot);
      }
    }
    pa->accumulate(da);
  }));
}

Var log_sum_exp_rows(const Var& a) {
  check_defined(a, "log_sum_exp_rows");
  const Tensor& av = val(a);
  const std::size_t rows = av.rows(), cols = av.cols();
  Tensor out({rows, 1});
  auto& o = out.mut();
  const auto& x = av.data();
  for (std::size_t i = 0; i < rows; ++i) {
    double m = x[i * cols];
    for (std::size_t j = 1; j < cols; ++j) m = std::max(m, x[i * cols + j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < cols; ++j) denom += std::exp(x[i * cols + j] - m);
    o[i] = m + std::log(denom);
  }
  NodePtr pa = a.node();
  Tensor saved = out;
  return wrap(make_node(std::move(out), {pa}, [pa, saved](Node& n) {
    const Tensor& av2 = pa->value;
    const std::size_t rows = av2.rows(), cols = av2.cols();
    Tensor da({rows, cols});
    auto& d = da.mut();
    const auto& x = av2.data();
    const auto& lse = saved.data();
    const auto& g = n.grad.data();
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        d[i * cols + j] = g[i] * std::exp(x[i * cols + j] - lse[i]);
      }
    }
    pa->accumulate(da);
  }));
}

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias,
                    double eps) {
  check_defined(x, "layer_norm_rows");
  check_defined(gain, "layer_norm_rows");
  check_defined(bias, "layer_norm_rows");
  const Tensor& xv = val(x);
  const std::size_t rows = xv.rows(), cols = xv.cols();
  Tensor normalized({rows, cols});
  Tensor inv_std({rows, 1});
  Tensor out({rows, cols});
  {
    auto& nh = normalized.mut();
    auto& is = inv_std.mut();
    auto& o = out.mut();
    const auto& xd = xv.data();
    const auto& gd = val(gain).data();
    const auto& bd = val(bias).data();
    for (std::size_t i = 0; i < rows; ++i) {
      double mean = 0.0;
      for (std::size_t j = 0; j < cols; ++j) mean += xd[i * cols + j];
      mean /= static_cast<double>(cols);
      double var = 0.0;
      for (std::size_t j = 0; j < cols; ++j) {
        const double c = xd[i * cols + j] - mean;
        var += c * c;
      }
      var /= static_cast<double>(cols);
      is[i] = 1.0 / std::sqrt(var + eps);
      for (std::size_t j = 0; j < cols; ++j) {
        nh[i * cols + j] = (xd[i * cols + j] - mean) * is[i];
        o[i * cols + j] = nh[i * cols + j] * gd[j] + bd[j];
      }
    }
  }
  NodePtr px = x.node(), pg = gain.node(), pb = bias.node();
  return wrap(make_node(
      std::move(out), {px, pg, pb},
      [px, pg, pb, normalized, inv_std, rows, cols](Node& n) {
        const auto& g = n.grad.data();
        const auto& xhat = normalized.data();
        const auto& is = inv_std.data();
        const auto& gd = pg->value.data();
        if (pg->requires_grad) {
          Tensor dg({1, cols});
          auto& d = dg.mut();
          for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
              d[j] += g[i * cols + j] * xhat[i * cols + j];
            }
          }
          pg->accumulate(dg);
        }
        if (pb->requires_grad) {
          Tensor db({1, cols});
          auto& d = db.mut();
          for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) d[j] += g[i * cols + j];
          }
          pb->accumulate(db);
        }
        if (px->requires_grad) {
          Tensor dx({rows, cols});
          auto& d = dx.mut();
          const double inv_cols = 1.0 / static_cast<double>(cols);
          for (std::size_t i = 0; i < rows; ++i) {
            double mean_gh = 0.0, mean_ghx = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
              const double gh = g[i * cols + j] * gd[j];
              mean_gh += gh;
              mean_ghx += gh * xhat[i * cols + j];
            }
            mean_gh *= inv_cols;
            mean_ghx *= inv_cols;
            for (std::size_t j = 0; j < cols; ++j) {
              const double gh = g[i * cols + j] * gd[j];
              d[i * cols + j] =
                  is[i] * (gh - mean_gh - xhat[i * cols + j] * mean_ghx);
            }
          }
          px->accumulate(dx);
        }
      }));
}

Var slice_cols(const Var& a, std::size_t from, std::size_t count) {
  check_defined(a, "slice_cols");
  const Tensor& av = val(a);
  const std::size_t rows = av.rows(), cols = av.cols();
  if (from + count > cols) {
    throw std::invalid_argument("slice_cols: range out of bounds");
  }
  Tensor out({rows, count});
  auto& o = out.mut();
  const auto& x = av.data();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      o[i * count + j] = x[i * cols + from + j];
    }
  }
  NodePtr pa = a.node();
  return wrap(
      make_node(std::move(out), {pa}, [pa, from, count, rows, cols](Node& n) {
        Tensor da({rows, cols});
        auto& d = da.mut();
        const auto& g = n.grad.data();
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < count; ++j) {
            d[i * cols + from + j] = g[i * count + j];
          }
        }
        pa->accumulate(da);
      }));
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty list");
  const std::size_t rows = val(parts[0]).rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (val(p).rows() != rows) {
      throw std::invalid_argument("concat_cols: row count mismatch");
    }
    total += val(p).cols();
  }
  Tensor out({rows, total});
  auto& o = out.mut();
  std::size_t offset = 0;
  std::vector<NodePtr> parents;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    const Tensor& pv = val(p);
    const std::size_t w = pv.cols();
    const auto& x = pv.data();
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        o[i * total + offset + j] = x[i * w + j];
      }
    }
    offset += w;
    parents.push_back(p.node());
    widths.push_back(w);
  }
  return wrap(make_node(std::move(out), parents,
                        [parents, widths, rows, total](Node& n) {
                          const auto& g = n.grad.data();
                          std::size_t offset = 0;
                          for (std::size_t k = 0; k < parents.size(); ++k) {
                            const std::size_t w = widths[k];
                            if (parents[k]->requires_grad) {
                              Tensor dp({rows, w});
                              auto& d = dp.mut();
                              for (std::size_t i = 0; i < rows; ++i) {
                                for (std::size_t j = 0; j < w; ++j) {
                                  d[i * w + j] = g[i * total + offset + j];
                                }
                              }
                              parents[k]->accumulate(dp);
                            }
                            offset += w;
                          }
                        }));
}

Var gather_rows(const Var& a, std::vector<std::size_t> indices) {
  check_defined(a, "gather_rows");
  const Tensor& av = val(a);
  const std::size_t cols = av.cols();
  for (std::size_t idx : indices) {
    if (idx >= av.rows()) {
      throw std::invalid_argument("gather_rows: index " + std::to_string(idx) +
                                  " out of range for " + av.shape_str());
    }
  }
  Tensor out({indices.size(), cols});
  auto& o = out.mut();
  const auto& x = av.data();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      o[i * cols + j] = x[indices[i] * cols + j];
    }
  }
  NodePtr pa = a.node();
  return wrap(make_node(std::move(out), {pa},
                        [pa, indices = std::move(indices), cols](Node& n) {
                          Tensor da(pa->value.shape());
                          auto& d = da.mut();
                          const auto& g = n.grad.data();
                          for (std::size_t i = 0; i < indices.size(); ++i) {
                            for (std::size_t j = 0; j < cols; ++j) {
                              d[indices[i] * cols + j] += g[i * cols + j];
                            }
                          }
                          pa->accumulate(da);
                        }));
}

Var scatter_rows(const Var& visible, const Var& fill_row,
                 std::vector<std::size_t> visible_indices,
                 std::size_t total_rows) {
  check_defined(visible, "scatter_rows");
  check_defined(fill_row, "scatter_rows");
  const Tensor& vv = val(visible);
  const Tensor& fv = val(fill_row);
  const std::size_t cols = vv.cols();
  if (fv.rank() != 2 || fv.rows() != 1 || fv.cols() != cols) {
    throw std::invalid_argument("scatter_rows: fill row shape " +
                                fv.shape_str() + " incompatible");
  }
  if (vv.rows() != visible_indices.size()) {
    throw std::invalid_argument(
        "scatter_rows: visible rows " + std::to_string(vv.rows()) +
        " != index count " + std::to_string(visible_indices.size()));
  }
  std::vector<bool> is_visible(total_rows, false);
  for (std::size_t idx : visible_indices) {
    if (idx >= total_rows) {
      throw std::invalid_argument("scatter_rows: index out of range");
    }
    is_visible[idx] = true;
  }
  Tensor out({total_rows, cols});
  auto& o = out.mut();
  const auto& v = vv.data();
  const auto& f = fv.data();
  for (std::size_t i = 0; i < visible_indices.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      o[visible_indices[i] * cols + j] = v[i * cols + j];
    }
  }
  for (std::size_t r = 0; r < total_rows; ++r) {
    if (!is_visible[r]) {
      for (std::size_t j = 0; j < cols; ++j) o[r * cols + j] = f[j];
    }
  }
  NodePtr pv = visible.node(), pf = fill_row.node();
  return wrap(make_node(
      std::move(out), {pv, pf},
      [pv, pf, visible_indices = std::move(visible_indices), is_visible, cols,
       total_rows](Node& n) {
        const auto& g = n.grad.data();
        if (pv->requires_grad) {
          Tensor dv({visible_indices.size(), cols});
          auto& d = dv.mut();
          for (std::size_t i = 0; i < visible_indices.size(); ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
              d[i * cols + j] = g[visible_indices[i] * cols + j];
            }
          }
          pv->accumulate(dv);
        }
        if (pf->requires_grad) {
          Tensor df({1, cols});
          auto& d = df.mut();
          for (std::size_t r = 0; r < total_rows; ++r) {
            if (!is_visible[r]) {
              for (std::size_t j = 0; j < cols; ++j) d[j] += g[r * cols + j];
            }
          }
          pf->accumulate(df);
        }
      }));
}

Var select_entry(const Var& a, std::size_t i, std::size_t j) {
  check_defined(a, "select_entry");
  const Tensor& av = val(a);
  if (i >= av.rows() || j >= av.cols()) {
    throw std::invalid_argument("select_entry: index out of range");
  }
  Tensor out({1, 1}, {av(i, j)});
  NodePtr pa = a.node();
  return wrap(make_node(std::move(out), {pa}, [pa, i, j](Node& n) {
    Tensor da(pa->value.shape());
    da.at(i, j) = n.grad.item();
    pa->accumulate(da);
  }));
}

Var complex_abs(const Var& re, const Var& im) {
  check_defined(re, "complex_abs");
  check_defined(im, "complex_abs");
  require_same_shape(val(re), val(im), "complex_abs");
  Tensor out = val(re);
  auto& o = out.mut();
  const auto& imd = val(im).data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::hypot(o[i], imd[i]);
  NodePtr pr = re.node(), pi = im.node();
  Tensor saved = out;
  return wrap(make_node(std::move(out), {pr, pi}, [pr, pi, saved](Node& n) {
    const auto& g = n.grad.data();
    const auto& mag = saved.data();
    if (pr->requires_grad) {
      Tensor dr(pr->value.shape());
      auto& d = dr.mut();
      const auto& rv = pr->value.data();
      for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = mag[i] > 0.0 ? g[i] * rv[i] / mag[i] : 0.0;
      }
      pr->accumulate(dr);
    }
    if (pi->requires_grad) {
      Tensor di(pi->value.shape());
      auto& d = di.mut();
      const auto& iv = pi->value.data();
      for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = mag[i] > 0.0 ? g[i] * iv[i] / mag[i] : 0.0;
      }
      pi->accumulate(di);
    }
  }));
}

Var bernstein_mix(const Var& theta, const Var& w) {
  check_defined(theta, "bernstein_mix");
  check_defined(w, "bernstein_mix");
  const Tensor& tv = val(theta);
  const Tensor& wv = val(w);
  if (tv.cols() != wv.cols()) {
    throw std::invalid_argument("bernstein_mix: channel mismatch " +
                                tv.shape_str() + " vs " + wv.shape_str());
  }
  const std::size_t order = tv.rows() - 1;
  const std::size_t bins = wv.rows(), d = wv.cols();
  Tensor out({bins, d});
  {
    auto& o = out.mut();
    const auto& th = tv.data();
    const auto& wd = wv.data();
    std::vector<double> basis(order + 1);
    for (std::size_t s = 0; s < bins; ++s) {
      for (std::size_t c = 0; c < d; ++c) {
        bernstein_basis_values(order, wd[s * d + c], basis.data());
        double acc = 0.0;
        for (std::size_t k = 0; k <= order; ++k) {
          acc += th[k * d + c] * basis[k];
        }
        o[s * d + c] = acc;
      }
    }
  }
  NodePtr pt = theta.node(), pw = w.node();
  return wrap(
      make_node(std::move(out), {pt, pw}, [pt, pw, order, bins, d](Node& n) {
        const auto& g = n.grad.data();
        const auto& th = pt->value.data();
        const auto& wd = pw->value.data();
        std::vector<double> basis(order + 1);
        Tensor dt({order + 1, d});
        Tensor dw({bins, d});
        auto& dtd = dt.mut();
        auto& dwd = dw.mut();
        for (std::size_t s = 0; s < bins; ++s) {
          for (std::size_t c = 0; c < d; ++c) {
            const double gv = g[s * d + c];
            if (pt->requires_grad) {
              bernstein_basis_values(order, wd[s * d + c], basis.data());
              for (std::size_t k = 0; k <= order; ++k) {
                dtd[k * d + c] += gv * basis[k];
              }
            }
            if (pw->requires_grad) {
              bernstein_basis_derivatives(order, wd[s * d + c], basis.data());
              double acc = 0.0;
              for (std::size_t k = 0; k <= order; ++k) {
                acc += th[k * d + c] * basis[k];
              }
              dwd[s * d + c] = gv * acc;
            }
          }
        }
        if (pt->requires_grad) pt->accumulate(dt);
        if (pw->requires_grad) pw->accumulate(dw);
      }));
}

Var per_channel_gate(const Var& w_all, const Var& a, std::size_t coeff_count) {
  check_defined(w_all, "per_channel_gate");
  check_defined(a, "per_channel_gate");
  const Tensor& wv = val(w_all);
  const Tensor& av = val(a);
  const std::size_t bins = av.rows(), d = av.cols();
  if (wv.rows() != d * coeff_count || wv.cols() != bins) {
    throw std::invalid_argument("per_channel_gate: weight shape " +
                                wv.shape_str() + " incompatible");
  }
  Tensor out({coeff_count, d});
  {
    auto& o = out.mut();
    const auto& wd = wv.data();
    const auto& ad = av.data();
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t k = 0; k < coeff_count; ++k) {
        const double* wrow = wd.data() + (c * coeff_count + k) * bins;
        double acc = 0.0;
        for (std::size_t s = 0; s < bins; ++s) acc += wrow[s] * ad[s * d + c];
        o[k * d + c] = acc;
      }
    }
  }
  NodePtr pw = w_all.node(), pa = a.node();
  return wrap(make_node(
      std::move(out), {pw, pa}, [pw, pa, coeff_count, bins, d](Node& n) {
        const auto& g = n.grad.data();
        const auto& wd = pw->value.data();
        const auto& ad = pa->value.data();
        if (pw->requires_grad) {
          Tensor dwt(pw->value.shape());
          auto& dw = dwt.mut();
          for (std::size_t c = 0; c < d; ++c) {
            for (std::size_t k = 0; k < coeff_count; ++k) {
              const double gv = g[k * d + c];
              double* row = dw.data() + (c * coeff_count + k) * bins;
              for (std::size_t s = 0; s < bins; ++s) {
                row[s] += gv * ad[s * d + c];
              }
            }
          }
          pw->accumulate(dwt);
        }
        if (pa->requires_grad) {
          Tensor dat(pa->value.shape());
          auto& da = dat.mut();
          for (std::size_t c = 0; c < d; ++c) {
            for (std::size_t k = 0; k < coeff_count; ++k) {
              const double gv = g[k * d + c];
              const double* wrow = wd.data() + (c * coeff_count + k) * bins;
              for (std::size_t s = 0; s < bins; ++s) {
                da[s * d + c] += gv * wrow[s];
              }
            }
          }
          pa->accumulate(dat);
        }
      }));
}

}  // namespace specmtm::engine
