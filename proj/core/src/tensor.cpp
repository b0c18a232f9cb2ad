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

#include "specmtm/tensor.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace specmtm {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

const std::vector<double>& empty_data() {
  static const std::vector<double> kEmpty;
  return kEmpty;
}

using MatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                              Eigen::Dynamic, Eigen::RowMajor>>;
using MutMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(shape_product(shape_), 0.0)) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(std::move(data))) {
  if (data_->size() != shape_product(shape_)) {
    throw std::invalid_argument("Tensor: data size " +
                                std::to_string(data_->size()) +
                                " does not match shape " + shape_str());
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  return Tensor(std::move(shape));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  for (double& x : t.mut()) x = value;
  return t;
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::row(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> data) {
  return Tensor({rows, cols}, std::move(data));
}

std::size_t Tensor::size() const { return data_ ? data_->size() : 0; }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw std::logic_error("Tensor::rows: rank " + shape_str());
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw std::logic_error("Tensor::cols: rank " + shape_str());
  return shape_[1];
}

double Tensor::operator()(std::size_t i, std::size_t j) const {
  return data()[i * cols() + j];
}

double& Tensor::at(std::size_t i, std::size_t j) { return mut()[i * cols() + j]; }

double Tensor::item() const {
  if (size() != 1) {
    throw std::logic_error("Tensor::item on tensor of size " +
                           std::to_string(size()));
  }
  return data()[0];
}

const std::vector<double>& Tensor::data() const {
  return data_ ? *data_ : empty_data();
}

std::vector<double>& Tensor::mut() {
  if (!data_) {
    data_ = std::make_shared<std::vector<double>>();
  } else if (data_.use_count() > 1) {
    data_ = std::make_shared<std::vector<double>>(*data_);
  }
  return *data_;
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  if (shape_product(shape) != size()) {
    throw std::invalid_argument("Tensor::reshaped: element count mismatch");
  }
  Tensor t = *this;
  t.shape_ = std::move(shape);
  return t;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << "x";
    os << shape_[i];
  }
  os << ")";
  return os.str();
}

bool Tensor::all_finite() const { return first_nonfinite() == size(); }

std::size_t Tensor::first_nonfinite() const {
  const auto& d = data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) return i;
  }
  return d.size();
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  auto& o = out.mut();
  const auto& bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a;
  auto& o = out.mut();
  const auto& bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor out = a;
  auto& o = out.mut();
  const auto& bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bd[i];
  return out;
}

Tensor scaled(const Tensor& a, double s) {
  Tensor out = a;
  for (double& x : out.mut()) x *= s;
  return out;
}

double dot_all(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot_all");
  const auto& ad = a.data();
  const auto& bd = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < ad.size(); ++i) acc += ad[i] * bd[i];
  return acc;
}

double sum_all(const Tensor& a) {
  double acc = 0.0;
  for (double x : a.data()) acc += x;
  return acc;
}

Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw std::invalid_argument("matmul: operands must be 2-D, got " +
                                a.shape_str() + " and " + b.shape_str());
  }
  const std::size_t am = trans_a ? a.cols() : a.rows();
  const std::size_t ak = trans_a ? a.rows() : a.cols();
  const std::size_t bk = trans_b ? b.cols() : b.rows();
  const std::size_t bn = trans_b ? b.rows() : b.cols();
  if (ak != bk) {
    throw std::invalid_argument("matmul: inner dimensions disagree, " +
                                a.shape_str() + (trans_a ? "^T" : "") + " * " +
                                b.shape_str() + (trans_b ? "^T" : ""));
  }
  Tensor out({am, bn});
  MatMap ma(a.data().data(), static_cast<Eigen::Index>(a.rows()),
            static_cast<Eigen::Index>(a.cols()));
  MatMap mb(b.data().data(), static_cast<Eigen::Index>(b.rows()),
            static_cast<Eigen::Index>(b.cols()));
  MutMap mo(out.mut().data(), static_cast<Eigen::Index>(am),
            static_cast<Eigen::Index>(bn));
  if (!trans_a && !trans_b) {
    mo.noalias() = ma * mb;
  } else if (!trans_a && trans_b) {
    mo.noalias() = ma * mb.transpose();
  } else if (trans_a && !trans_b) {
    mo.noalias() = ma.transpose() * mb;
  } else {
    mo.noalias() = ma.transpose() * mb.transpose();
  }
  return out;
}

void require_finite(const Tensor& t, const std::string& what) {
  std::size_t bad = t.first_nonfinite();
  if (bad != t.size()) {
    std::string where = std::to_string(bad);
    if (t.rank() == 2 && t.cols() > 0) {
      where = "(" + std::to_string(bad / t.cols()) + "," +
              std::to_string(bad % t.cols()) + ")";
    }
    throw std::invalid_argument(what + ": non-finite entry at index " + where);
  }
}

void require_same_shape(const Tensor& a, const Tensor& b,
                        const std::string& what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(what + ": shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
  }
}

}  // namespace specmtm
