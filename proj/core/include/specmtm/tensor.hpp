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

#ifndef SPECMTM_TENSOR_HPP
#define SPECMTM_TENSOR_HPP

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace specmtm {

/// Dense row-major tensor of doubles. Data is shared copy-on-write, so
/// passing tensors by value is cheap; `mut()` detaches before mutation.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double value);
  static Tensor scalar(double value);
  static Tensor row(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  // 2-D accessors; throw unless rank() == 2.
  std::size_t rows() const;
  std::size_t cols() const;
  double operator()(std::size_t i, std::size_t j) const;
  double& at(std::size_t i, std::size_t j);

  double operator[](std::size_t flat) const { return data()[flat]; }
  double item() const;  // sole element of a 1-sized tensor

  const std::vector<double>& data() const;
  std::vector<double>& mut();

  Tensor reshaped(std::vector<std::size_t> shape) const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

  bool all_finite() const;
  /// Index of the first non-finite entry, or size() when all entries are
  /// finite. Used to name offenders in diagnostics.
  std::size_t first_nonfinite() const;

 private:
  std::vector<std::size_t> shape_;
  std::shared_ptr<std::vector<double>> data_;
};

// Value-level kernels shared by the module code and the engine ops.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scaled(const Tensor& a, double s);
double dot_all(const Tensor& a, const Tensor& b);
double sum_all(const Tensor& a);

/// a op b with optional transposes, 2-D only; backed by Eigen.
Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a = false,
              bool trans_b = false);

void require_finite(const Tensor& t, const std::string& what);
void require_same_shape(const Tensor& a, const Tensor& b,
                        const std::string& what);

}  // namespace specmtm

#endif  // SPECMTM_TENSOR_HPP
