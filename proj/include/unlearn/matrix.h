// Copyright 2026 The Unlearn Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UNLEARN_MATRIX_H_
#define UNLEARN_MATRIX_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace unlearn {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool SameShape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool AllFinite() const;
  void Fill(double v);

  // Rows [indices] gathered into a new matrix.
  Matrix GatherRows(std::span<const std::size_t> indices) const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a(n×k) · b(k×m). Summation order is fixed (k ascending).
Matrix MatMul(const Matrix& a, const Matrix& b);
// aᵀ · b, a(k×n), b(k×m) -> n×m.
Matrix MatMulTransposeA(const Matrix& a, const Matrix& b);
// a · bᵀ, a(n×k), b(m×k) -> n×m.
Matrix MatMulTransposeB(const Matrix& a, const Matrix& b);

// [a | b] column concatenation.
Matrix ConcatCols(const Matrix& a, const Matrix& b);
// Columns [begin, end) of m.
Matrix SliceCols(const Matrix& m, std::size_t begin, std::size_t end);

std::string ShapeString(const Matrix& m);

}  // namespace unlearn

#endif  // UNLEARN_MATRIX_H_
