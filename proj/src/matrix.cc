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

#include "unlearn/matrix.h"

#include <cmath>
#include <sstream>

#include "unlearn/error.h"

namespace unlearn {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Matrix::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::GatherRows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw IndexError("row index out of range");
    auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::string ShapeString(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul " + ShapeString(a) + " · " + ShapeString(b));
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double* o = out.row(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      const double* br = b.row(p).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
  return out;
}

Matrix MatMulTransposeA(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmulᵀ " + ShapeString(a) + " · " + ShapeString(b));
  }
  const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
  Matrix out(n, m);
  for (std::size_t p = 0; p < k; ++p) {
    const double* ar = a.row(p).data();
    const double* br = b.row(p).data();
    for (std::size_t i = 0; i < n; ++i) {
      const double av = ar[i];
      double* o = out.row(i).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
  return out;
}

Matrix MatMulTransposeB(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul·ᵀ " + ShapeString(a) + " · " + ShapeString(b));
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.row(i).data();
    for (std::size_t j = 0; j < m; ++j) {
      const double* br = b.row(j).data();
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      out(i, j) = s;
    }
  }
  return out;
}

Matrix ConcatCols(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("concat " + ShapeString(a) + " | " + ShapeString(b));
  }
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    std::copy(a.row(i).begin(), a.row(i).end(), dst.begin());
    std::copy(b.row(i).begin(), b.row(i).end(), dst.begin() + a.cols());
  }
  return out;
}

Matrix SliceCols(const Matrix& m, std::size_t begin, std::size_t end) {
  if (begin > end || end > m.cols()) {
    throw ShapeError("column slice out of range for " + ShapeString(m));
  }
  Matrix out(m.rows(), end - begin);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto src = m.row(i);
    std::copy(src.begin() + begin, src.begin() + end, out.row(i).begin());
  }
  return out;
}

}  // namespace unlearn
