#include "dstgat/numeric/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dstgat {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: " + std::to_string(data_.size()) + " values do not fill " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

std::string shape_of(const Matrix& m) { return m.shape_string(); }

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_of(a) + " vs " + shape_of(b));
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + shape_of(a) + " by " + shape_of(b));
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.data() + i * n;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double s = a(i, k);
      if (s == 0.0) continue;
      const double* brow = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += s * brow[j];
    }
  }
  return out;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_transposed: cannot multiply " + shape_of(a) + " by transpose of " +
                         shape_of(b));
  }
  // Row-major axpy over a transposed copy vectorizes; a dot-product loop
  // does not without reassociation.
  return matmul(a, transpose(b));
}

Matrix transposed_matmul(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("transposed_matmul: cannot multiply transpose of " + shape_of(a) + " by " +
                         shape_of(b));
  }
  Matrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* brow = b.data() + k * n;
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double s = a(k, i);
      if (s == 0.0) continue;
      double* o = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += s * brow[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Matrix concat(const Matrix& a, const Matrix& b, Axis axis) {
  if (axis == Axis::kRows) {
    if (a.cols() != b.cols()) {
      throw DimensionError("concat(rows): column mismatch " + shape_of(a) + " vs " + shape_of(b));
    }
    std::vector<double> v(a.values().begin(), a.values().end());
    v.insert(v.end(), b.values().begin(), b.values().end());
    return Matrix(a.rows() + b.rows(), a.cols(), std::move(v));
  }
  if (a.rows() != b.rows()) {
    throw DimensionError("concat(cols): row mismatch " + shape_of(a) + " vs " + shape_of(b));
  }
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::copy(a.row(i).begin(), a.row(i).end(), out.row(i).begin());
    std::copy(b.row(i).begin(), b.row(i).end(), out.row(i).begin() + static_cast<long>(a.cols()));
  }
  return out;
}

std::pair<Matrix, Matrix> split(const Matrix& m, std::size_t first_extent, Axis axis) {
  if (axis == Axis::kRows) {
    if (first_extent > m.rows()) throw DimensionError("split(rows): extent exceeds " + shape_of(m));
    return {slice_rows(m, 0, first_extent), slice_rows(m, first_extent, m.rows())};
  }
  if (first_extent > m.cols()) throw DimensionError("split(cols): extent exceeds " + shape_of(m));
  Matrix a(m.rows(), first_extent);
  Matrix b(m.rows(), m.cols() - first_extent);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j < first_extent) {
        a(i, j) = m(i, j);
      } else {
        b(i, j - first_extent) = m(i, j);
      }
    }
  }
  return {std::move(a), std::move(b)};
}

Matrix slice_rows(const Matrix& m, std::size_t begin, std::size_t end) {
  if (begin > end || end > m.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") outside " + shape_of(m));
  }
  std::vector<double> v(m.data() + begin * m.cols(), m.data() + end * m.cols());
  return Matrix(end - begin, m.cols(), std::move(v));
}

Matrix masked_row_softmax(const Matrix& scores, const Matrix& mask) {
  require_same_shape(scores, mask, "masked_row_softmax");
  Matrix out(scores.rows(), scores.cols());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < scores.cols(); ++j)
      if (mask(i, j) != 0.0) mx = std::max(mx, scores(i, j));
    if (mx == -std::numeric_limits<double>::infinity()) continue;  // isolated row
    double total = 0.0;
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      if (mask(i, j) != 0.0) {
        out(i, j) = std::exp(scores(i, j) - mx);
        total += out(i, j);
      }
    }
    for (std::size_t j = 0; j < scores.cols(); ++j) out(i, j) /= total;
  }
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace dstgat
