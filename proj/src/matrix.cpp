#include "redreg/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace redreg {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" + shape_of(a) +
                                " vs " + shape_of(b) + ")");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw std::invalid_argument("Matrix: " + std::to_string(values_.size()) +
                                " values for shape " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw std::invalid_argument("Matrix: ragged initializer rows");
    }
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::is_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: dimension mismatch (" + shape_of(a) + " * " +
                                shape_of(b) + ")");
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), c = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* out_row = &out(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      const double* b_row = b.row(p).data();
      for (std::size_t j = 0; j < c; ++j) out_row[j] += aip * b_row[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  if (!logits.is_finite()) {
    throw std::invalid_argument("softmax_rows: non-finite input");
  }
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto in_row = logits.row(i);
    double mx = in_row[0];
    for (double v : in_row) mx = std::max(mx, v);
    double sum = 0.0;
    auto out_row = out.row(i);
    for (std::size_t j = 0; j < in_row.size(); ++j) {
      out_row[j] = std::exp(in_row[j] - mx);
      sum += out_row[j];
    }
    for (std::size_t j = 0; j < in_row.size(); ++j) out_row[j] /= sum;
  }
  return out;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return std::sqrt(s);
}

double squared_distance(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "squared_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    s += d * d;
  }
  return s;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b.values()[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator-");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] -= b.values()[i];
  return out;
}

Matrix operator*(double s, const Matrix& m) {
  Matrix out = m;
  for (double& v : out.values()) v *= s;
  return out;
}

}  // namespace redreg
