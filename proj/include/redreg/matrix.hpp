#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace redreg {

// Dense row-major matrix of doubles. The only numeric container in the
// library; shape is fixed at construction.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);  // zero-filled
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool is_finite() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// a (r x k) times b (k x c); throws std::invalid_argument naming both shapes on
// a mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

// Row-wise softmax, stabilized by subtracting each row's maximum. Input must be
// finite; rows sum to 1 within roundoff regardless of entry magnitude.
Matrix softmax_rows(const Matrix& logits);

double frobenius_norm(const Matrix& m);

// Sum of squared entrywise differences; shapes must match.
double squared_distance(const Matrix& a, const Matrix& b);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& m);

}  // namespace redreg
