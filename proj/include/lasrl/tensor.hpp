#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lasrl {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. The only numeric carrier in the
/// library besides plain vectors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v);
  bool all_finite() const;
  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

// y = a * x
Vector matvec(const Matrix& a, std::span<const double> x);
// y = a^T * x
Vector matvec_transposed(const Matrix& a, std::span<const double> x);
// a += scale * u v^T
void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v, double scale = 1.0);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

Vector softmax(std::span<const double> logits);
Vector log_softmax(std::span<const double> logits);

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;
};

/// Cross-entropy against q = (1-eps)*onehot(gold) + eps/|V|; gradient with
/// respect to the logits is softmax(logits) - q.
LossAndGrad cross_entropy_smoothed(std::span<const double> logits, std::size_t gold, double epsilon);

}  // namespace lasrl
