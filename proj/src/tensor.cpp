#include "lasrl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "lasrl/errors.hpp"

namespace lasrl {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix payload of " + std::to_string(data_.size()) +
                         " values does not fit shape " + shape_string());
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw DimensionError("ragged matrix literal");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

void Matrix::fill(double v) {
  if (v == 0.0 && !std::signbit(v)) {
    std::memset(data_.data(), 0, data_.size() * sizeof(double));
  } else {
    std::fill(data_.begin(), data_.end(), v);
  }
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

std::string Matrix::shape_string() const {
  std::ostringstream os;
  os << rows_ << "x" << cols_;
  return os.str();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul shape mismatch: " + a.shape_string() + " times " + b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) {
        continue;
      }
      axpy(aik, b.row(k), out_row);
    }
  }
  return out;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw DimensionError("matvec shape mismatch: " + a.shape_string() + " times vector of " +
                         std::to_string(x.size()));
  }
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    y[i] = dot(a.row(i), x);
  }
  return y;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) {
    throw DimensionError("transposed matvec shape mismatch: " + a.shape_string() +
                         " (transposed) times vector of " + std::to_string(x.size()));
  }
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (x[i] != 0.0) {
      axpy(x[i], a.row(i), y);
    }
  }
  return y;
}

void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v, double scale) {
  if (a.rows() != u.size() || a.cols() != v.size()) {
    throw DimensionError("outer product " + std::to_string(u.size()) + "x" + std::to_string(v.size()) +
                         " does not match " + a.shape_string());
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double s = scale * u[i];
    if (s != 0.0) {
      axpy(s, v, a.row(i));
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  // Four independent partial sums let the compiler vectorize without
  // reassociation flags; the summation order is fixed, so results are
  // reproducible.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) {
    s0 += a[i] * b[i];
  }
  return (s0 + s1) + (s2 + s3);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const double* __restrict xp = x.data();
  double* __restrict yp = y.data();
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    yp[i] += alpha * xp[i];
  }
}

Vector softmax(std::span<const double> logits) {
  Vector out(logits.size());
  if (logits.empty()) {
    return out;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    total += out[i];
  }
  const double inv = 1.0 / total;
  for (double& p : out) {
    p *= inv;
  }
  return out;
}

Vector log_softmax(std::span<const double> logits) {
  Vector out(logits.size());
  if (logits.empty()) {
    return out;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) {
    total += std::exp(l - mx);
  }
  const double log_z = mx + std::log(total);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = logits[i] - log_z;
  }
  return out;
}

LossAndGrad cross_entropy_smoothed(std::span<const double> logits, std::size_t gold, double epsilon) {
  if (gold >= logits.size()) {
    throw IndexError("gold index " + std::to_string(gold) + " out of range for " +
                     std::to_string(logits.size()) + " logits");
  }
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw ConfigError("label smoothing epsilon must lie in [0, 1)");
  }
  const double n = static_cast<double>(logits.size());
  const Vector logp = log_softmax(logits);
  LossAndGrad out;
  out.grad.resize(logits.size());
  const double off = epsilon / n;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double q = (k == gold ? 1.0 - epsilon : 0.0) + off;
    if (q != 0.0) {
      out.loss -= q * logp[k];
    }
    out.grad[k] = std::exp(logp[k]) - q;
  }
  return out;
}

}  // namespace lasrl
