#include "lasrl/layers.hpp"

#include <cmath>

#include "lasrl/errors.hpp"

namespace lasrl::layers {

Vector dense_forward(const Matrix& weight, const Matrix* bias, std::span<const double> x) {
  Vector y = matvec(weight, x);
  if (bias != nullptr) {
    if (bias->size() != y.size()) {
      throw DimensionError("dense bias " + bias->shape_string() + " does not match output width " +
                           std::to_string(y.size()));
    }
    const auto b = bias->values();
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += b[i];
    }
  }
  return y;
}

Vector dense_backward(const Matrix& weight, Matrix* weight_grad, Matrix* bias_grad, std::span<const double> x,
                      std::span<const double> dy, bool want_input_grad) {
  if (weight_grad != nullptr) {
    add_outer(*weight_grad, dy, x);
  }
  if (bias_grad != nullptr) {
    axpy(1.0, dy, bias_grad->values());
  }
  if (!want_input_grad) {
    return {};
  }
  return matvec_transposed(weight, dy);
}

Vector tanh_forward(std::span<const double> x) {
  Vector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::tanh(x[i]);
  }
  return y;
}

Vector tanh_backward(std::span<const double> y, std::span<const double> dy) {
  Vector dx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    dx[i] = dy[i] * (1.0 - y[i] * y[i]);
  }
  return dx;
}

Vector embedding_forward(const Matrix& table, std::size_t id) {
  if (id >= table.rows()) {
    throw IndexError("token id " + std::to_string(id) + " outside embedding table of " +
                     std::to_string(table.rows()) + " rows");
  }
  const auto r = table.row(id);
  return Vector(r.begin(), r.end());
}

void embedding_backward(Matrix& table_grad, std::size_t id, std::span<const double> dy, double scale) {
  axpy(scale, dy, table_grad.row(id));
}

Vector mean_pool_forward(const Matrix& table, std::span<const std::size_t> ids) {
  Vector out(table.cols(), 0.0);
  if (ids.empty()) {
    return out;
  }
  for (std::size_t id : ids) {
    if (id >= table.rows()) {
      throw IndexError("token id " + std::to_string(id) + " outside embedding table of " +
                       std::to_string(table.rows()) + " rows");
    }
    axpy(1.0, table.row(id), out);
  }
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (double& v : out) {
    v *= inv;
  }
  return out;
}

void mean_pool_backward(Matrix& table_grad, std::span<const std::size_t> ids, std::span<const double> dy) {
  if (ids.empty()) {
    return;
  }
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (std::size_t id : ids) {
    axpy(inv, dy, table_grad.row(id));
  }
}

}  // namespace lasrl::layers
