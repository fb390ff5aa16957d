#pragma once

#include <cstddef>
#include <span>

#include "lasrl/tensor.hpp"

// Layer primitives with hand-written gradients. Backward functions
// accumulate into the gradient matrices they are given; a null gradient
// pointer skips that accumulation (used for frozen groups).
namespace lasrl::layers {

// y = W x + b, with W of shape out x in and b of shape 1 x out (may be null).
Vector dense_forward(const Matrix& weight, const Matrix* bias, std::span<const double> x);

// Returns dL/dx = W^T dy when want_input_grad, otherwise an empty vector.
Vector dense_backward(const Matrix& weight, Matrix* weight_grad, Matrix* bias_grad, std::span<const double> x,
                      std::span<const double> dy, bool want_input_grad = true);

Vector tanh_forward(std::span<const double> x);
// Takes the forward *output* y = tanh(x).
Vector tanh_backward(std::span<const double> y, std::span<const double> dy);

Vector embedding_forward(const Matrix& table, std::size_t id);
void embedding_backward(Matrix& table_grad, std::size_t id, std::span<const double> dy, double scale = 1.0);

Vector mean_pool_forward(const Matrix& table, std::span<const std::size_t> ids);
void mean_pool_backward(Matrix& table_grad, std::span<const std::size_t> ids, std::span<const double> dy);

}  // namespace lasrl::layers
