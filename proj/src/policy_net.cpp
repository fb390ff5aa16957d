#include "lasrl/policy_net.hpp"

#include <cmath>
#include <string>

#include "lasrl/errors.hpp"
#include "lasrl/layers.hpp"

namespace lasrl {

PolicyNet::PolicyNet(std::vector<std::size_t> widths, Rng& init_rng) : widths_(std::move(widths)) {
  if (widths_.size() < 2) {
    throw ConfigError("policy network needs at least an input and an output width");
  }
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const std::size_t fan_in = widths_[l];
    const std::size_t fan_out = widths_[l + 1];
    if (fan_in == 0 || fan_out == 0) {
      throw ConfigError("policy network widths must be positive");
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(fan_out, fan_in);
    for (double& v : w.values()) {
      v = dist(init_rng);
    }
    params_.emplace_back("layer" + std::to_string(l) + ".weight", std::move(w));
    params_.emplace_back("layer" + std::to_string(l) + ".bias", Matrix(1, fan_out));
  }
}

void PolicyNet::set_layer_frozen(std::size_t layer, bool frozen) {
  if (layer >= num_layers()) {
    throw IndexError("layer " + std::to_string(layer) + " out of range");
  }
  weight(layer).frozen = frozen;
  bias(layer).frozen = frozen;
}

PolicyNet::Activations PolicyNet::forward(std::span<const double> x) const {
  if (x.size() != input_width()) {
    throw DimensionError("policy input of width " + std::to_string(x.size()) + ", expected " +
                         std::to_string(input_width()));
  }
  Activations acts;
  acts.inputs.reserve(num_layers());
  Vector h(x.begin(), x.end());
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Vector z = layers::dense_forward(weight(l).value, &bias(l).value, h);
    acts.inputs.push_back(std::move(h));
    if (l + 1 < num_layers()) {
      h = layers::tanh_forward(z);
    } else {
      acts.logits = std::move(z);
    }
  }
  return acts;
}

void PolicyNet::backward(const Activations& acts, std::span<const double> dlogits) {
  Vector dz(dlogits.begin(), dlogits.end());
  for (std::size_t l = num_layers(); l-- > 0;) {
    auto& w = weight(l);
    auto& b = bias(l);
    const bool need_below = l > 0;
    Vector dh = layers::dense_backward(w.value, w.frozen ? nullptr : &w.grad, b.frozen ? nullptr : &b.grad,
                                       acts.inputs[l], dz, need_below);
    if (need_below) {
      dz = layers::tanh_backward(acts.inputs[l], dh);
    }
  }
}

}  // namespace lasrl
