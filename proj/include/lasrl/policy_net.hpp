#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lasrl/optim.hpp"
#include "lasrl/rng.hpp"
#include "lasrl/tensor.hpp"

namespace lasrl {

/// Fully connected network: tanh on every hidden layer, linear output
/// (logits). Each layer owns a weight group (out x in) and a bias group
/// (1 x out), stored as consecutive ParamGroups so one layer can be frozen.
class PolicyNet {
 public:
  struct Activations {
    std::vector<Vector> inputs;  // inputs[l] is the input to layer l
    Vector logits;
  };

  // Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  PolicyNet(std::vector<std::size_t> widths, Rng& init_rng);

  std::size_t num_layers() const { return widths_.size() - 1; }
  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t input_width() const { return widths_.front(); }
  std::size_t output_width() const { return widths_.back(); }

  ParamGroup& weight(std::size_t layer) { return params_[2 * layer]; }
  const ParamGroup& weight(std::size_t layer) const { return params_[2 * layer]; }
  ParamGroup& bias(std::size_t layer) { return params_[2 * layer + 1]; }
  const ParamGroup& bias(std::size_t layer) const { return params_[2 * layer + 1]; }

  void set_layer_frozen(std::size_t layer, bool frozen);
  bool layer_frozen(std::size_t layer) const { return weight(layer).frozen; }

  std::span<ParamGroup> params() { return params_; }
  std::span<const ParamGroup> params() const { return params_; }

  Activations forward(std::span<const double> x) const;

  /// Accumulates parameter gradients for dL/dlogits into the groups'
  /// grad matrices; frozen layers still pass gradient to the layer below.
  void backward(const Activations& acts, std::span<const double> dlogits);

 private:
  std::vector<std::size_t> widths_;
  std::vector<ParamGroup> params_;
};

}  // namespace lasrl
