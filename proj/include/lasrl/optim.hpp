#pragma once

#include <span>
#include <string>
#include <vector>

#include "lasrl/tensor.hpp"

namespace lasrl {

struct ParamGroup {
  ParamGroup() = default;
  ParamGroup(std::string name, Matrix value, bool frozen = false);

  std::string name;
  Matrix value;
  Matrix grad;  // same shape as value
  bool frozen = false;
};

void zero_grads(std::span<ParamGroup> params);

struct SgdOptions {
  double learning_rate = 0.25;
  double momentum = 0.99;
  double clip_norm = 0.1;
};

struct SgdStepReport {
  double grad_norm = 0.0;  // before clipping
  double scale = 1.0;      // factor applied to the raw gradients
};

/// Nesterov SGD with global clip-to-norm. Velocity buffers are created lazily
/// on the first step and are tied to the group order passed in.
class SgdState {
 public:
  explicit SgdState(SgdOptions options = {});

  const SgdOptions& options() const { return options_; }
  const std::vector<Matrix>& velocity() const { return velocity_; }

 private:
  friend SgdStepReport sgd_step(std::span<ParamGroup>, SgdState&);
  SgdOptions options_;
  std::vector<Matrix> velocity_;
};

/// Clips the non-frozen gradients to `clip_norm` (global norm) then applies
///   v <- mu v - lr g;  p <- p + mu v - lr g
/// to every non-frozen group. Frozen groups and their velocities are never
/// touched. Throws NumericError naming the first non-finite gradient.
SgdStepReport sgd_step(std::span<ParamGroup> params, SgdState& state);

}  // namespace lasrl
