#include "lasrl/optim.hpp"

#include <cmath>

#include "lasrl/errors.hpp"

namespace lasrl {

ParamGroup::ParamGroup(std::string name_, Matrix value_, bool frozen_)
    : name(std::move(name_)),
      value(std::move(value_)),
      grad(value.rows(), value.cols()),
      frozen(frozen_) {}

void zero_grads(std::span<ParamGroup> params) {
  for (auto& p : params) {
    p.grad.fill(0.0);
  }
}

SgdState::SgdState(SgdOptions options) : options_(options) {
  if (!(options_.learning_rate > 0.0)) {
    throw ConfigError("learning rate must be positive");
  }
  if (!(options_.momentum >= 0.0 && options_.momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (!(options_.clip_norm > 0.0)) {
    throw ConfigError("clip norm must be positive");
  }
}

SgdStepReport sgd_step(std::span<ParamGroup> params, SgdState& state) {
  if (state.velocity_.empty()) {
    state.velocity_.reserve(params.size());
    for (const auto& p : params) {
      state.velocity_.emplace_back(p.value.rows(), p.value.cols());
    }
  }
  if (state.velocity_.size() != params.size()) {
    throw DimensionError("optimizer state tracks " + std::to_string(state.velocity_.size()) +
                         " groups but step received " + std::to_string(params.size()));
  }

  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (!p.grad.same_shape(p.value) || !state.velocity_[i].same_shape(p.value)) {
      throw DimensionError("parameter group '" + p.name + "' has inconsistent shapes");
    }
    if (p.frozen) {
      continue;
    }
    const auto g = p.grad.values();
    const double group_sq = dot(g, g);
    // A non-finite sum of squares means either a non-finite entry or an
    // overflow; only the former is an error.
    if (!std::isfinite(group_sq) && !p.grad.all_finite()) {
      throw NumericError("non-finite gradient in parameter group '" + p.name + "'");
    }
    sq += group_sq;
  }

  SgdStepReport report;
  report.grad_norm = std::sqrt(sq);
  const auto& opt = state.options_;
  if (report.grad_norm > opt.clip_norm) {
    report.scale = opt.clip_norm / report.grad_norm;
  }

  const double mu = opt.momentum;
  const double lr = opt.learning_rate * report.scale;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (p.frozen) {
      continue;
    }
    auto value = p.value.values();
    auto vel = state.velocity_[i].values();
    const auto g = p.grad.values();
    if (mu == 0.0) {
      // Velocity stays identically zero; the update reduces to p <- p - lr g.
      for (std::size_t j = 0; j < value.size(); ++j) {
        value[j] -= lr * g[j];
      }
      continue;
    }
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double step = lr * g[j];
      vel[j] = mu * vel[j] - step;
      value[j] += mu * vel[j] - step;
    }
  }
  return report;
}

}  // namespace lasrl
