#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lasrl/optim.hpp"
#include "lasrl/tensor.hpp"

namespace lasrl::lemma {

/// f = h(theta2) . g(theta1) with
///   g(x) = tanh(W2 tanh(W1 x + b1) + b2)    theta1 = {W1, b1, W2, b2}
///   h(v) = softmax(rho v)                    theta2 = rho, no bias
/// and two target rows set bitwise equal.
struct LemmaFixture {
  enum Group : std::size_t { kW1, kB1, kW2, kB2, kRho, kNumGroups };

  std::vector<ParamGroup> params;
  Vector input;
  std::size_t row1 = 0;
  std::size_t row2 = 1;

  std::size_t dim() const { return params[kRho].value.cols(); }
  std::size_t vocab() const { return params[kRho].value.rows(); }
  const Matrix& rho() const { return params[kRho].value; }

  /// Random fixture: entries uniform in +-1/sqrt(fan_in) (rho in +-1),
  /// row2 copied from row1.
  static LemmaFixture random(std::uint64_t seed, std::size_t dim, std::size_t vocab, std::size_t input_dim = 4);

  /// FixtureError unless rho rows are bitwise equal, |V| >= 3, d >= 2 and
  /// the two rows are distinct indices.
  void validate() const;
};

struct LemmaPass {
  Vector hidden;  // tanh(W1 x + b1)
  Vector v;       // g(x)
  Vector probs;   // y-hat
  double loss = 0.0;
};

/// Forward pass plus un-smoothed cross-entropy gradients for `gold`,
/// written into the fixture's grad matrices (which are zeroed first).
LemmaPass lemma_gradients(LemmaFixture& fixture, const Vector& input, std::size_t gold);

struct Lemma1Report {
  bool passed = false;
  double minus_v_error = 0.0;     // max |(d rho1 - d rho2) - (-v)|
  double closed_form_error = 0.0;  // max error of (y1 - 1) v and y2 v
  double row_gap = 0.0;           // max |d rho1 - d rho2|
  bool split_after_step = false;   // rho1 != rho2 after one SGD step
};

/// Gold = w1; theta2 unfrozen. Thresholds: identities to 1e-10, gap > 1e-6.
Lemma1Report check_lemma1(const LemmaFixture& fixture);

struct Lemma2Report {
  bool passed = false;
  double max_abs_diff = 0.0;
  Vector per_group;  // max-abs difference per theta1 group
};

/// theta1 gradients with gold = w1 and gold = w2 agree to 1e-12, group by group.
Lemma2Report check_lemma2(const LemmaFixture& fixture);

/// Max-abs difference of the theta1 gradients (gold w1 vs w2) after adding
/// `delta` to every entry of rho2. Continuity probe: O(delta).
double perturbed_lemma2_gap(const LemmaFixture& fixture, double delta);

/// Trains theta1 with theta2 frozen on `steps` random (input, gold) draws
/// and checks y-hat1 == y-hat2 exactly before every step.
bool frozen_rows_stay_tied(const LemmaFixture& fixture, std::size_t steps, std::uint64_t seed);

}  // namespace lasrl::lemma
