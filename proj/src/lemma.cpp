#include "lasrl/lemma.hpp"

#include <algorithm>
#include <cmath>

#include "lasrl/errors.hpp"
#include "lasrl/layers.hpp"
#include "lasrl/rng.hpp"

namespace lasrl::lemma {

namespace {

Matrix uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (double& v : m.values()) {
    v = dist(rng);
  }
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace

LemmaFixture LemmaFixture::random(std::uint64_t seed, std::size_t dim, std::size_t vocab, std::size_t input_dim) {
  Rng rng = make_rng(seed, "lemma-fixture");
  LemmaFixture f;
  const double si = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double sd = 1.0 / std::sqrt(static_cast<double>(dim));
  f.params.resize(kNumGroups);
  f.params[kW1] = ParamGroup("w1", uniform(dim, input_dim, si, rng));
  f.params[kB1] = ParamGroup("b1", uniform(1, dim, si, rng));
  f.params[kW2] = ParamGroup("w2", uniform(dim, dim, sd, rng));
  f.params[kB2] = ParamGroup("b2", uniform(1, dim, sd, rng));
  f.params[kRho] = ParamGroup("rho", uniform(vocab, dim, 1.0, rng));
  f.input = gaussian_vector(rng, input_dim);
  if (vocab >= 2) {
    std::uniform_int_distribution<std::size_t> pick(0, vocab - 1);
    f.row1 = pick(rng);
    do {
      f.row2 = pick(rng);
    } while (f.row2 == f.row1);
    auto& rho = f.params[kRho].value;
    std::copy(rho.row(f.row1).begin(), rho.row(f.row1).end(), rho.row(f.row2).begin());
  }
  return f;
}

void LemmaFixture::validate() const {
  if (params.size() != kNumGroups) {
    throw FixtureError("fixture must hold W1, b1, W2, b2 and rho");
  }
  if (vocab() < 3) {
    throw FixtureError("fixture needs |V| >= 3, got " + std::to_string(vocab()));
  }
  if (dim() < 2) {
    throw FixtureError("fixture needs d >= 2, got " + std::to_string(dim()));
  }
  if (row1 == row2 || row1 >= vocab() || row2 >= vocab()) {
    throw FixtureError("duplicated rows must be two distinct valid indices");
  }
  const auto a = rho().row(row1);
  const auto b = rho().row(row2);
  if (!std::equal(a.begin(), a.end(), b.begin())) {
    throw FixtureError("rows " + std::to_string(row1) + " and " + std::to_string(row2) + " of rho are not equal");
  }
}

LemmaPass lemma_gradients(LemmaFixture& f, const Vector& input, std::size_t gold) {
  auto& p = f.params;
  zero_grads(p);
  LemmaPass pass;
  pass.hidden = layers::tanh_forward(layers::dense_forward(p[LemmaFixture::kW1].value, &p[LemmaFixture::kB1].value, input));
  pass.v = layers::tanh_forward(layers::dense_forward(p[LemmaFixture::kW2].value, &p[LemmaFixture::kB2].value, pass.hidden));
  const Vector logits = layers::dense_forward(p[LemmaFixture::kRho].value, nullptr, pass.v);
  LossAndGrad ce = cross_entropy_smoothed(logits, gold, 0.0);
  pass.loss = ce.loss;
  pass.probs = softmax(logits);

  const Vector dv = layers::dense_backward(p[LemmaFixture::kRho].value, &p[LemmaFixture::kRho].grad, nullptr, pass.v,
                                           ce.grad);
  const Vector da2 = layers::tanh_backward(pass.v, dv);
  const Vector dh = layers::dense_backward(p[LemmaFixture::kW2].value, &p[LemmaFixture::kW2].grad,
                                           &p[LemmaFixture::kB2].grad, pass.hidden, da2);
  const Vector da1 = layers::tanh_backward(pass.hidden, dh);
  layers::dense_backward(p[LemmaFixture::kW1].value, &p[LemmaFixture::kW1].grad, &p[LemmaFixture::kB1].grad, input,
                         da1, false);
  return pass;
}

Lemma1Report check_lemma1(const LemmaFixture& fixture) {
  fixture.validate();
  LemmaFixture f = fixture;
  const LemmaPass pass = lemma_gradients(f, f.input, f.row1);
  const Matrix& g = f.params[LemmaFixture::kRho].grad;
  const auto g1 = g.row(f.row1);
  const auto g2 = g.row(f.row2);
  const double y1 = pass.probs[f.row1];
  const double y2 = pass.probs[f.row2];

  Lemma1Report r;
  for (std::size_t i = 0; i < f.dim(); ++i) {
    r.minus_v_error = std::max(r.minus_v_error, std::abs((g1[i] - g2[i]) + pass.v[i]));
    r.closed_form_error = std::max(r.closed_form_error, std::abs(g1[i] - (y1 - 1.0) * pass.v[i]));
    r.closed_form_error = std::max(r.closed_form_error, std::abs(g2[i] - y2 * pass.v[i]));
  }
  r.row_gap = max_abs_diff(g1, g2);

  SgdState sgd(SgdOptions{0.1, 0.0, 1e9});
  sgd_step(f.params, sgd);
  const auto a = f.rho().row(f.row1);
  const auto b = f.rho().row(f.row2);
  r.split_after_step = !std::equal(a.begin(), a.end(), b.begin());

  r.passed = r.minus_v_error <= 1e-10 && r.closed_form_error <= 1e-10 && r.row_gap > 1e-6 && r.split_after_step;
  return r;
}

namespace {

Vector theta1_gap(LemmaFixture& f) {
  lemma_gradients(f, f.input, f.row1);
  std::vector<Matrix> first;
  for (std::size_t g = LemmaFixture::kW1; g <= LemmaFixture::kB2; ++g) {
    first.push_back(f.params[g].grad);
  }
  lemma_gradients(f, f.input, f.row2);
  Vector gap;
  for (std::size_t g = LemmaFixture::kW1; g <= LemmaFixture::kB2; ++g) {
    gap.push_back(max_abs_diff(first[g].values(), f.params[g].grad.values()));
  }
  return gap;
}

}  // namespace

Lemma2Report check_lemma2(const LemmaFixture& fixture) {
  fixture.validate();
  LemmaFixture f = fixture;
  Lemma2Report r;
  r.per_group = theta1_gap(f);
  r.max_abs_diff = *std::max_element(r.per_group.begin(), r.per_group.end());
  r.passed = r.max_abs_diff <= 1e-12;
  return r;
}

double perturbed_lemma2_gap(const LemmaFixture& fixture, double delta) {
  fixture.validate();
  LemmaFixture f = fixture;
  for (double& x : f.params[LemmaFixture::kRho].value.row(f.row2)) {
    x += delta;
  }
  const Vector gap = theta1_gap(f);
  return *std::max_element(gap.begin(), gap.end());
}

bool frozen_rows_stay_tied(const LemmaFixture& fixture, std::size_t steps, std::uint64_t seed) {
  fixture.validate();
  LemmaFixture f = fixture;
  f.params[LemmaFixture::kRho].frozen = true;
  const Matrix rho_before = f.rho();
  Rng rng = make_rng(seed, "lemma-train");
  std::uniform_int_distribution<std::size_t> pick(0, f.vocab() - 1);
  SgdState sgd(SgdOptions{0.25, 0.9, 0.1});
  for (std::size_t s = 0; s < steps; ++s) {
    const Vector x = gaussian_vector(rng, f.input.size());
    const LemmaPass pass = lemma_gradients(f, x, pick(rng));
    if (pass.probs[f.row1] != pass.probs[f.row2]) {
      return false;
    }
    sgd_step(f.params, sgd);
  }
  return f.rho() == rho_before;
}

}  // namespace lasrl::lemma
