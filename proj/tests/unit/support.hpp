#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>

#include "lasrl/rng.hpp"
#include "lasrl/tensor.hpp"

namespace lasrl::test {

inline Vector random_vector(Rng& rng, std::size_t n, double bound = 1.0) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Vector v(n);
  for (double& x : v) {
    x = dist(rng);
  }
  return v;
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double bound = 1.0) {
  return Matrix(rows, cols, random_vector(rng, rows * cols, bound));
}

// |a - n| / max(|a|, |n|, floor): relative error that does not blow up on
// entries that are zero up to rounding.
inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Largest relative error between `analytic` and central differences of
/// `loss` taken by perturbing each entry of `values` in place.
inline double gradcheck(std::span<double> values, std::span<const double> analytic,
                        const std::function<double()>& loss, double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double keep = values[i];
    values[i] = keep + h;
    const double up = loss();
    values[i] = keep - h;
    const double down = loss();
    values[i] = keep;
    worst = std::max(worst, rel_error(analytic[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

inline constexpr double kGradTol = 1e-4;

}  // namespace lasrl::test
