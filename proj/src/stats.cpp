#include "lasrl/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "lasrl/errors.hpp"

namespace lasrl::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) {
    return 0.0;
  }
  double s = 0.0;
  for (double x : xs) {
    s += x;
  }
  return s / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) {
    return 0.0;
  }
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) {
    s += (x - m) * (x - m);
  }
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

double median(std::span<const double> xs) {
  if (xs.empty()) {
    return 0.0;
  }
  Vector v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

PairedTest paired_t_greater(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("paired test needs equal-length samples");
  }
  if (a.size() < 2) {
    throw ConfigError("paired test needs at least two pairs");
  }
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
  }
  PairedTest out;
  out.n = d.size();
  out.mean_diff = mean(d);
  const double se = stddev(d) / std::sqrt(static_cast<double>(d.size()));
  if (se == 0.0) {
    // Degenerate: every difference identical.
    out.t = out.mean_diff > 0 ? std::numeric_limits<double>::infinity()
                              : (out.mean_diff < 0 ? -std::numeric_limits<double>::infinity() : 0.0);
    out.p_value = out.mean_diff > 0 ? 0.0 : (out.mean_diff < 0 ? 1.0 : 0.5);
    return out;
  }
  out.t = out.mean_diff / se;
  const boost::math::students_t dist(static_cast<double>(d.size() - 1));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.t));
  return out;
}

Vector moving_average(std::span<const double> xs, std::size_t window) {
  if (window == 0) {
    throw ConfigError("moving-average window must be positive");
  }
  Vector out(xs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sum += xs[i];
    if (i >= window) {
      sum -= xs[i - window];
    }
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

}  // namespace lasrl::stats
