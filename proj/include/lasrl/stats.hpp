#pragma once

#include <cstddef>
#include <span>

#include "lasrl/tensor.hpp"

namespace lasrl::stats {

double mean(std::span<const double> xs);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> xs);
double median(std::span<const double> xs);

struct PairedTest {
  double mean_diff = 0.0;
  double t = 0.0;
  double p_value = 1.0;  // one-sided, H1: mean(a - b) > 0
  std::size_t n = 0;
};

/// One-sided paired t-test of a > b.
PairedTest paired_t_greater(std::span<const double> a, std::span<const double> b);

/// Trailing moving average; the first window-1 entries average the prefix
/// seen so far.
Vector moving_average(std::span<const double> xs, std::size_t window);

}  // namespace lasrl::stats
