#pragma once

#include <cstddef>
#include <span>
#include <utility>

namespace dealer {

/// Ordinary least squares fit of y = intercept + slope * x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;

  /// Two-sided Student-t confidence interval for the slope. NaN bounds when
  /// fewer than three points leave no residual degrees of freedom.
  std::pair<double, double> slope_ci(double level = 0.95) const;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace dealer
