#pragma once

#include <span>

namespace spinmetro {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
  int n_points = 0;
};

/// Unweighted least squares of log10(y) against log10(x). Needs at least three
/// points with x > 0 and y > 0.
FitResult fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace spinmetro
