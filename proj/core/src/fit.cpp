#include "spinmetro/fit.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "spinmetro/types.hpp"

namespace spinmetro {

FitResult fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::dimension_mismatch, "fit needs equally many x and y values");
  }
  if (x.size() < 3) {
    throw Error(ErrorKind::insufficient_points,
                fmt::format("fit needs at least 3 points, got {}", x.size()));
  }
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorKind::validation,
                  fmt::format("fit needs positive finite values (x = {}, y = {})", x[i], y[i]));
    }
    lx[i] = std::log10(x[i]);
    ly[i] = std::log10(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::validation, "fit needs distinct x values");

  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.n_points = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.max_abs_residual =
        std::max(fit.max_abs_residual, std::abs(ly[i] - (fit.intercept + fit.slope * lx[i])));
  }
  return fit;
}

}  // namespace spinmetro
