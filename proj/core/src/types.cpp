#include "spinmetro/types.hpp"

#include <cmath>

#include <fmt/format.h>

namespace spinmetro {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::validation: return "validation";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::unsupported_configuration: return "unsupported-configuration";
    case ErrorKind::no_mean_spin: return "no-mean-spin";
    case ErrorKind::degenerate_cat: return "degenerate-cat";
    case ErrorKind::oracle_scale: return "oracle-scale";
    case ErrorKind::insufficient_points: return "insufficient-points";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

void require_unit(const Vec3& v, const char* what, double tol) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > tol) {
    throw Error(ErrorKind::validation,
                fmt::format("{} must be a unit vector (|v| = {:.17g})", what, v.norm()));
  }
}

Vec3 canonical_sign(const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-12) return v[i] < 0.0 ? Vec3(-v) : v;
  }
  return v;
}

}  // namespace spinmetro
