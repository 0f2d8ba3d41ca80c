#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spinmetro {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat2c = Eigen::Matrix2cd;
using Mat4c = Eigen::Matrix4cd;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  invalid_dimension,
  validation,
  dimension_mismatch,
  unsupported_configuration,
  no_mean_spin,
  degenerate_cat,
  oracle_scale,
  insufficient_points,
  numerical,
  config,
  io,
};

/// Every failure raised by the library carries a kind so callers (notably the
/// CLI) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

/// Throws ErrorKind::validation unless |v| == 1 within tol.
void require_unit(const Vec3& v, const char* what, double tol = 1e-12);

/// Deterministic sign convention for axes: the first non-negligible
/// component is made positive.
Vec3 canonical_sign(const Vec3& v);

}  // namespace spinmetro
