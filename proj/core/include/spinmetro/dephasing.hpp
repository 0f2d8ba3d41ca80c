#pragma once

// Independent single-qubit dephasing in the eigenbasis of (n . sigma),
// followed by the field rotation exp(-i omega t J_n). Everything here works
// from one- and two-qubit reduced density matrices of a permutation-symmetric
// state, so cost is O(N) and the 2^N state is never formed.
//
// Single-qubit basis order is (g, e); sigma_z = diag(-1, +1).

#include <string_view>

#include "spinmetro/dicke.hpp"

namespace spinmetro {

enum class NoiseKind { none, gaussian_nonmarkovian, exponential_markovian };

std::string_view to_string(NoiseKind kind) noexcept;
NoiseKind parse_noise_kind(std::string_view name);

struct DephasingModel {
  NoiseKind kind = NoiseKind::none;
  double gamma = 0.0;        // 1/time
  Vec3 axis = Vec3::UnitZ();  // dephasing basis direction

  /// Coherence factor d(t): exp(-(gamma t)^2), exp(-gamma t) or 1.
  [[nodiscard]] double decay(double t) const;

  static DephasingModel none() { return {}; }
  static DephasingModel gaussian(double gamma, Vec3 axis = Vec3::UnitZ()) {
    return {NoiseKind::gaussian_nonmarkovian, gamma, axis};
  }
  static DephasingModel markovian(double gamma, Vec3 axis = Vec3::UnitZ()) {
    return {NoiseKind::exponential_markovian, gamma, axis};
  }
};

/// First and symmetrized second moments of (J_x, J_y, J_z) plus their
/// derivatives with respect to the field omega.
struct CollectiveMoments {
  int n_qubits = 0;
  Vec3 first = Vec3::Zero();
  Mat3 second = Mat3::Zero();
  Vec3 dfirst_domega = Vec3::Zero();
  Mat3 dsecond_domega = Mat3::Zero();

  [[nodiscard]] Mat3 covariance() const { return second - first * first.transpose(); }
  [[nodiscard]] double mean(const Vec3& axis) const { return axis.dot(first); }
  [[nodiscard]] double variance(const Vec3& axis) const {
    return axis.dot(second * axis) - mean(axis) * mean(axis);
  }
  /// d Var(J_axis) / d omega
  [[nodiscard]] double dvariance(const Vec3& axis) const {
    return axis.dot(dsecond_domega * axis) - 2.0 * mean(axis) * axis.dot(dfirst_domega);
  }
};

/// Pauli matrices in the (g, e) basis and n . sigma.
Mat2c pauli_x();
Mat2c pauli_y();
Mat2c pauli_z();
Mat2c pauli_along(const Vec3& axis);

/// Right-handed rotation by `angle` about `axis`; the adjoint action of
/// exp(-i angle J_n) on the vector (J_x, J_y, J_z).
Mat3 rotation_matrix(const Vec3& axis, double angle);

Mat2c reduced_density_1(const DickeState& state);
/// Two-qubit basis index 2a + b for qubits (1, 2) in states a, b.
Mat4c reduced_density_2(const DickeState& state);

Mat2c apply_local_dephasing(const Mat2c& rdm, const DephasingModel& model, double t);
Mat4c apply_local_dephasing(const Mat4c& rdm, const DephasingModel& model, double t);

enum class ChannelOrder { dephase_then_rotate, rotate_then_dephase };

/// Reduced density matrices of rho_t under either ordering of channel and
/// rotation; the two agree when the dephasing axis is the rotation axis.
Mat2c exposed_rdm_1(const DickeState& state, const DephasingModel& model, const Vec3& sense_axis,
                    double omega, double t, ChannelOrder order);
Mat4c exposed_rdm_2(const DickeState& state, const DephasingModel& model, const Vec3& sense_axis,
                    double omega, double t, ChannelOrder order);

/// Moments of rho_t = exp(-i omega t J_n) E^{(x)N}(|psi><psi|) exp(i omega t J_n).
/// Throws unsupported_configuration unless the dephasing axis is +-n.
CollectiveMoments collective_moments(const DickeState& state, const DephasingModel& model,
                                     const Vec3& sense_axis, double omega, double t);

struct SandwichValue {
  cplx value;
  cplx domega;
};

/// <x,N| U E^{(x)N}(|y,N><w,N|) U^dag |v,N> with U = exp(-i omega t J_n),
/// n = model.axis, computed as the N-th power of a single-qubit bracket.
SandwichValue coherent_sandwich_with_derivative(cplx x, cplx y, cplx w, cplx v, int n_qubits,
                                                const DephasingModel& model, double omega,
                                                double t);
cplx coherent_sandwich(cplx x, cplx y, cplx w, cplx v, int n_qubits, const DephasingModel& model,
                       double omega, double t);

/// Symmetric-sector block of E^{(x)N}(rho) for a Dicke-basis rho under
/// z-axis dephasing. The entry (a, b) is rescaled by
/// sum_l C(a,l) C(N-a,b-l) d^{a+b-2l} / C(N,b); the trace deficit is the
/// weight that leaks out of the symmetric sector.
CMatrix dephase_symmetric_block(const CMatrix& rho, const DephasingModel& model, double t);

}  // namespace spinmetro
