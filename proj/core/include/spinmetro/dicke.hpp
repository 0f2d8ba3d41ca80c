#pragma once

// Linear algebra on the permutation-symmetric (Dicke) subspace of N qubits.
//
// Basis index k counts excited qubits, so J_z is diagonal with entries
// m_k = k - N/2 in ascending order.

#include <vector>

#include "spinmetro/types.hpp"

namespace spinmetro {

inline constexpr double kNormTolerance = 1e-12;

class DickeState {
 public:
  /// Renormalizes the input; the pre-normalization defect |1 - sum|c_k|^2|
  /// is kept for inspection.
  static DickeState from_amplitudes(CVector amplitudes);

  [[nodiscard]] int n_qubits() const noexcept { return n_qubits_; }
  [[nodiscard]] int dim() const noexcept { return n_qubits_ + 1; }
  [[nodiscard]] const CVector& amplitudes() const noexcept { return amps_; }
  [[nodiscard]] cplx operator[](int k) const { return amps_[k]; }
  [[nodiscard]] double normalization_defect() const noexcept { return defect_; }

 private:
  DickeState(int n, CVector amps, double defect)
      : n_qubits_(n), amps_(std::move(amps)), defect_(defect) {}

  int n_qubits_;
  CVector amps_;
  double defect_;
};

struct CollectiveOps {
  int n_qubits;
  CMatrix jx, jy, jz, jplus, jminus;
};

/// Dense J_x, J_y, J_z, J_+, J_- for spin j = N/2.
CollectiveOps build_collective_ops(int n_qubits);

/// <k+1| J_+ |k> = sqrt((k+1)(N-k)).
double ladder_coefficient(int n_qubits, int k);

/// Banded actions; cost O(N) each.
CVector apply_jplus(const CVector& v);
CVector apply_jminus(const CVector& v);
CVector apply_jz(const CVector& v);

/// exp(-i angle (axis . J)).
CMatrix rotation_unitary(int n_qubits, const Vec3& axis, double angle);

/// exp(G) for anti-Hermitian G, through the eigendecomposition of iG.
CMatrix unitary_exp(const CMatrix& generator);

/// Caches the eigendecomposition of an anti-Hermitian generator G so that
/// exp(s G) can be applied for many scalars s.
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const CMatrix& generator);

  [[nodiscard]] CMatrix exp(double scale) const;
  [[nodiscard]] CVector apply(double scale, const CVector& v) const;

 private:
  Eigen::VectorXd eigenvalues_;  // of H = iG, so exp(sG) = V exp(-i s L) V^H
  CMatrix eigenvectors_;
};

cplx inner(const DickeState& a, const DickeState& b);

}  // namespace spinmetro
