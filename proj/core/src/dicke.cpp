#include "spinmetro/dicke.hpp"

#include <cmath>

#include <fmt/format.h>

namespace spinmetro {
namespace {

void require_positive_n(int n) {
  if (n < 1) {
    throw Error(ErrorKind::invalid_dimension,
                fmt::format("number of qubits must be >= 1, got {}", n));
  }
}

int qubits_of(const CVector& v) { return static_cast<int>(v.size()) - 1; }

}  // namespace

DickeState DickeState::from_amplitudes(CVector amplitudes) {
  const int n = qubits_of(amplitudes);
  require_positive_n(n);
  if (!amplitudes.allFinite()) {
    throw Error(ErrorKind::validation, "Dicke amplitudes must be finite");
  }
  const double norm2 = amplitudes.squaredNorm();
  if (!(norm2 > 0.0)) {
    throw Error(ErrorKind::validation, "Dicke amplitudes must not vanish");
  }
  const double defect = std::abs(1.0 - norm2);
  if (defect > kNormTolerance) amplitudes /= std::sqrt(norm2);
  return DickeState(n, std::move(amplitudes), defect);
}

double ladder_coefficient(int n_qubits, int k) {
  return std::sqrt(static_cast<double>(k + 1) * static_cast<double>(n_qubits - k));
}

CollectiveOps build_collective_ops(int n_qubits) {
  require_positive_n(n_qubits);
  const int d = n_qubits + 1;
  CollectiveOps ops{n_qubits, {}, {}, CMatrix::Zero(d, d), CMatrix::Zero(d, d), {}};
  for (int k = 0; k < d; ++k) {
    ops.jz(k, k) = k - 0.5 * n_qubits;
    if (k + 1 < d) ops.jplus(k + 1, k) = ladder_coefficient(n_qubits, k);
  }
  ops.jminus = ops.jplus.adjoint();
  ops.jx = 0.5 * (ops.jplus + ops.jminus);
  ops.jy = (ops.jplus - ops.jminus) / cplx(0.0, 2.0);
  return ops;
}

CVector apply_jplus(const CVector& v) {
  const int n = qubits_of(v);
  CVector out = CVector::Zero(v.size());
  for (int k = 0; k < n; ++k) out[k + 1] = ladder_coefficient(n, k) * v[k];
  return out;
}

CVector apply_jminus(const CVector& v) {
  const int n = qubits_of(v);
  CVector out = CVector::Zero(v.size());
  for (int k = 0; k < n; ++k) out[k] = ladder_coefficient(n, k) * v[k + 1];
  return out;
}

CVector apply_jz(const CVector& v) {
  const int n = qubits_of(v);
  CVector out(v.size());
  for (int k = 0; k <= n; ++k) out[k] = (k - 0.5 * n) * v[k];
  return out;
}

CMatrix rotation_unitary(int n_qubits, const Vec3& axis, double angle) {
  require_unit(axis, "rotation axis");
  const CollectiveOps ops = build_collective_ops(n_qubits);
  const CMatrix jn = axis.x() * ops.jx + axis.y() * ops.jy + axis.z() * ops.jz;
  return unitary_exp(cplx(0.0, -angle) * jn);
}

SpectralPropagator::SpectralPropagator(const CMatrix& generator) {
  if (generator.rows() != generator.cols()) {
    throw Error(ErrorKind::dimension_mismatch, "generator must be square");
  }
  const double scale = std::max(1.0, generator.cwiseAbs().maxCoeff());
  if ((generator + generator.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorKind::validation, "generator is not anti-Hermitian");
  }
  // H = iG is Hermitian; symmetrize against round-off before diagonalizing.
  CMatrix h = cplx(0.0, 1.0) * generator;
  h = 0.5 * (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::numerical, "eigendecomposition of iG failed");
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

CMatrix SpectralPropagator::exp(double scale) const {
  CVector phases(eigenvalues_.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases[i] = std::exp(cplx(0.0, -scale * eigenvalues_[i]));
  }
  return eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
}

CVector SpectralPropagator::apply(double scale, const CVector& v) const {
  CVector w = eigenvectors_.adjoint() * v;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w[i] *= std::exp(cplx(0.0, -scale * eigenvalues_[i]));
  }
  return eigenvectors_ * w;
}

CMatrix unitary_exp(const CMatrix& generator) {
  return SpectralPropagator(generator).exp(1.0);
}

cplx inner(const DickeState& a, const DickeState& b) {
  if (a.n_qubits() != b.n_qubits()) {
    throw Error(ErrorKind::dimension_mismatch,
                fmt::format("inner product of N={} and N={} states", a.n_qubits(),
                            b.n_qubits()));
  }
  return a.amplitudes().dot(b.amplitudes());  // Eigen's dot conjugates the left operand
}

}  // namespace spinmetro
