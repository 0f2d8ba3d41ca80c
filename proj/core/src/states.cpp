#include "spinmetro/states.hpp"

#include <cmath>

#include <fmt/format.h>
#include <lapacke.h>

namespace spinmetro {
namespace {

void require_finite(cplx z, const char* what) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw Error(ErrorKind::validation, fmt::format("{} must be finite", what));
  }
}

void require_qubits(int n) {
  if (n < 1) {
    throw Error(ErrorKind::invalid_dimension,
                fmt::format("number of qubits must be >= 1, got {}", n));
  }
}

}  // namespace

std::string_view to_string(StateKind kind) noexcept {
  switch (kind) {
    case StateKind::coherent: return "coherent";
    case StateKind::oat: return "oat";
    case StateKind::tat: return "tat";
    case StateKind::cat: return "cat";
    case StateKind::ghz: return "ghz";
  }
  return "unknown";
}

StateKind parse_state_kind(std::string_view name) {
  for (StateKind k : {StateKind::coherent, StateKind::oat, StateKind::tat, StateKind::cat,
                      StateKind::ghz}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::config, fmt::format("unknown state kind '{}'", name));
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

DickeState spin_coherent(cplx z, int n_qubits) {
  require_qubits(n_qubits);
  require_finite(z, "coherent label z");
  CVector amps = CVector::Zero(n_qubits + 1);
  const double r = std::abs(z);
  if (r == 0.0) {
    amps[0] = 1.0;
    return DickeState::from_amplitudes(std::move(amps));
  }
  const double log_r = std::log(r);
  const double arg = std::arg(z);
  const double log_norm = 0.5 * n_qubits * std::log1p(r * r);
  for (int k = 0; k <= n_qubits; ++k) {
    const double log_mag = 0.5 * log_binomial(n_qubits, k) + k * log_r - log_norm;
    amps[k] = std::polar(std::exp(log_mag), k * arg);
  }
  return DickeState::from_amplitudes(std::move(amps));
}

DickeState oat_state(cplx z, double chi, int n_qubits) {
  if (std::abs(std::abs(z) - 1.0) > 1e-9) {
    throw Error(ErrorKind::validation,
                fmt::format("one-axis twisting needs |z| = 1, got |z| = {:.17g}", std::abs(z)));
  }
  if (!std::isfinite(chi)) throw Error(ErrorKind::validation, "chi must be finite");
  CVector amps = spin_coherent(z, n_qubits).amplitudes();
  for (int k = 0; k <= n_qubits; ++k) {
    const double m = k - 0.5 * n_qubits;
    amps[k] *= std::polar(1.0, -chi * m * m);
  }
  return DickeState::from_amplitudes(std::move(amps));
}

TatPropagator::TatPropagator(int n_qubits) : n_qubits_(n_qubits) {
  require_qubits(n_qubits);
  if (n_qubits > kMaxTatQubits) {
    throw Error(ErrorKind::invalid_dimension,
                fmt::format("two-axis twisting is limited to N <= {}, got {}", kMaxTatQubits,
                            n_qubits));
  }
  // Even sector k = 2j. (J_+^2)_{k+2,k} = c_k c_{k+1}; with D = diag(i^j) the
  // Hermitian i(J_+^2 - J_-^2) becomes the real symmetric tridiagonal T below.
  const int dim = n_qubits / 2 + 1;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sub(std::max(dim - 1, 0));
  for (int j = 0; j + 1 < dim; ++j) {
    const int k = 2 * j;
    sub[j] = ladder_coefficient(n_qubits, k) * ladder_coefficient(n_qubits, k + 1);
  }
  if (dim == 1) {
    eigenvalues_ = Eigen::VectorXd::Zero(1);
    eigenvectors_ = Eigen::MatrixXd::Identity(1, 1);
    return;
  }
  Eigen::VectorXd d = diag;
  Eigen::VectorXd off = Eigen::VectorXd::Zero(dim);
  off.head(dim - 1) = sub;
  eigenvalues_.resize(dim);
  eigenvectors_.resize(dim, dim);
  lapack_int found = 0;
  lapack_logical tryrac = 1;
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(dim));
  const lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'A', dim, d.data(), off.data(),
                                         0.0, 0.0, 0, 0, &found, eigenvalues_.data(),
                                         eigenvectors_.data(), dim, dim, support.data(), &tryrac);
  if (info != 0 || found != dim) {
    throw Error(ErrorKind::numerical,
                fmt::format("two-axis twisting eigendecomposition failed (info {})", info));
  }
  // chi = 0 must reproduce |0,N>.
  const Eigen::VectorXd e0 = eigenvectors_ * eigenvectors_.row(0).transpose();
  const double drift = (e0 - Eigen::VectorXd::Unit(dim, 0)).cwiseAbs().maxCoeff();
  if (drift > 1e-8) {
    throw Error(ErrorKind::numerical,
                fmt::format("two-axis twisting eigenvectors lost orthogonality ({:.3g})", drift));
  }
}

DickeState TatPropagator::state(double chi) const {
  if (!std::isfinite(chi)) throw Error(ErrorKind::validation, "chi must be finite");
  const Eigen::Index dim = eigenvalues_.size();
  // exp(chi A) e_0 = D Q exp(-i chi L) Q^T e_0
  CVector weights(dim);
  for (Eigen::Index l = 0; l < dim; ++l) {
    weights[l] = std::polar(eigenvectors_(0, l), -chi * eigenvalues_[l]);
  }
  const Eigen::VectorXd re = eigenvectors_ * weights.real();
  const Eigen::VectorXd im = eigenvectors_ * weights.imag();
  static const cplx kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  CVector amps = CVector::Zero(n_qubits_ + 1);
  for (Eigen::Index j = 0; j < dim; ++j) amps[2 * j] = kPhase[j % 4] * cplx(re[j], im[j]);
  return DickeState::from_amplitudes(std::move(amps));
}

DickeState tat_state(double chi, int n_qubits) { return TatPropagator(n_qubits).state(chi); }

DickeState spin_cat(cplx z, int n_qubits) {
  require_qubits(n_qubits);
  require_finite(z, "cat label z");
  if (z == cplx(0.0, 0.0)) {
    throw Error(ErrorKind::degenerate_cat, "spin cat with z = 0 collapses onto |0,N>");
  }
  CVector amps = spin_coherent(z, n_qubits).amplitudes();
  amps[0] += 1.0;
  return DickeState::from_amplitudes(std::move(amps));
}

DickeState ghz_state(int n_qubits) {
  require_qubits(n_qubits);
  CVector amps = CVector::Zero(n_qubits + 1);
  amps[0] = amps[n_qubits] = 1.0 / std::sqrt(2.0);
  return DickeState::from_amplitudes(std::move(amps));
}

DickeState make_state(const StateSpec& spec) {
  switch (spec.kind) {
    case StateKind::coherent: return spin_coherent(spec.z, spec.n_qubits);
    case StateKind::oat: return oat_state(spec.z, spec.chi, spec.n_qubits);
    case StateKind::tat: return tat_state(spec.chi, spec.n_qubits);
    case StateKind::cat: return spin_cat(spec.z, spec.n_qubits);
    case StateKind::ghz: return ghz_state(spec.n_qubits);
  }
  throw Error(ErrorKind::validation, "unknown state kind");
}

}  // namespace spinmetro
