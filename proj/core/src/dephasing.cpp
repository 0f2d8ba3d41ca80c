#include "spinmetro/dephasing.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "spinmetro/states.hpp"

namespace spinmetro {
namespace {

constexpr cplx kI{0.0, 1.0};

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorKind::validation, fmt::format("exposure time must be >= 0, got {}", t));
  }
}

// Columns are eigenvectors of n . sigma (eigenvalues -1, +1).
Mat2c axis_basis(const Vec3& axis) {
  Eigen::SelfAdjointEigenSolver<Mat2c> solver(pauli_along(axis));
  return solver.eigenvectors();
}

Mat4c kron(const Mat2c& a, const Mat2c& b) {
  Mat4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Mat3 cross_matrix(const Vec3& n) {
  Mat3 k;
  k << 0.0, -n.z(), n.y(),  //
      n.z(), 0.0, -n.x(),   //
      -n.y(), n.x(), 0.0;
  return k;
}

// w[x][y] = S(|x><y|) psi, with S the collective sum of a single-qubit operator:
// S(gg) = N/2 - J_z, S(ee) = N/2 + J_z, S(eg) = J_+, S(ge) = J_-.
std::array<std::array<CVector, 2>, 2> collective_actions(const DickeState& state) {
  const CVector& psi = state.amplitudes();
  const double half = 0.5 * state.n_qubits();
  const CVector jz = apply_jz(psi);
  std::array<std::array<CVector, 2>, 2> w;
  w[0][0] = half * psi - jz;
  w[1][1] = half * psi + jz;
  w[1][0] = apply_jplus(psi);
  w[0][1] = apply_jminus(psi);
  return w;
}

void require_aligned(const DephasingModel& model, const Vec3& sense_axis) {
  if (model.kind == NoiseKind::none) return;
  require_unit(model.axis, "dephasing axis", 1e-9);
  if (std::abs(std::abs(model.axis.dot(sense_axis)) - 1.0) > 1e-9) {
    throw Error(ErrorKind::unsupported_configuration,
                "dephasing axis must coincide with the sensing axis");
  }
}

Mat2c single_qubit_rotation(const Vec3& axis, double angle) {
  return std::cos(0.5 * angle) * Mat2c::Identity() -
         kI * std::sin(0.5 * angle) * pauli_along(axis);
}

}  // namespace

std::string_view to_string(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::gaussian_nonmarkovian: return "gaussian_nonmarkovian";
    case NoiseKind::exponential_markovian: return "exponential_markovian";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(std::string_view name) {
  for (NoiseKind k : {NoiseKind::none, NoiseKind::gaussian_nonmarkovian,
                      NoiseKind::exponential_markovian}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::config, fmt::format("unknown noise kind '{}'", name));
}

double DephasingModel::decay(double t) const {
  require_time(t);
  if (!(gamma >= 0.0)) throw Error(ErrorKind::validation, "gamma must be >= 0");
  switch (kind) {
    case NoiseKind::none: return 1.0;
    case NoiseKind::gaussian_nonmarkovian: {
      const double x = gamma * t;
      return std::exp(-x * x);  // underflow to 0 means full dephasing
    }
    case NoiseKind::exponential_markovian: return std::exp(-gamma * t);
  }
  return 1.0;
}

Mat2c pauli_x() {
  Mat2c m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Mat2c pauli_y() {
  Mat2c m;
  m << 0.0, kI, -kI, 0.0;
  return m;
}

Mat2c pauli_z() {
  Mat2c m;
  m << -1.0, 0.0, 0.0, 1.0;
  return m;
}

Mat2c pauli_along(const Vec3& axis) {
  return axis.x() * pauli_x() + axis.y() * pauli_y() + axis.z() * pauli_z();
}

Mat3 rotation_matrix(const Vec3& axis, double angle) {
  const Mat3 k = cross_matrix(axis);
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

Mat2c reduced_density_1(const DickeState& state) {
  const auto w = collective_actions(state);
  const CVector& psi = state.amplitudes();
  const double n = state.n_qubits();
  Mat2c rho;
  // rho(a, a') = <|a'><a|>
  for (int a = 0; a < 2; ++a)
    for (int ap = 0; ap < 2; ++ap) rho(a, ap) = psi.dot(w[ap][a]) / n;
  return rho;
}

Mat4c reduced_density_2(const DickeState& state) {
  const int n = state.n_qubits();
  if (n < 2) {
    throw Error(ErrorKind::invalid_dimension, "two-qubit reduced state needs N >= 2");
  }
  const auto w = collective_actions(state);
  const CVector& psi = state.amplitudes();
  const double pairs = static_cast<double>(n) * (n - 1);
  Mat4c rho;
  // rho((a,b),(a',b')) = <E_{a'a} (x) E_{b'b}> on a distinct pair, from
  // <S(E_{a'a}) S(E_{b'b})> minus the coincident-qubit term delta_{ab'} <S(E_{a'b})>.
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp) {
          cplx v = w[a][ap].dot(w[bp][b]);
          if (a == bp) v -= psi.dot(w[ap][b]);
          rho(2 * a + b, 2 * ap + bp) = v / pairs;
        }
  return rho;
}

Mat2c apply_local_dephasing(const Mat2c& rdm, const DephasingModel& model, double t) {
  const double d = model.decay(t);
  if (d == 1.0) return rdm;
  require_unit(model.axis, "dephasing axis", 1e-9);
  const Mat2c v = axis_basis(model.axis);
  Mat2c local = v.adjoint() * rdm * v;
  local(0, 1) *= d;
  local(1, 0) *= d;
  return v * local * v.adjoint();
}

Mat4c apply_local_dephasing(const Mat4c& rdm, const DephasingModel& model, double t) {
  const double d = model.decay(t);
  if (d == 1.0) return rdm;
  require_unit(model.axis, "dephasing axis", 1e-9);
  const Mat4c v = kron(axis_basis(model.axis), axis_basis(model.axis));
  Mat4c local = v.adjoint() * rdm * v;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const int flips = ((i >> 1) != (j >> 1)) + ((i & 1) != (j & 1));
      if (flips == 1) local(i, j) *= d;
      if (flips == 2) local(i, j) *= d * d;
    }
  return v * local * v.adjoint();
}

Mat2c exposed_rdm_1(const DickeState& state, const DephasingModel& model, const Vec3& sense_axis,
                    double omega, double t, ChannelOrder order) {
  require_time(t);
  require_unit(sense_axis, "sensing axis");
  require_aligned(model, sense_axis);
  const Mat2c u = single_qubit_rotation(sense_axis, omega * t);
  const Mat2c rho = reduced_density_1(state);
  if (order == ChannelOrder::dephase_then_rotate) {
    return u * apply_local_dephasing(rho, model, t) * u.adjoint();
  }
  return apply_local_dephasing(Mat2c(u * rho * u.adjoint()), model, t);
}

Mat4c exposed_rdm_2(const DickeState& state, const DephasingModel& model, const Vec3& sense_axis,
                    double omega, double t, ChannelOrder order) {
  require_time(t);
  require_unit(sense_axis, "sensing axis");
  require_aligned(model, sense_axis);
  const Mat2c u1 = single_qubit_rotation(sense_axis, omega * t);
  const Mat4c u = kron(u1, u1);
  const Mat4c rho = reduced_density_2(state);
  if (order == ChannelOrder::dephase_then_rotate) {
    return u * apply_local_dephasing(rho, model, t) * u.adjoint();
  }
  return apply_local_dephasing(Mat4c(u * rho * u.adjoint()), model, t);
}

CollectiveMoments collective_moments(const DickeState& state, const DephasingModel& model,
                                     const Vec3& sense_axis, double omega, double t) {
  require_time(t);
  require_unit(sense_axis, "sensing axis");
  require_aligned(model, sense_axis);
  const int n = state.n_qubits();
  const std::array<Mat2c, 3> sigma{pauli_x(), pauli_y(), pauli_z()};

  const Mat2c rho1 = apply_local_dephasing(reduced_density_1(state), model, t);
  Vec3 first;
  for (int a = 0; a < 3; ++a) first[a] = 0.5 * n * (sigma[a] * rho1).trace().real();

  Mat3 second = Mat3::Identity() * (0.25 * n);
  if (n >= 2) {
    const Mat4c rho2 = apply_local_dephasing(reduced_density_2(state), model, t);
    const double pair_weight = 0.25 * n * (n - 1.0);
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) {
        const double c = (kron(sigma[a], sigma[b]) * rho2).trace().real();
        second(a, b) += pair_weight * c;
        if (b != a) second(b, a) += pair_weight * c;
      }
  }

  // Rotation acts on the moment tensors through its SO(3) image.
  const Mat3 r = rotation_matrix(sense_axis, omega * t);
  const Mat3 k = cross_matrix(sense_axis);
  CollectiveMoments m;
  m.n_qubits = n;
  m.first = r * first;
  m.second = r * second * r.transpose();
  m.dfirst_domega = t * k * m.first;
  m.dsecond_domega = t * (k * m.second - m.second * k);
  return m;
}

SandwichValue coherent_sandwich_with_derivative(cplx x, cplx y, cplx w, cplx v, int n_qubits,
                                                const DephasingModel& model, double omega,
                                                double t) {
  if (n_qubits < 1) throw Error(ErrorKind::invalid_dimension, "N must be >= 1");
  for (cplx c : {x, y, w, v}) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw Error(ErrorKind::validation, "coherent labels must be finite");
    }
  }
  require_time(t);
  const Vec3& n = model.axis;
  require_unit(n, "sensing axis", 1e-9);

  const Eigen::Vector2cd kx(1.0, x), ky(1.0, y), kw(1.0, w), kv(1.0, v);
  const Mat2c outer = ky * kw.adjoint();
  const Mat2c u = single_qubit_rotation(n, omega * t);
  const Mat2c evolved = u * apply_local_dephasing(outer, model, t) * u.adjoint();
  const Mat2c sn = pauli_along(n);
  const Mat2c devolved = cplx(0.0, -0.5 * t) * (sn * evolved - evolved * sn);

  const cplx b = kx.dot(evolved * kv);
  const cplx db = kx.dot(devolved * kv);
  const double log_norm = 0.5 * (std::log1p(std::norm(x)) + std::log1p(std::norm(y)) +
                                 std::log1p(std::norm(w)) + std::log1p(std::norm(v)));
  const double nq = n_qubits;
  if (b == cplx(0.0, 0.0)) {
    const cplx deriv = n_qubits == 1 ? db * std::exp(-log_norm) : cplx(0.0, 0.0);
    return {cplx(0.0, 0.0), deriv};
  }
  const cplx value = std::exp(nq * (std::log(b) - log_norm));
  return {value, nq * value * db / b};
}

cplx coherent_sandwich(cplx x, cplx y, cplx w, cplx v, int n_qubits, const DephasingModel& model,
                       double omega, double t) {
  return coherent_sandwich_with_derivative(x, y, w, v, n_qubits, model, omega, t).value;
}

CMatrix dephase_symmetric_block(const CMatrix& rho, const DephasingModel& model, double t) {
  const int n = static_cast<int>(rho.rows()) - 1;
  if (n < 1 || rho.cols() != rho.rows()) {
    throw Error(ErrorKind::dimension_mismatch, "Dicke density matrix must be (N+1)x(N+1)");
  }
  const double d = model.decay(t);
  if (d == 1.0) return rho;
  if (std::abs(std::abs(model.axis.z()) - 1.0) > 1e-9) {
    throw Error(ErrorKind::unsupported_configuration,
                "symmetric-block dephasing is implemented for the z axis only");
  }
  CMatrix out(rho.rows(), rho.cols());
  for (int a = 0; a <= n; ++a) {
    for (int b = a; b <= n; ++b) {
      double f = 0.0;
      const int lo = std::max(0, b - (n - a));
      const int hi = std::min(a, b);
      for (int l = lo; l <= hi; ++l) {
        const double comb =
            std::exp(log_binomial(a, l) + log_binomial(n - a, b - l) - log_binomial(n, b));
        f += comb * std::pow(d, a + b - 2 * l);
      }
      out(a, b) = f * rho(a, b);
      out(b, a) = f * rho(b, a);
    }
  }
  return out;
}

}  // namespace spinmetro
