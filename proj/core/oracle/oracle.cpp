#include "spinmetro/oracle.hpp"

#include <bit>
#include <cmath>

#include <fmt/format.h>

namespace spinmetro::oracle {
namespace {

void require_scale(int n, int cap = kMaxQubits) {
  if (n < 1 || n > cap) {
    throw Error(ErrorKind::oracle_scale,
                fmt::format("brute-force oracle supports 1 <= N <= {}, got {}", cap, n));
  }
}

double coherence_factor(const DephasingModel& model, double t) {
  switch (model.kind) {
    case NoiseKind::none: return 1.0;
    case NoiseKind::gaussian_nonmarkovian: return std::exp(-(model.gamma * t) * (model.gamma * t));
    case NoiseKind::exponential_markovian: return std::exp(-model.gamma * t);
  }
  return 1.0;
}

Mat2c sigma_along(const Vec3& a) {
  Mat2c s;
  // basis (g, e): sigma_z = diag(-1, 1), sigma_y = [[0, i], [-i, 0]]
  s << -a.z(), cplx(a.x(), a.y()), cplx(a.x(), -a.y()), a.z();
  return s;
}

inline cplx mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// rows of m: (op on `qubit`) * m
CMatrix act_left(const CMatrix& m, int qubit, const Mat2c& op) {
  CMatrix out(m.rows(), m.cols());
  const Eigen::Index dim = m.rows();
  const Eigen::Index bit = Eigen::Index{1} << qubit;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const cplx* src = m.col(c).data();
    cplx* dst = out.col(c).data();
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (i & bit) continue;
      const Eigen::Index j = i | bit;
      dst[i] = mul(op(0, 0), src[i]) + mul(op(0, 1), src[j]);
      dst[j] = mul(op(1, 0), src[i]) + mul(op(1, 1), src[j]);
    }
  }
  return out;
}

// columns of m: m * (op on `qubit`)^dagger
CMatrix act_right_adjoint(const CMatrix& m, int qubit, const Mat2c& op) {
  CMatrix out(m.rows(), m.cols());
  const Eigen::Index rows = m.rows();
  const Eigen::Index bit = Eigen::Index{1} << qubit;
  const cplx c00 = std::conj(op(0, 0)), c01 = std::conj(op(0, 1));
  const cplx c10 = std::conj(op(1, 0)), c11 = std::conj(op(1, 1));
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    if (i & bit) continue;
    const Eigen::Index j = i | bit;
    const cplx *mi = m.col(i).data(), *mj = m.col(j).data();
    cplx *oi = out.col(i).data(), *oj = out.col(j).data();
    for (Eigen::Index r = 0; r < rows; ++r) {
      oi[r] = mul(c00, mi[r]) + mul(c01, mj[r]);
      oj[r] = mul(c10, mi[r]) + mul(c11, mj[r]);
    }
  }
  return out;
}

CMatrix conjugate_by(const CMatrix& rho, int qubit, const Mat2c& op) {
  return act_right_adjoint(act_left(rho, qubit, op), qubit, op);
}

CVector product_state(const Eigen::Vector2cd& single, int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  CVector psi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    cplx a = 1.0;
    for (int q = 0; q < n; ++q) a *= single[(i >> q) & 1];
    psi[i] = a;
  }
  return psi;
}

Eigen::VectorXd raise_vec(const Eigen::VectorXd& v, int n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    for (int q = 0; q < n; ++q) {
      if (!((i >> q) & 1)) out[i | (Eigen::Index{1} << q)] += v[i];
    }
  }
  return out;
}

Eigen::VectorXd lower_vec(const Eigen::VectorXd& v, int n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    for (int q = 0; q < n; ++q) {
      if ((i >> q) & 1) out[i & ~(Eigen::Index{1} << q)] += v[i];
    }
  }
  return out;
}

// reduced state of qubits (qa, qb), index 2 * bit(qa) + bit(qb)
Mat4c pair_rdm(const CMatrix& rho, int qa, int qb) {
  const Eigen::Index ba = Eigen::Index{1} << qa, bb = Eigen::Index{1} << qb;
  const Eigen::Index offset[4] = {0, bb, ba, ba | bb};
  Mat4c out = Mat4c::Zero();
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    if (r & (ba | bb)) continue;
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 4; ++y) out(x, y) += rho(r | offset[x], r | offset[y]);
  }
  return out;
}

}  // namespace

void FullState::validate() const {
  if (std::abs(rho.trace() - cplx(1.0)) > 1e-12) {
    throw Error(ErrorKind::validation, "oracle state trace differs from 1");
  }
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorKind::validation, "oracle state is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-10) {
    throw Error(ErrorKind::validation, "oracle state is not positive semidefinite");
  }
}

FullState pure(const CVector& psi, int n_qubits) {
  require_scale(n_qubits);
  if (psi.size() != (Eigen::Index{1} << n_qubits)) {
    throw Error(ErrorKind::dimension_mismatch, "state vector size is not 2^N");
  }
  const CVector u = psi.normalized();
  return {n_qubits, u * u.adjoint()};
}

FullState embed_dicke(const DickeState& state) {
  const int n = state.n_qubits();
  require_scale(n);
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::vector<double> count(n + 1, 0.0);
  for (Eigen::Index i = 0; i < dim; ++i) count[std::popcount(static_cast<unsigned>(i))] += 1.0;
  CVector psi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const int k = std::popcount(static_cast<unsigned>(i));
    psi[i] = state[k] / std::sqrt(count[k]);
  }
  return {n, psi * psi.adjoint()};
}

CVector brute_coherent(cplx z, int n_qubits) {
  require_scale(n_qubits);
  Eigen::Vector2cd single(1.0, z);
  return product_state(single.normalized(), n_qubits);
}

CVector brute_oat(cplx z, double chi, int n_qubits) {
  CVector psi = brute_coherent(z, n_qubits);
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double jz = std::popcount(static_cast<unsigned>(i)) - 0.5 * n_qubits;
    psi[i] *= std::polar(1.0, -chi * jz * jz);
  }
  return psi;
}

CVector brute_tat(double chi, int n_qubits) {
  require_scale(n_qubits);
  // exp(chi A) e_0 with A = J_+^2 - J_-^2, by substepped Taylor series
  const double bound = std::abs(chi) * 0.5 * n_qubits * n_qubits + 1.0;
  const int substeps = static_cast<int>(std::ceil(bound));
  const double h = chi / substeps;
  auto apply_a = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd up = raise_vec(raise_vec(v, n_qubits), n_qubits);
    const Eigen::VectorXd down = lower_vec(lower_vec(v, n_qubits), n_qubits);
    return Eigen::VectorXd(up - down);
  };
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Eigen::Index{1} << n_qubits);
  v[0] = 1.0;
  for (int s = 0; s < substeps; ++s) {
    Eigen::VectorXd term = v, sum = v;
    for (int k = 1; k < 60; ++k) {
      term = apply_a(term) * (h / k);
      sum += term;
      if (term.norm() < 1e-18 * sum.norm()) break;
    }
    v = sum;
  }
  return v.cast<cplx>();
}

CVector brute_cat(cplx z, int n_qubits) {
  CVector psi = brute_coherent(z, n_qubits);
  psi[0] += 1.0;
  return psi.normalized();
}

CVector brute_ghz(int n_qubits) {
  require_scale(n_qubits);
  CVector psi = CVector::Zero(Eigen::Index{1} << n_qubits);
  psi[0] = psi[psi.size() - 1] = 1.0 / std::sqrt(2.0);
  return psi;
}

CVector brute_state(const StateSpec& spec) {
  switch (spec.kind) {
    case StateKind::coherent: return brute_coherent(spec.z, spec.n_qubits);
    case StateKind::oat: return brute_oat(spec.z, spec.chi, spec.n_qubits);
    case StateKind::tat: return brute_tat(spec.chi, spec.n_qubits);
    case StateKind::cat: return brute_cat(spec.z, spec.n_qubits);
    case StateKind::ghz: return brute_ghz(spec.n_qubits);
  }
  throw Error(ErrorKind::validation, "unknown state kind");
}

CMatrix collective(int n_qubits, const Vec3& axis) {
  require_scale(n_qubits, kMaxQubits + 1);
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  const Mat2c s = 0.5 * sigma_along(axis);
  CMatrix j = CMatrix::Zero(dim, dim);
  const CMatrix id = CMatrix::Identity(dim, dim);
  for (int q = 0; q < n_qubits; ++q) j += act_left(id, q, s);
  return j;
}

FullState dephase(const FullState& state, const DephasingModel& model, double t) {
  if (t < 0.0) throw Error(ErrorKind::validation, "dephasing time must be >= 0");
  const double p = 0.5 * (1.0 + coherence_factor(model, t));
  const Mat2c s = sigma_along(model.axis.normalized());
  FullState out = state;
  for (int q = 0; q < state.n_qubits; ++q) {
    out.rho = p * out.rho + (1.0 - p) * conjugate_by(out.rho, q, s);
  }
  return out;
}

FullState rotate(const FullState& state, const Vec3& axis, double angle) {
  const Mat2c s = sigma_along(axis.normalized());
  const Mat2c u = std::cos(0.5 * angle) * Mat2c::Identity() - cplx(0.0, std::sin(0.5 * angle)) * s;
  FullState out = state;
  for (int q = 0; q < state.n_qubits; ++q) out.rho = conjugate_by(out.rho, q, u);
  return out;
}

FullState expose(const FullState& state, const DephasingModel& model, const Vec3& sense_axis,
                 double omega, double t) {
  return rotate(dephase(state, model, t), sense_axis, omega * t);
}

Moments moments(const FullState& state) {
  require_scale(state.n_qubits);
  const int n = state.n_qubits;
  Mat2c pauli[3];
  for (int a = 0; a < 3; ++a) pauli[a] = sigma_along(Vec3::Unit(a));

  Moments m;
  for (int q = 0; q < n; ++q) {
    const Mat2c r = partial_trace_1(state, q);
    for (int a = 0; a < 3; ++a) {
      m.first[a] += 0.5 * (r * pauli[a]).trace().real();
      for (int b = 0; b < 3; ++b) m.second(a, b) += 0.25 * (r * pauli[a] * pauli[b]).trace().real();
    }
  }
  for (int q = 0; q < n; ++q) {
    for (int p = q + 1; p < n; ++p) {
      const Mat4c r = pair_rdm(state.rho, q, p);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          Mat4c ab, ba;
          for (int x = 0; x < 4; ++x)
            for (int y = 0; y < 4; ++y) {
              ab(x, y) = pauli[a](x >> 1, y >> 1) * pauli[b](x & 1, y & 1);
              ba(x, y) = pauli[b](x >> 1, y >> 1) * pauli[a](x & 1, y & 1);
            }
          m.second(a, b) += 0.25 * (r * (ab + ba)).trace().real();
        }
      }
    }
  }
  m.second = (0.5 * (m.second + m.second.transpose())).eval();
  return m;
}

double probability(const FullState& state, const CMatrix& projector) {
  return (projector * state.rho).trace().real();
}

double squeezing(const FullState& state) {
  const Moments m = moments(state);
  const double len = m.first.norm();
  if (len < 1e-12) throw Error(ErrorKind::no_mean_spin, "oracle: mean spin vanishes");
  const Vec3 u = m.first / len;
  Vec3 helper = std::abs(u.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = (helper - helper.dot(u) * u).normalized();
  const Vec3 e2 = u.cross(e1);
  const Mat3 cov = m.second - m.first * m.first.transpose();
  const double a = e1.dot(cov * e1), c = e2.dot(cov * e2), b = e1.dot(cov * e2);
  const double var_min = 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return state.n_qubits * var_min / (len * len);
}

double qfi(const FullState& state, const CMatrix& generator) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(state.rho);
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  const CMatrix g = solver.eigenvectors().adjoint() * generator * solver.eigenvectors();
  double f = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
      const double s = lambda[i] + lambda[k];
      if (s > 1e-12) {
        const double d = lambda[i] - lambda[k];
        f += d * d / s * std::norm(g(i, k));
      }
    }
  }
  return 2.0 * f;
}

double cat_readout(cplx z, int n_qubits, double omega, double t, const DephasingModel& model) {
  require_scale(n_qubits, kMaxQubits - 1);
  DephasingModel along_z = model;
  along_z.axis = Vec3::UnitZ();
  const FullState memory =
      expose(pure(brute_cat(z, n_qubits), n_qubits), along_z, Vec3::UnitZ(), omega, t);

  // Joint index = control * 2^N + memory; control is the top bit.
  const Eigen::Index m = memory.rho.rows();
  CMatrix rho = CMatrix::Zero(2 * m, 2 * m);
  rho.topLeftCorner(m, m) = memory.rho;

  // control flip on memory |0...0>: |g,0> -> |e,0>, |e,0> -> -|g,0>
  auto flip_rows = [&](CMatrix& x) {
    const Eigen::RowVectorXcd g0 = x.row(0);
    x.row(0) = -x.row(m);
    x.row(m) = g0;
  };
  flip_rows(rho);
  rho.adjointInPlace();
  flip_rows(rho);
  rho.adjointInPlace();

  Eigen::Matrix2cd single;
  const double s = std::sqrt(1.0 + std::norm(z));
  single << 1.0 / s, -std::conj(z) / s, z / s, 1.0 / s;
  // memory rotation on the control-|e> rows, then the same on columns
  for (int pass = 0; pass < 2; ++pass) {
    CMatrix lower = rho.bottomRows(m);
    for (int q = 0; q < n_qubits; ++q) lower = act_left(lower, q, single);
    rho.bottomRows(m) = lower;
    rho.adjointInPlace();
  }

  const Eigen::Vector2cd plus_y = Eigen::Vector2cd(1.0, cplx(0.0, -1.0)) / std::sqrt(2.0);
  const Mat2c py = plus_y * plus_y.adjoint();
  double p = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      p += (py(b, a) * rho.block(a * m, b * m, m, m).trace()).real();
    }
  }
  return p;
}

Mat2c partial_trace_1(const FullState& state, int qubit) {
  Mat2c out = Mat2c::Zero();
  const Eigen::Index bit = Eigen::Index{1} << qubit;
  for (Eigen::Index r = 0; r < state.rho.rows(); ++r) {
    if (r & bit) continue;
    out(0, 0) += state.rho(r, r);
    out(0, 1) += state.rho(r, r | bit);
    out(1, 0) += state.rho(r | bit, r);
    out(1, 1) += state.rho(r | bit, r | bit);
  }
  return out;
}

FullState swap_qubits(const FullState& state, int a, int b) {
  const Eigen::Index dim = state.rho.rows();
  std::vector<Eigen::Index> perm(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Eigen::Index ba = (i >> a) & 1, bb = (i >> b) & 1;
    Eigen::Index j = i & ~((Eigen::Index{1} << a) | (Eigen::Index{1} << b));
    perm[i] = j | (ba << b) | (bb << a);
  }
  FullState out = state;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) out.rho(perm[i], perm[j]) = state.rho(i, j);
  }
  return out;
}

}  // namespace spinmetro::oracle
