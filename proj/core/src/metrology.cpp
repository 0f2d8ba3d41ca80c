#include "spinmetro/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

namespace spinmetro {
namespace {

constexpr double kDegenerateRel = 1e-9;

bool lexicographically_greater(const Vec3& a, const Vec3& b) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(a[i] - b[i]) > 1e-12) return a[i] > b[i];
  }
  return false;
}

// Projections of the coordinate axes onto span(basis), normalized and
// sign-canonical; the lexicographically largest wins.
Vec3 best_projected_axis(const std::vector<Vec3>& basis) {
  std::optional<Vec3> best;
  for (int i = 0; i < 3; ++i) {
    Vec3 p = Vec3::Zero();
    for (const Vec3& b : basis) p += b[i] * b;
    if (p.norm() < 1e-6) continue;
    const Vec3 c = canonical_sign(p.normalized());
    if (!best || lexicographically_greater(c, *best)) best = c;
  }
  return best.value_or(canonical_sign(basis.front()));
}

double scale_of(const Eigen::VectorXd& values) {
  return std::max(1.0, values.cwiseAbs().maxCoeff());
}

DephasingModel with_axis(DephasingModel model, const Vec3& axis) {
  model.axis = axis;
  return model;
}

}  // namespace

std::string_view to_string(UncertaintyMethod method) noexcept {
  switch (method) {
    case UncertaintyMethod::moment_propagation: return "moment_propagation";
    case UncertaintyMethod::cat_closed_form: return "cat_closed_form";
    case UncertaintyMethod::f_bound: return "f_bound";
    case UncertaintyMethod::qfi_bound: return "qfi_bound";
  }
  return "unknown";
}

void SensingConfig::validate() const {
  require_unit(sense_axis, "sensing axis");
  require_unit(estimator_axis, "estimator axis");
  require_unit(mean_axis, "mean axis");
  if (std::abs(estimator_axis.dot(mean_axis)) > 1e-9) {
    throw Error(ErrorKind::validation, "estimator axis must be orthogonal to the mean axis");
  }
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorKind::validation, fmt::format("exposure time must be > 0, got {}", t));
  }
  if (!(total_time >= t)) {
    throw Error(ErrorKind::validation,
                fmt::format("total time T = {} must be >= t = {}", total_time, t));
  }
  if (!std::isfinite(omega)) throw Error(ErrorKind::validation, "omega must be finite");
}

UncertaintyRecord propagate_error(double variance, double slope, double mu,
                                  UncertaintyMethod method) {
  UncertaintyRecord rec;
  rec.variance_used = variance;
  rec.signal_slope = slope;
  rec.mu = mu;
  rec.method = method;
  rec.delta_omega = slope == 0.0 ? std::numeric_limits<double>::infinity()
                                 : std::sqrt(std::max(variance, 0.0) / mu) / std::abs(slope);
  return rec;
}

Vec3 mean_spin_direction(const CollectiveMoments& moments) {
  const double len = moments.first.norm();
  if (!(len > 1e-9 * moments.n_qubits)) {
    throw Error(ErrorKind::no_mean_spin,
                fmt::format("mean spin vector vanishes (|<J>| = {:.3g})", len));
  }
  return moments.first / len;
}

Vec3 min_variance_direction(const CollectiveMoments& moments, const Vec3& m) {
  require_unit(m, "mean axis", 1e-9);
  int least = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(m[i]) < std::abs(m[least]) - 1e-12) least = i;
  }
  Vec3 e1 = Vec3::Unit(least) - m[least] * m;
  e1.normalize();
  const Vec3 e2 = m.cross(e1);

  const Mat3 cov = moments.covariance();
  Eigen::Matrix2d block;
  block << e1.dot(cov * e1), e1.dot(cov * e2), e2.dot(cov * e1), e2.dot(cov * e2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(block);
  const Eigen::Vector2d lambda = solver.eigenvalues();
  if (lambda[1] - lambda[0] <= kDegenerateRel * scale_of(lambda)) {
    return best_projected_axis({e1, e2});
  }
  const Eigen::Vector2d v = solver.eigenvectors().col(0);
  return canonical_sign((v[0] * e1 + v[1] * e2).normalized());
}

Vec3 sensing_direction(const CollectiveMoments& moments, const std::optional<Vec3>& m,
                       const std::optional<Vec3>& r) {
  Eigen::SelfAdjointEigenSolver<Mat3> solver(moments.covariance());
  const Eigen::Vector3d lambda = solver.eigenvalues();
  const double tol = kDegenerateRel * scale_of(lambda);
  if (lambda[2] - lambda[1] > tol) return canonical_sign(solver.eigenvectors().col(2));

  std::vector<Vec3> top;
  for (int i = 2; i >= 0 && lambda[2] - lambda[i] <= tol; --i) {
    top.push_back(solver.eigenvectors().col(i));
  }
  if (m && r) {
    const Vec3 preferred = m->cross(*r);
    Vec3 p = Vec3::Zero();
    for (const Vec3& b : top) p += b.dot(preferred) * b;
    if (p.norm() > 1e-6) return canonical_sign(p.normalized());
  }
  return best_projected_axis(top);
}

SqueezingGeometry squeezing_geometry(const DickeState& state) {
  SqueezingGeometry g;
  g.moments = collective_moments(state, DephasingModel::none(), Vec3::UnitZ(), 0.0, 0.0);
  g.mean_axis = mean_spin_direction(g.moments);
  g.estimator_axis = min_variance_direction(g.moments, g.mean_axis);
  g.sense_axis = sensing_direction(g.moments, g.mean_axis, g.estimator_axis);
  g.mean_m = g.moments.mean(g.mean_axis);
  g.var_r = std::max(g.moments.variance(g.estimator_axis), 0.0);
  g.xi2 = state.n_qubits() * g.var_r / (g.mean_m * g.mean_m);
  return g;
}

double squeezing_parameter(const DickeState& state) { return squeezing_geometry(state).xi2; }

SensingConfig squeezed_config(const SqueezingGeometry& geometry, double t, double total_time,
                              double omega) {
  SensingConfig c;
  c.sense_axis = geometry.sense_axis;
  c.estimator_axis = geometry.estimator_axis;
  c.mean_axis = geometry.mean_axis;
  c.t = t;
  c.total_time = total_time;
  c.omega = omega;
  return c;
}

UncertaintyRecord uncertainty_moment_propagation(const DickeState& state,
                                                 const DephasingModel& model,
                                                 const SensingConfig& config) {
  config.validate();
  const CollectiveMoments m =
      collective_moments(state, model, config.sense_axis, config.omega, config.t);
  const Vec3& r = config.estimator_axis;
  return propagate_error(m.variance(r), r.dot(m.dfirst_domega), config.mu(),
                         UncertaintyMethod::moment_propagation);
}

double f_bound_from_moments(double var_r, double mean_m, int n_qubits, double t, double gamma,
                            double total_time) {
  if (!(t > 0.0)) throw Error(ErrorKind::validation, "f bound needs t > 0");
  if (!(total_time >= t)) throw Error(ErrorKind::validation, "f bound needs T >= t");
  const double gt = gamma * t;
  const double excess = 0.25 * n_qubits * std::expm1(2.0 * gt * gt);
  return std::sqrt(2.0 * (var_r + excess) / (total_time * t * mean_m * mean_m));
}

double f_bound(const DickeState& state, double t, double gamma, double total_time) {
  const SqueezingGeometry g = squeezing_geometry(state);
  return f_bound_from_moments(g.var_r, g.mean_m, state.n_qubits(), t, gamma, total_time);
}

double schedule_exposure(int n_qubits, double s1, double alpha) {
  if (n_qubits < 1) throw Error(ErrorKind::invalid_dimension, "N must be >= 1");
  if (!(s1 >= 0.0) || !(alpha > 0.0)) {
    throw Error(ErrorKind::validation, "schedule needs s1 >= 0 and alpha > 0");
  }
  return alpha * std::pow(static_cast<double>(n_qubits), -s1);
}

double f_scaling_exponent(double s1, double s2, double s3) {
  if (s3 > 1.0) return 0.5 * (s1 + s3) - s2;
  if (s1 < 0.5 * (1.0 - s3)) return 0.5 * (1.0 - s1) - s2;
  return 0.5 * (s1 + s3) - s2;
}

CatReadout cat_readout(cplx z, int n_qubits, double omega, double t, const DephasingModel& model) {
  if (model.kind != NoiseKind::none && std::abs(std::abs(model.axis.z()) - 1.0) > 1e-9) {
    throw Error(ErrorKind::unsupported_configuration,
                "cat readout assumes the field and dephasing along z");
  }
  if (z == cplx(0.0, 0.0)) {
    throw Error(ErrorKind::degenerate_cat, "spin cat with z = 0 collapses onto |0,N>");
  }
  const DephasingModel along_z = with_axis(model, Vec3::UnitZ());
  const double overlap = std::exp(-0.5 * n_qubits * std::log1p(std::norm(z)));  // <0|z>
  const double norm2 = 2.0 * (1.0 + overlap);

  cplx value = 0.0, deriv = 0.0;
  for (cplx y : {cplx(0.0), z}) {
    for (cplx w : {cplx(0.0), z}) {
      const SandwichValue s =
          coherent_sandwich_with_derivative(0.0, y, w, z, n_qubits, along_z, omega, t);
      value += s.value;
      deriv += s.domega;
    }
  }
  return {0.5 - value.imag() / norm2, -deriv.imag() / norm2};
}

double cat_readout_probability(cplx z, int n_qubits, double omega, double t,
                               const DephasingModel& model) {
  return cat_readout(z, n_qubits, omega, t, model).p_plus;
}

UncertaintyRecord cat_uncertainty(cplx z, int n_qubits, double t, double total_time,
                                  const DephasingModel& model, double omega) {
  if (!(t > 0.0) || !(total_time >= t)) {
    throw Error(ErrorKind::validation, "cat uncertainty needs t > 0 and T >= t");
  }
  const CatReadout r = cat_readout(z, n_qubits, omega, t, model);
  return propagate_error(r.p_plus * (1.0 - r.p_plus), r.dp_domega, total_time / t,
                         UncertaintyMethod::cat_closed_form);
}

UncertaintyRecord cat_uncertainty_projector(cplx z, int n_qubits, double t, double total_time,
                                            const DephasingModel& model, double omega,
                                            ChannelOrder order) {
  if (!(t > 0.0) || !(total_time >= t)) {
    throw Error(ErrorKind::validation, "cat uncertainty needs t > 0 and T >= t");
  }
  const DephasingModel along_z = with_axis(model, Vec3::UnitZ());
  const CVector cat = spin_cat(z, n_qubits).amplitudes();
  const int dim = n_qubits + 1;

  CVector phase(dim);
  Eigen::VectorXd jz(dim);
  for (int k = 0; k < dim; ++k) {
    jz[k] = k - 0.5 * n_qubits;
    phase[k] = std::polar(1.0, -omega * t * jz[k]);
  }
  CMatrix rho = cat * cat.adjoint();
  if (order == ChannelOrder::dephase_then_rotate) {
    rho = dephase_symmetric_block(rho, along_z, t);
    rho = phase.asDiagonal() * rho * phase.conjugate().asDiagonal();
  } else {
    rho = phase.asDiagonal() * rho * phase.conjugate().asDiagonal();
    rho = dephase_symmetric_block(rho, along_z, t);
  }
  const CMatrix drho = cplx(0.0, -t) * (jz.asDiagonal() * rho - rho * jz.asDiagonal());

  // Effective observable on the symmetric block: P+ = 1/2 - tr(Y rho),
  // Y = (X - X^dag)/(2i), X = Q0 |z><0|.
  CVector target = spin_coherent(z, n_qubits).amplitudes();
  target[0] = 0.0;
  CMatrix x = CMatrix::Zero(dim, dim);
  x.col(0) = target;
  const CMatrix y = (x - x.adjoint()) / cplx(0.0, 2.0);

  const double p = 0.5 - (y * rho).trace().real();
  const double dp = -(y * drho).trace().real();
  return propagate_error(p * (1.0 - p), dp, total_time / t, UncertaintyMethod::cat_closed_form);
}

double qfi_exact(const CMatrix& rho, const CMatrix& generator) {
  if (rho.rows() != rho.cols() || generator.rows() != rho.rows() ||
      generator.cols() != rho.cols()) {
    throw Error(ErrorKind::dimension_mismatch, "rho and generator must be square and equal size");
  }
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorKind::validation, "density matrix is not Hermitian");
  }
  if (std::abs(rho.trace().real() - 1.0) > 1e-10) {
    throw Error(ErrorKind::validation, "density matrix must have unit trace");
  }
  const CMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  if (lambda.minCoeff() < -1e-10) {
    throw Error(ErrorKind::validation,
                fmt::format("density matrix is not PSD (min eigenvalue {:.3g})", lambda.minCoeff()));
  }
  const CMatrix& v = solver.eigenvectors();
  const CMatrix drho = cplx(0.0, -1.0) * (generator * h - h * generator);
  const CMatrix d = v.adjoint() * drho * v;
  double f = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    for (Eigen::Index j = 0; j < lambda.size(); ++j) {
      const double s = lambda[i] + lambda[j];
      if (s > 1e-12) f += std::norm(d(i, j)) / s;
    }
  }
  return 2.0 * f;
}

double minimize_log_scan(const std::function<double(double)>& f, double lo, double hi,
                         int points_per_decade) {
  if (!(lo > 0.0) || !(hi > lo)) {
    throw Error(ErrorKind::validation, "log scan needs 0 < lo < hi");
  }
  const double a = std::log10(lo), b = std::log10(hi);
  const int steps = std::max(2, static_cast<int>(std::ceil((b - a) * points_per_decade)));
  auto g = [&](double x) {
    const double v = f(std::pow(10.0, x));
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double v = g(a + (b - a) * i / steps);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double left = a + (b - a) * std::max(best - 1, 0) / steps;
  const double right = a + (b - a) * std::min(best + 1, steps) / steps;
  const auto [x, v] = boost::math::tools::brent_find_minima(g, left, right, 40);
  return std::pow(10.0, v <= best_value ? x : a + (b - a) * best / steps);
}

namespace {

double xi2_or_inf(const DickeState& s) {
  try {
    return squeezing_parameter(s);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::no_mean_spin) return std::numeric_limits<double>::infinity();
    throw;
  }
}

}  // namespace

ChiOptimum optimize_oat_chi(int n_qubits, cplx z) {
  auto objective = [&](double chi) { return xi2_or_inf(oat_state(z, chi, n_qubits)); };
  const double chi = minimize_log_scan(objective, 1e-3 / n_qubits, kPi);
  return {chi, objective(chi)};
}

ChiOptimum optimize_tat_chi(const TatPropagator& propagator) {
  auto objective = [&](double chi) { return xi2_or_inf(propagator.state(chi)); };
  const double chi = minimize_log_scan(objective, 1e-3 / propagator.n_qubits(), kPi);
  return {chi, objective(chi)};
}

UncertaintyRecord probe_uncertainty(const DickeState& state, const StateSpec& spec,
                                    const DephasingModel& model, double t, double total_time,
                                    double omega) {
  if (spec.kind == StateKind::cat) {
    return cat_uncertainty(spec.z, state.n_qubits(), t, total_time,
                           with_axis(model, Vec3::UnitZ()), omega);
  }
  const SqueezingGeometry g = squeezing_geometry(state);
  return uncertainty_moment_propagation(state, with_axis(model, g.sense_axis),
                                        squeezed_config(g, t, total_time, omega));
}

ExposureOptimum optimize_exposure(const std::function<UncertaintyRecord(double)>& uncertainty,
                                  double gamma, double t_max) {
  if (!(gamma > 0.0)) {
    throw Error(ErrorKind::validation, "exposure optimization needs gamma > 0");
  }
  const double lo = 1e-4 / gamma, hi = std::min(1e2 / gamma, t_max);
  if (!(hi > lo)) {
    throw Error(ErrorKind::validation, "exposure bracket is empty (T too small)");
  }
  const double t = minimize_log_scan(
      [&](double tt) { return uncertainty(tt).delta_omega; }, lo, hi, 8);
  if (std::abs(std::log10(t / lo)) < 1e-3 || std::abs(std::log10(hi / t)) < 1e-3) {
    throw Error(ErrorKind::numerical,
                fmt::format("optimal exposure t = {:.3g} sits on the bracket edge", t));
  }
  return {t, uncertainty(t)};
}

FitResult markovian_comparison(const StateSpec& probe, std::span<const int> n_grid,
                               double total_time, const DephasingModel& model) {
  if (model.kind != NoiseKind::exponential_markovian) {
    throw Error(ErrorKind::validation, "markovian comparison needs exponential dephasing");
  }
  if (n_grid.size() < 3) {
    throw Error(ErrorKind::insufficient_points, "markovian comparison needs >= 3 grid points");
  }
  std::vector<double> ns, dw;
  for (int n : n_grid) {
    StateSpec spec = probe;
    spec.n_qubits = n;
    const DickeState state = make_state(spec);
    const ExposureOptimum best = optimize_exposure(
        [&](double t) { return probe_uncertainty(state, spec, model, t, total_time); },
        model.gamma, total_time);
    ns.push_back(n);
    dw.push_back(best.record.delta_omega);
  }
  return fit_power_law(ns, dw);
}

}  // namespace spinmetro
