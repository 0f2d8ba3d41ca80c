#pragma once

// Estimators, bounds and exposure schedules for field sensing with collective
// spin probes.
//
// Uncertainty from error propagation with mu = T/t repetitions:
//   delta_omega = sqrt(Var(A) / mu) / |dE(A)/domega|
// A is J_r for squeezed/coherent probes and the control-qubit sigma_y = +1
// outcome after the cat readout sequence for cat probes.

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>

#include "spinmetro/dephasing.hpp"
#include "spinmetro/fit.hpp"
#include "spinmetro/states.hpp"

namespace spinmetro {

struct SensingConfig {
  Vec3 sense_axis = Vec3::UnitZ();
  Vec3 estimator_axis = Vec3::UnitY();
  Vec3 mean_axis = Vec3::UnitX();
  double t = 1.0;           // exposure per shot
  double total_time = 1.0;  // T
  double omega = 0.0;       // evaluation point

  void validate() const;
  [[nodiscard]] double mu() const { return total_time / t; }
};

enum class UncertaintyMethod { moment_propagation, cat_closed_form, f_bound, qfi_bound };
std::string_view to_string(UncertaintyMethod method) noexcept;

struct UncertaintyRecord {
  double delta_omega = 0.0;
  double variance_used = 0.0;
  double signal_slope = 0.0;
  double mu = 0.0;
  UncertaintyMethod method = UncertaintyMethod::moment_propagation;

  /// Zero signal slope: reported as infinite uncertainty rather than thrown.
  [[nodiscard]] bool infinite() const { return !std::isfinite(delta_omega); }
};

UncertaintyRecord propagate_error(double variance, double slope, double mu,
                                  UncertaintyMethod method);

/// first / |first|; throws no_mean_spin when |first| <= 1e-9 N.
Vec3 mean_spin_direction(const CollectiveMoments& moments);

/// Direction in the plane orthogonal to m that minimizes Var(J_r).
Vec3 min_variance_direction(const CollectiveMoments& moments, const Vec3& m);

/// Top eigenvector of the covariance of (J_x, J_y, J_z). In a degenerate top
/// eigenspace m x r is preferred when given, otherwise the lexicographically
/// largest projected coordinate axis.
Vec3 sensing_direction(const CollectiveMoments& moments, const std::optional<Vec3>& m = {},
                       const std::optional<Vec3>& r = {});

/// Mean-spin, squeezed and anti-squeezed axes of a pure state.
struct SqueezingGeometry {
  CollectiveMoments moments;
  Vec3 mean_axis;
  Vec3 estimator_axis;
  Vec3 sense_axis;
  double mean_m = 0.0;  // E(J_m)
  double var_r = 0.0;   // Var(J_r)
  double xi2 = 0.0;     // N Var(J_r) / E(J_m)^2
};

SqueezingGeometry squeezing_geometry(const DickeState& state);
double squeezing_parameter(const DickeState& state);

/// Sensing configuration built from a state's squeezing geometry.
SensingConfig squeezed_config(const SqueezingGeometry& geometry, double t, double total_time,
                              double omega = 0.0);

UncertaintyRecord uncertainty_moment_propagation(const DickeState& state,
                                                 const DephasingModel& model,
                                                 const SensingConfig& config);

/// sqrt(2 {Var(J_r) + N (exp(2 (gamma t)^2) - 1)/4} / (T t E(J_m)^2)).
double f_bound_from_moments(double var_r, double mean_m, int n_qubits, double t, double gamma,
                            double total_time);
double f_bound(const DickeState& state, double t, double gamma, double total_time);

/// t = alpha N^{-s1}.
double schedule_exposure(int n_qubits, double s1, double alpha);

/// Leading exponent of f(N) for E(J_m) ~ N^{s2}, Var(J_r) ~ N^{s3}, t ~ N^{-s1}.
double f_scaling_exponent(double s1, double s2, double s3);

struct CatReadout {
  double p_plus = 0.5;
  double dp_domega = 0.0;
};

/// Probability of sigma_y = +1 on the control qubit after exposing |SC> to
/// the field along z and running the readout pulses:
///   P+ = 1/2 - Im <0,N| rho_t |z,N>.
CatReadout cat_readout(cplx z, int n_qubits, double omega, double t, const DephasingModel& model);
double cat_readout_probability(cplx z, int n_qubits, double omega, double t,
                               const DephasingModel& model);

/// Closed-form path (coherent-state sandwiches).
UncertaintyRecord cat_uncertainty(cplx z, int n_qubits, double t, double total_time,
                                  const DephasingModel& model, double omega = 0.0);

/// Dense Dicke-block path: builds rho_t and the effective readout observable
/// explicitly. Intended for cross-checks at small N.
UncertaintyRecord cat_uncertainty_projector(cplx z, int n_qubits, double t, double total_time,
                                            const DephasingModel& model, double omega = 0.0,
                                            ChannelOrder order = ChannelOrder::dephase_then_rotate);

/// F = 2 sum_{l_i + l_j > 1e-12} |<i| d rho |j>|^2 / (l_i + l_j), d rho = -i [G, rho].
/// The generator G carries the exposure time (G = t J_n for the field).
double qfi_exact(const CMatrix& rho, const CMatrix& generator);

/// Minimizes f over [lo, hi] with Brent's method after a coarse scan on a
/// log grid. Returns the argument.
double minimize_log_scan(const std::function<double(double)>& f, double lo, double hi,
                         int points_per_decade = 8);

struct ChiOptimum {
  double chi = 0.0;
  double xi2 = 0.0;
};

/// Twisting strength minimizing the squeezing parameter.
ChiOptimum optimize_oat_chi(int n_qubits, cplx z = 1.0);
ChiOptimum optimize_tat_chi(const TatPropagator& propagator);

/// Uncertainty of one probe at exposure t. Cat probes use the readout closed
/// form; coherent/oat/tat use moment propagation along their squeezing
/// geometry. GHZ has no mean spin and throws no_mean_spin.
UncertaintyRecord probe_uncertainty(const DickeState& state, const StateSpec& spec,
                                    const DephasingModel& model, double t, double total_time,
                                    double omega = 0.0);

struct ExposureOptimum {
  double t = 0.0;
  UncertaintyRecord record;
};

/// Brent search over log t in [1e-4/gamma, min(1e2/gamma, t_max)]. An
/// optimum on the bracket edge is reported as a numerical error.
ExposureOptimum optimize_exposure(const std::function<UncertaintyRecord(double)>& uncertainty,
                                  double gamma,
                                  double t_max = std::numeric_limits<double>::infinity());

/// Per-N optimized exposure under the template's noise model, then a log-log
/// fit of delta_omega against N.
FitResult markovian_comparison(const StateSpec& probe, std::span<const int> n_grid,
                               double total_time, const DephasingModel& model);

}  // namespace spinmetro
