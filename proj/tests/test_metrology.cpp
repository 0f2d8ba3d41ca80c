#include <gtest/gtest.h>

#include <cmath>

#include "spinmetro/metrology.hpp"
#include "spinmetro/oracle.hpp"

using namespace spinmetro;

namespace {

CollectiveMoments pure_moments(const DickeState& s) {
  return collective_moments(s, DephasingModel::none(), Vec3::UnitZ(), 0.0, 0.0);
}

}  // namespace

TEST(PropagateError, Formula) {
  const UncertaintyRecord r = propagate_error(4.0, -2.0, 4.0, UncertaintyMethod::moment_propagation);
  EXPECT_DOUBLE_EQ(r.delta_omega, 0.5);
  EXPECT_FALSE(r.infinite());
  EXPECT_TRUE(propagate_error(1.0, 0.0, 1.0, UncertaintyMethod::moment_propagation).infinite());
}

TEST(Geometry, CoherentAlongX) {
  const int n = 12;
  const SqueezingGeometry g = squeezing_geometry(spin_coherent({1.0, 0.0}, n));
  EXPECT_LT((g.mean_axis - Vec3::UnitX()).norm(), 1e-12);
  EXPECT_NEAR(g.mean_m, 6.0, 1e-12);
  EXPECT_NEAR(g.var_r, 3.0, 1e-12);
  EXPECT_NEAR(g.xi2, 1.0, 1e-12);
  EXPECT_NEAR(g.estimator_axis.dot(Vec3::UnitX()), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(g.sense_axis.dot(g.mean_axis.cross(g.estimator_axis))), 1.0, 1e-9);
}

TEST(Geometry, DegenerateCovariancePrefersMCrossR) {
  const CollectiveMoments m = pure_moments(spin_coherent({1.0, 0.0}, 6));
  EXPECT_LT((sensing_direction(m, Vec3::UnitX(), Vec3::UnitY()) - Vec3::UnitZ()).norm(), 1e-9);
  EXPECT_LT((sensing_direction(m, Vec3::UnitX(), Vec3::UnitZ()) - Vec3::UnitY()).norm(), 1e-9);
}

TEST(Geometry, MinVarianceDirectionBeatsAngleGrid) {
  const DickeState s = oat_state({1.0, 0.0}, 0.3, 6);
  const CollectiveMoments m = pure_moments(s);
  const Vec3 mean = mean_spin_direction(m);
  const Vec3 r = min_variance_direction(m, mean);
  EXPECT_NEAR(r.dot(mean), 0.0, 1e-12);
  const Vec3 u = mean.unitOrthogonal(), v = mean.cross(u);
  double best = 1e300, best_angle = 0.0;
  for (int deg = 0; deg < 180; ++deg) {
    const double a = deg * kPi / 180.0;
    const double var = m.variance(std::cos(a) * u + std::sin(a) * v);
    if (var < best) {
      best = var;
      best_angle = a;
    }
  }
  const Vec3 grid = std::cos(best_angle) * u + std::sin(best_angle) * v;
  EXPECT_LE(m.variance(r), best + 1e-12);
  EXPECT_GT(std::abs(r.dot(grid)), std::cos(2.0 * kPi / 180.0));
}

TEST(Geometry, GhzHasNoMeanSpin) {
  try {
    squeezing_geometry(ghz_state(5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::no_mean_spin);
  }
  const StateSpec spec{StateKind::ghz, 1.0, 0.0, 5};
  EXPECT_THROW(probe_uncertainty(ghz_state(5), spec, DephasingModel::none(), 0.1, 1.0), Error);
}

TEST(Geometry, GhzSensingAxisIsZ) {
  const CollectiveMoments m = pure_moments(ghz_state(4));
  EXPECT_LT((sensing_direction(m) - Vec3::UnitZ()).norm(), 1e-12);
  EXPECT_NEAR(m.variance(Vec3::UnitZ()), 4.0, 1e-12);
}

TEST(Squeezing, MatchesOracle) {
  for (int n : {3, 6, 9}) {
    for (double chi : {0.05, 0.2, 0.7}) {
      const StateSpec spec{StateKind::oat, std::polar(1.0, 0.3), chi, n};
      const double ref = oracle::squeezing(oracle::pure(oracle::brute_state(spec), n));
      EXPECT_NEAR(squeezing_parameter(make_state(spec)), ref, 1e-10) << n << " " << chi;
    }
  }
}

TEST(Uncertainty, CoherentStandardQuantumLimit) {
  const int n = 50;
  const double t = 0.2, total = 3.0;
  const DickeState s = spin_coherent({1.0, 0.0}, n);
  const StateSpec spec{StateKind::coherent, 1.0, 0.0, n};
  const UncertaintyRecord r = probe_uncertainty(s, spec, DephasingModel::none(), t, total);
  EXPECT_NEAR(r.delta_omega, 1.0 / std::sqrt(n * total * t), 1e-12);
  EXPECT_NEAR(f_bound(s, t, 0.0, total), std::sqrt(2.0) * r.delta_omega, 1e-12);
}

TEST(Uncertainty, GaussianNoiseCoherent) {
  const int n = 20;
  const double t = 0.5, total = 1.0, gamma = 0.8;
  const DickeState s = spin_coherent({1.0, 0.0}, n);
  const StateSpec spec{StateKind::coherent, 1.0, 0.0, n};
  const UncertaintyRecord r =
      probe_uncertainty(s, spec, DephasingModel::gaussian(gamma), t, total);
  // signal shrinks by d, variance of J_y stays N/4
  const double d = std::exp(-gamma * gamma * t * t);
  EXPECT_NEAR(r.delta_omega, std::sqrt(0.25 * n * t / total) / (0.5 * n * t * d), 1e-12);
}

TEST(Bound, ExponentTable) {
  EXPECT_NEAR(f_scaling_exponent(0.5, 1.0, 0.0), -0.75, 1e-15);
  EXPECT_NEAR(f_scaling_exponent(0.0, 1.0, 1.0), -0.5, 1e-15);
  EXPECT_NEAR(f_scaling_exponent(0.2, 1.0, 2.0), 0.1, 1e-15);
  EXPECT_NEAR(f_scaling_exponent(1.0 / 3.0, 1.0, 1.0 / 3.0), -2.0 / 3.0, 1e-15);
}

TEST(Bound, ScheduleExposure) {
  EXPECT_NEAR(schedule_exposure(100, 0.5, 0.3), 0.03, 1e-15);
}

TEST(CatReadout, ZeroFieldRealLabelIsHalf) {
  for (int n : {1, 4, 33}) {
    EXPECT_NEAR(cat_readout_probability({0.9, 0.0}, n, 0.0, 1.0, DephasingModel::gaussian(0.4)),
                0.5, 1e-14);
  }
}

TEST(CatReadout, MatchesJointSpaceOracle) {
  const cplx z(0.8, 0.5);
  for (int n : {1, 3, 5}) {
    for (const DephasingModel& model :
         {DephasingModel::none(), DephasingModel::gaussian(0.7), DephasingModel::markovian(1.2)}) {
      for (double omega : {0.0, 0.3, -1.1}) {
        EXPECT_NEAR(cat_readout_probability(z, n, omega, 0.6, model),
                    oracle::cat_readout(z, n, omega, 0.6, model), 1e-12);
      }
    }
  }
}

TEST(CatReadout, DerivativeMatchesFiniteDifference) {
  const cplx z(1.2, -0.2);
  const DephasingModel model = DephasingModel::gaussian(0.3);
  const double h = 1e-6;
  const CatReadout r = cat_readout(z, 12, 0.2, 0.7, model);
  const double fd = (cat_readout_probability(z, 12, 0.2 + h, 0.7, model) -
                     cat_readout_probability(z, 12, 0.2 - h, 0.7, model)) /
                    (2 * h);
  EXPECT_NEAR(r.dp_domega, fd, 1e-7);
}

TEST(CatReadout, ClosedFormMatchesProjectorPath) {
  for (int n : {2, 7, 15}) {
    for (const DephasingModel& model :
         {DephasingModel::none(), DephasingModel::gaussian(0.7), DephasingModel::markovian(0.4)}) {
      const UncertaintyRecord a = cat_uncertainty({1.0, 0.3}, n, 0.4, 2.0, model, 0.1);
      const UncertaintyRecord b = cat_uncertainty_projector({1.0, 0.3}, n, 0.4, 2.0, model, 0.1);
      EXPECT_NEAR(a.delta_omega / b.delta_omega, 1.0, 1e-10);
      EXPECT_NEAR(a.variance_used, b.variance_used, 1e-12);
    }
  }
}

TEST(CatReadout, RejectsTiltedNoise) {
  try {
    cat_readout_probability(1.0, 4, 0.0, 1.0, DephasingModel::gaussian(1.0, Vec3::UnitX()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsupported_configuration);
  }
}

TEST(Qfi, PureStateIsFourTimesVariance) {
  const int n = 8;
  const double t = 0.7;
  const DickeState s = spin_coherent({1.0, 0.0}, n);
  const CMatrix rho = s.amplitudes() * s.amplitudes().adjoint();
  const CMatrix g = t * build_collective_ops(n).jz;
  EXPECT_NEAR(qfi_exact(rho, g), n * t * t, 1e-10);
}

TEST(Qfi, MixedStateMatchesOracle) {
  const int n = 5;
  const DickeState a = tat_state(0.3, n), b = spin_cat({0.7, 0.4}, n);
  const double p = 0.35;
  const CMatrix rho = p * a.amplitudes() * a.amplitudes().adjoint() +
                      (1 - p) * b.amplitudes() * b.amplitudes().adjoint();
  const Vec3 axis = Vec3(0.2, 0.5, 1.0).normalized();
  const CollectiveOps ops = build_collective_ops(n);
  const CMatrix g = axis.x() * ops.jx + axis.y() * ops.jy + axis.z() * ops.jz;
  oracle::FullState full{n, p * oracle::embed_dicke(a).rho + (1 - p) * oracle::embed_dicke(b).rho};
  EXPECT_NEAR(qfi_exact(rho, g), oracle::qfi(full, oracle::collective(n, axis)), 1e-9);
}

TEST(Qfi, RejectsInvalidDensity) {
  CMatrix rho = CMatrix::Identity(3, 3);
  EXPECT_THROW(qfi_exact(rho, CMatrix::Zero(3, 3)), Error);
  EXPECT_THROW(qfi_exact(rho / 3.0, CMatrix::Zero(2, 2)), Error);
}

TEST(Optimize, LogScanFindsInteriorMinimum) {
  const double x = minimize_log_scan(
      [](double v) { return std::pow(std::log10(v) - 1.3, 2); }, 1e-3, 1e4);
  EXPECT_NEAR(std::log10(x), 1.3, 1e-6);
}

TEST(Optimize, ExposureOnBracketEdgeIsNumericalError) {
  auto monotone = [](double t) {
    return propagate_error(1.0, t, 1.0, UncertaintyMethod::moment_propagation);
  };
  try {
    optimize_exposure(monotone, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
  }
}

TEST(Optimize, ExposureCoherentMarkovian) {
  // delta_omega ~ exp(gamma t) / sqrt(t): minimum at t = 1/(2 gamma)
  const double gamma = 2.0;
  auto unc = [&](double t) {
    return propagate_error(1.0, t * std::exp(-gamma * t), 1.0 / t, UncertaintyMethod::moment_propagation);
  };
  EXPECT_NEAR(optimize_exposure(unc, gamma).t, 0.25, 1e-6);
}

TEST(Optimize, OatChiIsLocalMinimumAndMatchesOracle) {
  const int n = 8;
  const ChiOptimum opt = optimize_oat_chi(n);
  const double xi = squeezing_parameter(oat_state(1.0, opt.chi, n));
  EXPECT_NEAR(xi, opt.xi2, 1e-12);
  EXPECT_LT(opt.xi2, 1.0);
  EXPECT_LE(opt.xi2, squeezing_parameter(oat_state(1.0, opt.chi * 0.95, n)));
  EXPECT_LE(opt.xi2, squeezing_parameter(oat_state(1.0, opt.chi * 1.05, n)));
  const StateSpec spec{StateKind::oat, 1.0, opt.chi, n};
  EXPECT_NEAR(oracle::squeezing(oracle::pure(oracle::brute_state(spec), n)), opt.xi2, 1e-10);
}

TEST(Optimize, TatChiSqueezes) {
  const TatPropagator prop(40);
  const ChiOptimum opt = optimize_tat_chi(prop);
  EXPECT_LT(opt.xi2, 0.3);
  EXPECT_NEAR(squeezing_parameter(prop.state(opt.chi)), opt.xi2, 1e-12);
}

TEST(Markovian, RejectsOtherNoise) {
  const std::vector<int> grid{10, 100, 1000};
  EXPECT_THROW(markovian_comparison({StateKind::coherent, 1.0, 0.0, 1}, grid, 1e3,
                                    DephasingModel::gaussian(1.0)),
               Error);
}

TEST(CatReadout, NoiselessMatchesCoherentOverlap) {
  const cplx z(0.7, 0.4);
  const int n = 9;
  for (double wt : {0.05, 0.4, 2.0}) {
    const cplx overlap = std::pow((1.0 + std::norm(z) * std::polar(1.0, -wt)) / (1.0 + std::norm(z)), n);
    EXPECT_NEAR(cat_readout_probability(z, n, wt, 1.0, DephasingModel::none()),
                0.5 + 0.5 * overlap.imag(), 1e-13);
  }
}

TEST(CatReadout, ProjectorPathIndependentOfChannelOrder) {
  const DephasingModel model = DephasingModel::gaussian(0.9);
  const UncertaintyRecord a = cat_uncertainty_projector({0.8, 0.2}, 6, 0.3, 1.0, model, 0.4,
                                                        ChannelOrder::dephase_then_rotate);
  const UncertaintyRecord b = cat_uncertainty_projector({0.8, 0.2}, 6, 0.3, 1.0, model, 0.4,
                                                        ChannelOrder::rotate_then_dephase);
  EXPECT_NEAR(a.delta_omega, b.delta_omega, 1e-9 * a.delta_omega);
}

TEST(Uncertainty, TotalTimeScaling) {
  const DickeState s = oat_state(1.0, 0.05, 30);
  const StateSpec spec{StateKind::oat, 1.0, 0.05, 30};
  const DephasingModel model = DephasingModel::gaussian(0.7);
  const double a = probe_uncertainty(s, spec, model, 0.1, 1.0).delta_omega;
  const double b = probe_uncertainty(s, spec, model, 0.1, 9.0).delta_omega;
  EXPECT_NEAR(b, a / 3.0, 1e-12 * a);
  const double ca = cat_uncertainty(1.0, 30, 0.1, 1.0, model).delta_omega;
  const double cb = cat_uncertainty(1.0, 30, 0.1, 4.0, model).delta_omega;
  EXPECT_NEAR(cb, ca / 2.0, 1e-12 * ca);
}
