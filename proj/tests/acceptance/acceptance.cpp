// Acceptance checks, one line per criterion. argv[1] is the CLI binary.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "spinmetro/metrology.hpp"
#include "spinmetro/oracle.hpp"
#include "spinmetro/protocol.hpp"
#include "spinmetro/sweep.hpp"

using namespace spinmetro;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vec3 random_axis(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 v;
  do {
    v = Vec3(g(rng), g(rng), g(rng));
  } while (v.norm() < 1e-3);
  return v.normalized();
}

DephasingModel random_noise(std::mt19937_64& rng, double gamma, const Vec3& axis) {
  return std::bernoulli_distribution(0.5)(rng) ? DephasingModel::gaussian(gamma, axis)
                                               : DephasingModel::markovian(gamma, axis);
}

StateSpec random_spec(std::mt19937_64& rng, StateKind kind, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  StateSpec spec;
  spec.kind = kind;
  spec.n_qubits = n;
  const double arg = 2.0 * kPi * u(rng);
  spec.z = std::polar(kind == StateKind::oat ? 1.0 : 0.3 + 1.2 * u(rng), arg);
  if (kind == StateKind::oat || kind == StateKind::tat) spec.chi = u(rng);
  return spec;
}

// N Var(J_r) / E(J_m)^2 from collective moments, r minimizing the variance.
double xi2_from_moments(const CollectiveMoments& m) {
  const Vec3 mean = mean_spin_direction(m);
  const Vec3 r = min_variance_direction(m, mean);
  return m.n_qubits * m.variance(r) / std::pow(m.mean(mean), 2);
}

Outcome criterion_1() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, worst_rel = 0.0;
  int checks = 0;
  std::string where;
  auto record = [&](double err, const std::string& label) {
    ++checks;
    if (err > worst || std::isnan(err)) {
      worst = std::isnan(err) ? INFINITY : err;
      where = label;
    }
  };

  for (StateKind kind : {StateKind::coherent, StateKind::oat, StateKind::tat, StateKind::cat,
                         StateKind::ghz}) {
    for (int n = 2; n <= 8; ++n) {
      for (int draw = 0; draw < 50; ++draw) {
        const StateSpec spec = random_spec(rng, kind, n);
        const double gt = u(rng), wt = u(rng);
        const double t = 1.0;
        const Vec3 axis = random_axis(rng);
        const DephasingModel model = random_noise(rng, gt / t, axis);
        const std::string label = fmt::format("{} N={} draw={}", to_string(kind), n, draw);

        const DickeState s = make_state(spec);
        const oracle::FullState full = oracle::pure(oracle::brute_state(spec), n);
        const oracle::FullState exposed = oracle::expose(full, model, axis, wt / t, t);
        const CollectiveMoments m = collective_moments(s, model, axis, wt / t, t);
        const oracle::Moments ref = oracle::moments(exposed);
        record((m.first - ref.first).cwiseAbs().maxCoeff(), label + " first");
        record((m.second - ref.second).cwiseAbs().maxCoeff(), label + " second");

        bool core_none = false, oracle_none = false;
        double core_xi = 0.0, oracle_xi = 0.0;
        try {
          core_xi = xi2_from_moments(m);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::no_mean_spin) throw;
          core_none = true;
        }
        try {
          oracle_xi = oracle::squeezing(exposed);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::no_mean_spin) throw;
          oracle_none = true;
        }
        if (core_none != oracle_none) {
          record(INFINITY, label + " xi2 defined on one side only");
        } else if (!core_none) {
          record(std::abs(core_xi - oracle_xi), label + " xi2 exposed");
          worst_rel = std::max(worst_rel, std::abs(core_xi - oracle_xi) / std::max(1.0, oracle_xi));
        }
        if (kind != StateKind::ghz) {
          const double a = squeezing_parameter(s), b = oracle::squeezing(full);
          record(std::abs(a - b), label + " xi2 pure");
          worst_rel = std::max(worst_rel, std::abs(a - b) / std::max(1.0, b));
        }

        if (kind == StateKind::cat) {
          const DephasingModel along_z = random_noise(rng, gt / t, Vec3::UnitZ());
          record(std::abs(cat_readout_probability(spec.z, n, wt / t, t, along_z) -
                          oracle::cat_readout(spec.z, n, wt / t, t, along_z)),
                 label + " cat readout");
        }
      }
    }
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-9 && secs < 120.0,
          fmt::format("{} comparisons, max abs error {:.2e} ({}), xi2 max rel error {:.2e}, {:.1f} s",
                      checks, worst, where, worst_rel, secs)};
}

Outcome criterion_2() {
  const cplx z(1.0, 0.0);
  const double t = 1.0, h = 1e-6;
  double worst = 0.0;
  for (int n : {4, 16, 64}) {
    auto p = [&](double w) { return cat_readout_probability(z, n, w, t, DephasingModel::none()); };
    const double slope = (p(h) - p(-h)) / (2 * h);
    const double expected = -0.5 * (std::norm(z) / (1.0 + std::norm(z))) * n * t;
    worst = std::max(worst, std::abs(slope / expected - 1.0));
  }
  return {worst <= 5e-3, fmt::format("max relative slope deviation {:.2e} (tol 5e-3)", worst)};
}

Outcome criterion_3() {
  const double gamma = 1.0, total = 1.0;
  double worst = 0.0;
  for (int n : {10, 100, 1000, 10000}) {
    const double t = 0.1 / (gamma * std::sqrt(double(n)));  // N (gamma t)^2 = 0.01
    for (double z_abs : {0.5, 1.0, 2.0}) {
      for (double omega : {0.0, 0.01 / (n * t)}) {
        const cplx z(z_abs, 0.0);
        const double exact =
            cat_uncertainty(z, n, t, total, DephasingModel::gaussian(gamma), omega).delta_omega;
        const double approx =
            (1.0 + z_abs * z_abs) / (n * t * z_abs * z_abs) * std::sqrt(t / total);
        worst = std::max(worst, std::abs(exact / approx - 1.0));
      }
    }
  }
  return {worst <= 0.05, fmt::format("max relative deviation {:.3e} (tol 5e-2)", worst)};
}

SweepSpec base_spec(StateKind kind, NoiseKind noise, double gamma, int lo, int hi,
                    int per_decade = 10) {
  SweepSpec spec;
  spec.state.kind = kind;
  spec.state.z = 1.0;
  spec.noise.kind = noise;
  spec.noise.gamma = gamma;
  spec.n_grid = log_grid(lo, hi, per_decade);
  spec.total_time = 1.0;
  return spec;
}

bool all_ok(const std::vector<SweepRow>& rows, std::string& first_failure) {
  for (const SweepRow& r : rows) {
    if (!r.ok()) {
      first_failure = fmt::format("N={}: {}", r.n, r.status);
      return false;
    }
  }
  return true;
}

Outcome criterion_4() {
  const auto start = Clock::now();
  const double gamma = 1.0, s = 0.1;
  SweepSpec spec = base_spec(StateKind::cat, NoiseKind::gaussian_nonmarkovian, gamma, 100, 100000);
  spec.schedule = {false, 0.5, s / gamma};
  spec.validate();
  const std::vector<SweepRow> rows = run_sweep(spec, 1);
  std::string failure;
  if (!all_ok(rows, failure)) return {false, failure};
  const FitResult f = fit_exponent(rows, "N", "delta_omega");
  const double prefactor = std::pow(10.0, f.intercept);
  const double expected = 2.0 * std::sqrt(gamma / (s * spec.total_time));
  const double secs = seconds_since(start);
  const bool pass = std::abs(f.slope + 0.75) <= 0.03 &&
                    std::abs(prefactor / expected - 1.0) <= 0.10 && secs < 60.0;
  return {pass, fmt::format("slope {:.4f} (want -0.75 +- 0.03), prefactor {:.4f} vs {:.4f}, {:.1f} s",
                            f.slope, prefactor, expected, secs)};
}

std::vector<SweepRow> oat_rows() {
  SweepSpec spec = base_spec(StateKind::oat, NoiseKind::gaussian_nonmarkovian, 1.0, 100, 10000);
  spec.optimize_chi = true;
  spec.schedule = {false, 1.0 / 3.0, 0.1};
  spec.validate();
  return run_sweep(spec, 0);
}

std::vector<SweepRow> tat_rows() {
  SweepSpec spec = base_spec(StateKind::tat, NoiseKind::gaussian_nonmarkovian, 1.0, 40, 4000);
  spec.optimize_chi = true;
  spec.schedule = {false, 0.5, 0.1};
  spec.validate();
  return run_sweep(spec, 0);
}

Outcome criterion_5(const std::vector<SweepRow>& rows) {
  std::string failure;
  if (!all_ok(rows, failure)) return {false, failure};
  const FitResult xi = fit_exponent(rows, "N", "xi2");
  const FitResult dw = fit_exponent(rows, "N", "delta_omega");
  const bool pass = std::abs(xi.slope + 2.0 / 3.0) <= 0.05 && std::abs(dw.slope + 2.0 / 3.0) <= 0.05;
  return {pass, fmt::format("xi2 slope {:.4f}, delta_omega slope {:.4f} (want -0.6667 +- 0.05)",
                            xi.slope, dw.slope)};
}

Outcome criterion_6(const std::vector<SweepRow>& rows) {
  std::string failure;
  if (!all_ok(rows, failure)) return {false, failure};
  const FitResult var = fit_exponent(rows, "N", "var_r");
  const FitResult dw = fit_exponent(rows, "N", "delta_omega");
  const bool pass = std::abs(var.slope) <= 0.05 && std::abs(dw.slope + 0.75) <= 0.05;
  return {pass, fmt::format("var_r slope {:.4f} (want 0 +- 0.05), delta_omega slope {:.4f} "
                            "(want -0.75 +- 0.05)",
                            var.slope, dw.slope)};
}

Outcome criterion_7(const std::vector<SweepRow>& oat, const std::vector<SweepRow>& tat) {
  int points = 0, violations = 0;
  double worst_ratio = 0.0;
  for (const auto* rows : {&oat, &tat}) {
    for (const SweepRow& r : *rows) {
      if (!r.ok()) {
        ++violations;
        continue;
      }
      ++points;
      const double f = f_bound_from_moments(r.var_r, r.mean_m, r.n, r.t, r.gamma, 1.0);
      worst_ratio = std::max(worst_ratio, r.delta_omega / f);
      if (!(r.delta_omega <= f)) ++violations;
    }
  }
  return {violations == 0,
          fmt::format("{} points, {} violations, max delta_omega / f = {:.4f}", points, violations,
                      worst_ratio)};
}

Outcome criterion_8() {
  struct Case {
    double s1, s3;
  };
  // one case per region of the piecewise formula, plus the balanced corner
  const Case cases[] = {{0.5, 1.8}, {0.1, 0.0}, {0.9, 0.5}, {1.0 / 3.0, 1.0 / 3.0}};
  const double s2 = 1.0, alpha = 0.3, gamma = 1.0, total = 1.0;
  std::vector<double> ns;
  for (int e = 0; e <= 40; ++e) ns.push_back(std::pow(10.0, 2.0 + 0.1 * e));

  double worst = 0.0;
  std::string detail;
  for (const Case& c : cases) {
    std::vector<double> f;
    for (double n : ns) {
      const double var = 0.25 * std::pow(n, c.s3), mean = 0.5 * std::pow(n, s2);
      const double t = alpha * std::pow(n, -c.s1);
      f.push_back(std::sqrt(2.0 * (var + n * std::expm1(2.0 * gamma * gamma * t * t) / 4.0) /
                            (total * t * mean * mean)));
    }
    const double fitted = fit_power_law(ns, f).slope;
    const double predicted = f_scaling_exponent(c.s1, s2, c.s3);
    worst = std::max(worst, std::abs(fitted - predicted));
    detail += fmt::format("(s1={:.3f}, s3={:.3f}): fit {:.4f} vs {:.4f}; ", c.s1, c.s3, fitted,
                          predicted);
  }
  // cross-check against the library bound at integer N
  const double lib = f_bound_from_moments(0.25 * 100, 0.5 * 1e4, 10000, 0.3 / 100, gamma, total);
  const double manual =
      std::sqrt(2.0 * (25.0 + 1e4 * std::expm1(2.0 * 9e-6) / 4.0) / (total * 3e-3 * 2.5e7));
  const bool same = std::abs(lib / manual - 1.0) < 1e-12;
  return {worst <= 0.05 && same, detail + fmt::format("max deviation {:.4f}", worst)};
}

Outcome criterion_9() {
  SweepSpec markov = base_spec(StateKind::cat, NoiseKind::exponential_markovian, 1.0, 10, 1000);
  markov.schedule.optimize_t = true;
  markov.total_time = 1e3;
  markov.validate();
  const std::vector<SweepRow> a = run_sweep(markov, 0);
  std::string failure;
  if (!all_ok(a, failure)) return {false, "markovian " + failure};
  const double ma = fit_exponent(a, "N", "delta_omega").slope;

  SweepSpec ideal = base_spec(StateKind::cat, NoiseKind::none, 0.0, 100, 100000);
  ideal.schedule = {false, 0.0, 1e-3};
  ideal.validate();
  const std::vector<SweepRow> b = run_sweep(ideal, 0);
  if (!all_ok(b, failure)) return {false, "noiseless " + failure};
  const double mb = fit_exponent(b, "N", "delta_omega").slope;
  return {std::abs(ma + 0.5) <= 0.05 && std::abs(mb + 1.0) <= 0.03,
          fmt::format("markovian optimized-t slope {:.4f} (want -0.5 +- 0.05), noiseless fixed-t "
                      "slope {:.4f} (want -1 +- 0.03)",
                      ma, mb)};
}

Outcome criterion_10() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size(2, 6);
  double worst = INFINITY;
  int instances = 0;

  for (int i = 0; i < 50; ++i) {
    const StateKind kinds[] = {StateKind::coherent, StateKind::oat, StateKind::tat};
    const StateSpec spec = random_spec(rng, kinds[i % 3], size(rng));
    const DickeState s = make_state(spec);
    const SqueezingGeometry g = squeezing_geometry(s);
    const double t = 0.1 + 0.9 * u(rng), omega = u(rng);
    const DephasingModel model = random_noise(rng, u(rng), g.sense_axis);
    const CollectiveMoments m = collective_moments(s, model, g.sense_axis, omega, t);
    const double var = m.variance(g.estimator_axis);
    const double slope = g.estimator_axis.dot(m.dfirst_domega);
    const oracle::FullState rho =
        oracle::expose(oracle::embed_dicke(s), model, g.sense_axis, omega, t);
    const double f = oracle::qfi(rho, t * oracle::collective(spec.n_qubits, g.sense_axis));
    worst = std::min(worst, f * var - slope * slope);
    ++instances;
  }
  for (int i = 0; i < 50; ++i) {
    const StateSpec spec = random_spec(rng, StateKind::cat, size(rng));
    const double t = 0.1 + 0.9 * u(rng), omega = u(rng);
    const DephasingModel model = random_noise(rng, u(rng), Vec3::UnitZ());
    const CatReadout r = cat_readout(spec.z, spec.n_qubits, omega, t, model);
    const oracle::FullState rho = oracle::expose(
        oracle::pure(oracle::brute_cat(spec.z, spec.n_qubits), spec.n_qubits), model,
        Vec3::UnitZ(), omega, t);
    const double f = oracle::qfi(rho, t * oracle::collective(spec.n_qubits, Vec3::UnitZ()));
    worst = std::min(worst, f * r.p_plus * (1.0 - r.p_plus) - r.dp_domega * r.dp_domega);
    ++instances;
  }
  return {worst >= -1e-9,
          fmt::format("{} instances, min F Var(A) - |dE/domega|^2 = {:.3e}", instances, worst)};
}

Outcome criterion_11() {
  double worst_ideal = 0.0;
  for (int n = 1; n <= 64; ++n) {
    for (cplx z : {cplx(1.0, 0.0), cplx(0.8, 0.5)}) {
      worst_ideal = std::max(worst_ideal, 1.0 - prepare_cat(n, z).fidelity);
    }
  }
  bool monotone = true;
  double at_20 = 0.0;
  std::string defects;
  for (cplx z : {cplx(1.0, 0.0), cplx(0.8, 0.5)}) {
    double previous = INFINITY;
    for (int denom : {5, 10, 20, 40}) {
      ProtocolOptions opts;
      opts.mode = PulseMode::time_domain;
      opts.rabi_ratio = 1.0 / denom;
      const double defect = 1.0 - prepare_cat(4, z, opts).fidelity;
      monotone = monotone && defect < previous;
      previous = defect;
      if (denom == 20) at_20 = std::max(at_20, defect);
      defects += fmt::format("{:.2e} ", defect);
    }
    defects += "| ";
  }
  return {worst_ideal <= 1e-10 && monotone && at_20 <= 1e-2,
          fmt::format("ideal max defect {:.2e}; time-domain N=4 defects over rabi/g1 = 1/5..1/40: "
                      "{}monotone={}",
                      worst_ideal, defects, monotone)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_12(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / "spinmetro_acceptance";
  fs::create_directories(dir);
  const fs::path config = dir / "determinism.json";
  {
    std::ofstream out(config);
    out << R"({"state": {"kind": "oat", "chi": "optimize"},
  "noise": {"kind": "gaussian_nonmarkovian", "gamma": 1.0},
  "n_grid": {"min": 10, "max": 2000, "per_decade": 6},
  "schedule": {"s1": 0.3333333333333333, "alpha": 0.1}, "T": 1.0})";
  }
  std::vector<std::string> outputs;
  for (int jobs : {1, 2, 4}) {
    const fs::path csv = dir / fmt::format("jobs{}.csv", jobs);
    fs::remove(csv);
    const std::string cmd = fmt::format("\"{}\" sweep --config \"{}\" --out \"{}\" --jobs {} > /dev/null",
                                        cli, config.string(), csv.string(), jobs);
    if (std::system(cmd.c_str()) != 0) return {false, "sweep command failed: " + cmd};
    outputs.push_back(read_file(csv));
  }
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
  return {same, fmt::format("--jobs 1/2/4 CSV sizes {}/{}/{} bytes, identical={}", outputs[0].size(),
                            outputs[1].size(), outputs[2].size(), same)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    fmt::print(stderr, "usage: {} <path-to-cli>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];

  std::vector<SweepRow> oat, tat;
  auto run = [](int id, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    fmt::print("criterion {:2d}: {}  {}\n", id, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
    return o.pass;
  };

  int failed = 0;
  failed += !run(1, criterion_1);
  failed += !run(2, criterion_2);
  failed += !run(3, criterion_3);
  failed += !run(4, criterion_4);
  try {
    oat = oat_rows();
    tat = tat_rows();
  } catch (const std::exception& e) {
    fmt::print(stderr, "sweep setup failed: {}\n", e.what());
  }
  failed += !run(5, [&] { return criterion_5(oat); });
  failed += !run(6, [&] { return criterion_6(tat); });
  failed += !run(7, [&] { return criterion_7(oat, tat); });
  failed += !run(8, criterion_8);
  failed += !run(9, criterion_9);
  failed += !run(10, criterion_10);
  failed += !run(11, criterion_11);
  failed += !run(12, [&] { return criterion_12(cli); });
  fmt::print("{} of 12 criteria passed\n", 12 - failed);
  return failed == 0 ? 0 : 1;
}
