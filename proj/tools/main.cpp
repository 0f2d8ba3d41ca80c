#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "spinmetro/metrology.hpp"
#include "spinmetro/protocol.hpp"
#include "spinmetro/sweep.hpp"

using namespace spinmetro;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return kIo;
    case ErrorKind::numerical:
    case ErrorKind::no_mean_spin:
    case ErrorKind::insufficient_points: return kNumerical;
    default: return kConfig;
  }
}

cplx parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  try {
    std::size_t used = 0;
    if (comma == std::string::npos) {
      const double re = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {re, 0.0};
    }
    const std::string a = text.substr(0, comma), b = text.substr(comma + 1);
    const double re = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(text);
    const double im = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(text);
    return {re, im};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::config, fmt::format("cannot parse complex number '{}' (want RE,IM)", text));
  }
}

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json mat(const Mat3& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
  return rows;
}

json fit_json(const FitResult& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"max_abs_residual", f.max_abs_residual},
          {"n_points", f.n_points}};
}

struct StateArgs {
  std::string kind;
  int n = 0;
  std::string z = "1,0";
  std::optional<double> chi;
  bool chi_opt = false;
};

int run_state(const StateArgs& a) {
  StateSpec spec;
  spec.kind = parse_state_kind(a.kind);
  spec.n_qubits = a.n;
  spec.z = parse_complex(a.z);
  if (a.chi) spec.chi = *a.chi;

  std::optional<DickeState> state;
  if (spec.kind == StateKind::tat) {
    const TatPropagator prop(a.n);
    if (a.chi_opt) spec.chi = optimize_tat_chi(prop).chi;
    state = prop.state(spec.chi);
  } else {
    if (a.chi_opt && spec.kind == StateKind::oat) spec.chi = optimize_oat_chi(a.n, spec.z).chi;
    state = make_state(spec);
  }

  const CollectiveMoments m =
      collective_moments(*state, DephasingModel::none(), Vec3::UnitZ(), 0.0, 0.0);
  json out = {{"kind", to_string(spec.kind)},
              {"N", a.n},
              {"z", json::array({spec.z.real(), spec.z.imag()})},
              {"chi", spec.chi},
              {"normalization_defect", state->normalization_defect()},
              {"first", vec(m.first)},
              {"second", mat(m.second)},
              {"covariance", mat(m.covariance())}};
  try {
    const SqueezingGeometry g = squeezing_geometry(*state);
    out["xi2"] = g.xi2;
    out["var_r"] = g.var_r;
    out["mean_m"] = g.mean_m;
    out["m"] = vec(g.mean_axis);
    out["r"] = vec(g.estimator_axis);
    out["n"] = vec(g.sense_axis);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::no_mean_spin) throw;
    out["xi2"] = nullptr;
    out["m"] = nullptr;
    out["r"] = nullptr;
    out["n"] = vec(sensing_direction(m));
  }
  std::cout << out.dump(2) << '\n';
  return kOk;
}

struct SweepArgs {
  std::string config;
  std::string out;
  std::string plot;
  int jobs = 0;
};

int run_sweep_cmd(const SweepArgs& a) {
  const SweepSpec spec = load_sweep_spec(a.config);
  const std::string csv = !a.out.empty() ? a.out : spec.csv_path.value_or("");
  if (csv.empty()) throw Error(ErrorKind::config, "no CSV output path (--out or outputs.csv)");
  const std::string plot = !a.plot.empty() ? a.plot : spec.plot_path.value_or("");

  const std::vector<SweepRow> rows = run_sweep(spec, a.jobs);
  emit_csv(rows, csv);
  if (!plot.empty()) emit_plot(rows, plot);

  int failed = 0;
  for (const SweepRow& r : rows) {
    if (!r.ok()) {
      ++failed;
      fmt::print(stderr, "N = {}: {}\n", r.n, r.status);
    }
  }
  json summary = {{"rows", rows.size()}, {"failed", failed}, {"csv", csv}};
  try {
    summary["fit"] = fit_json(fit_exponent(rows, "N", "delta_omega"));
  } catch (const Error&) {
    summary["fit"] = nullptr;
  }
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

struct FitArgs {
  std::string in;
  std::string x = "N";
  std::string y = "delta_omega";
};

int run_fit(const FitArgs& a) {
  const FitResult f = fit_exponent(load_csv(a.in), a.x, a.y);
  std::cout << fit_json(f).dump(2) << '\n';
  return kOk;
}

struct ProtocolArgs {
  int n = 0;
  std::string z;
  std::string mode = "ideal";
  double rabi_ratio = 1.0 / 20.0;
  double omega_t = 0.0;
  double gamma_t = 0.0;
  int shots = 0;
  std::uint64_t seed = 1;
};

int run_protocol(const ProtocolArgs& a) {
  const cplx z = parse_complex(a.z);
  ProtocolOptions opts;
  opts.mode = parse_pulse_mode(a.mode);
  opts.rabi_ratio = a.rabi_ratio;
  if (!(a.rabi_ratio > 0.0)) throw Error(ErrorKind::config, "--rabi-ratio must be > 0");
  if (a.gamma_t < 0.0) throw Error(ErrorKind::config, "--gamma-t must be >= 0");

  // exposure t = 1, so omega and gamma carry the products omega t and gamma t
  const DephasingModel noise = DephasingModel::gaussian(a.gamma_t);
  const Preparation prep = prepare_cat(a.n, z, opts);
  const double p = readout_phase(prep.state, z, a.omega_t, 1.0, noise, opts);
  json out = {{"N", a.n},
              {"z", json::array({z.real(), z.imag()})},
              {"mode", to_string(opts.mode)},
              {"omega_t", a.omega_t},
              {"gamma_t", a.gamma_t},
              {"p_plus", p},
              {"p_plus_closed_form", cat_readout_probability(z, a.n, a.omega_t, 1.0, noise)},
              {"prep_fidelity", prep.fidelity},
              {"warnings", prep.warnings}};
  if (opts.mode == PulseMode::time_domain) out["rabi_ratio"] = a.rabi_ratio;
  if (a.shots > 0) {
    const SampledReadout s = sample_readout(p, a.shots, a.seed);
    out["shots"] = s.shots;
    out["plus_count"] = s.plus_count;
    out["p_plus_estimate"] = s.estimate();
  }
  for (const std::string& w : prep.warnings) fmt::print(stderr, "warning: {}\n", w);
  std::cout << out.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Field-sensing simulator for collective spin probes"};
  app.require_subcommand(1);

  StateArgs sa;
  auto* state = app.add_subcommand("state", "Build a probe state and print its moments as JSON");
  state->add_option("--kind", sa.kind, "coherent|oat|tat|cat|ghz")
      ->required()
      ->check(CLI::IsMember({"coherent", "oat", "tat", "cat", "ghz"}));
  state->add_option("--n", sa.n, "number of qubits")->required();
  state->add_option("--z", sa.z, "coherent label RE,IM");
  auto* chi = state->add_option("--chi", sa.chi, "twisting strength");
  state->add_flag("--chi-opt", sa.chi_opt, "optimize chi for the squeezing parameter")
      ->excludes(chi);

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Run an N sweep from a JSON config");
  sweep->add_option("--config", wa.config, "config file")->required();
  sweep->add_option("--out", wa.out, "CSV output");
  sweep->add_option("--plot", wa.plot, "SVG output");
  sweep->add_option("--jobs", wa.jobs, "worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit a log-log slope to a sweep CSV");
  fit->add_option("--in", fa.in, "CSV input")->required();
  fit->add_option("--x", fa.x, "x column");
  fit->add_option("--y", fa.y, "y column");

  ProtocolArgs pa;
  auto* protocol = app.add_subcommand("protocol", "Prepare a cat state and read out the phase");
  protocol->add_option("--n", pa.n, "number of memory qubits")->required();
  protocol->add_option("--z", pa.z, "coherent label RE,IM")->required();
  protocol->add_option("--mode", pa.mode, "ideal|time-domain")
      ->check(CLI::IsMember({"ideal", "time-domain"}));
  protocol->add_option("--rabi-ratio", pa.rabi_ratio, "rabi / g1 in time-domain mode");
  protocol->add_option("--omega-t", pa.omega_t, "field times exposure")->required();
  protocol->add_option("--gamma-t", pa.gamma_t, "dephasing rate times exposure")->required();
  protocol->add_option("--shots", pa.shots, "binomial samples of the readout");
  protocol->add_option("--seed", pa.seed, "sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*state) return run_state(sa);
    if (*sweep) return run_sweep_cmd(wa);
    if (*fit) return run_fit(fa);
    if (*protocol) return run_protocol(pa);
  } catch (const Error& e) {
    fmt::print(stderr, "error ({}): {}\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kNumerical;
  }
  return kConfig;
}
