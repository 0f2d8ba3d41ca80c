#pragma once

// Parameter sweeps over probe size N, CSV/SVG output and exponent fits.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spinmetro/dephasing.hpp"
#include "spinmetro/fit.hpp"
#include "spinmetro/states.hpp"

namespace spinmetro {

struct Schedule {
  bool optimize_t = false;  // per-N optimum over [1e-4/gamma, min(1e2/gamma, T)]
  double s1 = 0.5;          // otherwise t = alpha N^{-s1}
  double alpha = 1.0;
};

struct SweepSpec {
  StateSpec state;            // n_qubits is overwritten per grid point
  bool optimize_chi = false;  // oat/tat: chi minimizing the squeezing parameter
  double z_exponent = 0.0;    // z used at N is z * N^{z_exponent}
  DephasingModel noise;
  std::vector<int> n_grid;
  Schedule schedule;
  double total_time = 1.0;
  double omega_eval = 0.0;
  bool fit = true;  // require >= 2 decades of N
  std::optional<std::string> csv_path;
  std::optional<std::string> plot_path;

  void validate() const;
};

/// Strict JSON schema; unknown keys and wrong types are config errors.
SweepSpec parse_sweep_spec(std::string_view json_text);
SweepSpec load_sweep_spec(const std::string& path);

/// Distinct integers round(10^(log10 lo + i/per_decade)) from lo to hi inclusive.
std::vector<int> log_grid(int lo, int hi, int per_decade = 10);

struct SweepRow {
  StateKind state = StateKind::coherent;
  NoiseKind noise = NoiseKind::none;
  int n = 0;
  double t = 0.0;
  double gamma = 0.0;
  double omega = 0.0;
  double chi = 0.0;
  cplx z{0.0, 0.0};
  double delta_omega = 0.0;
  double xi2 = 0.0;
  double var_r = 0.0;
  double mean_m = 0.0;
  std::string status = "ok";

  [[nodiscard]] bool ok() const { return status == "ok"; }
};

/// Evaluates one grid point; failures end up in the row status.
SweepRow evaluate_point(const SweepSpec& spec, int n_qubits);

/// Grid points run on `jobs` threads (0 = hardware concurrency); rows come
/// back sorted by N.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs = 0);

inline constexpr std::string_view kCsvHeader =
    "state,noise,N,t,gamma,omega,chi,z_re,z_im,delta_omega,xi2,var_r,mean_m,status";

std::string format_csv(const std::vector<SweepRow>& rows);
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> parse_csv(std::string_view text);
std::vector<SweepRow> load_csv(const std::string& path);

/// Numeric column by CSV header name.
double column_value(const SweepRow& row, std::string_view column);

/// Log-log least squares over rows with status ok.
FitResult fit_exponent(const std::vector<SweepRow>& rows, std::string_view x_column,
                       std::string_view y_column);

/// Log-log SVG of y against N with SQL (-1/2) and Heisenberg (-1) guides.
std::string format_plot(const std::vector<SweepRow>& rows, std::string_view y_column = "delta_omega");
void emit_plot(const std::vector<SweepRow>& rows, const std::string& path,
               std::string_view y_column = "delta_omega");

}  // namespace spinmetro
