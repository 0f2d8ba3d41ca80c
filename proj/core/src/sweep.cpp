#include "spinmetro/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "spinmetro/metrology.hpp"

namespace spinmetro {
namespace {

using nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::config, what); }

void only_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) config_error(fmt::format("'{}' must be an object", where));
  for (const auto& [key, _] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      config_error(fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

double number(const json& v, std::string_view what) {
  if (!v.is_number()) config_error(fmt::format("'{}' must be a number", what));
  return v.get<double>();
}

int integer(const json& v, std::string_view what) {
  if (!v.is_number_integer()) config_error(fmt::format("'{}' must be an integer", what));
  return v.get<int>();
}

cplx complex_value(const json& v, std::string_view what) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  config_error(fmt::format("'{}' must be a number or [re, im]", what));
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string num(double v) { return fmt::format("{:.17e}", v); }

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorKind::validation, fmt::format("malformed number '{}' in CSV", s));
  }
  return v;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, fmt::format("cannot open '{}' for writing", path));
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::io, fmt::format("failed writing '{}'", path));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void SweepSpec::validate() const {
  if (n_grid.size() < 3) {
    throw Error(ErrorKind::config, "n_grid needs at least 3 points");
  }
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw Error(ErrorKind::config, "n_grid values must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw Error(ErrorKind::config, "n_grid must be strictly increasing");
    }
  }
  if (fit && double(n_grid.back()) < 100.0 * n_grid.front()) {
    throw Error(ErrorKind::config, "n_grid must span at least two decades for a fit run");
  }
  if (!(total_time > 0.0)) throw Error(ErrorKind::config, "T must be > 0");
  if (!(noise.gamma >= 0.0)) throw Error(ErrorKind::config, "gamma must be >= 0");
  if (schedule.optimize_t) {
    if (!(noise.gamma > 0.0)) throw Error(ErrorKind::config, "optimize_t needs gamma > 0");
  } else if (!(schedule.alpha > 0.0) || !(schedule.s1 >= 0.0)) {
    throw Error(ErrorKind::config, "schedule needs alpha > 0 and s1 >= 0");
  }
  if (state.kind == StateKind::tat && n_grid.back() > kMaxTatQubits) {
    throw Error(ErrorKind::config, fmt::format("tat sweeps are limited to N <= {}", kMaxTatQubits));
  }
}

SweepSpec parse_sweep_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(fmt::format("invalid JSON: {}", e.what()));
  }
  only_keys(doc, "config",
            {"state", "noise", "n_grid", "schedule", "T", "omega_eval", "fit", "outputs"});
  for (const char* key : {"state", "noise", "n_grid", "schedule", "T"}) {
    if (!doc.contains(key)) config_error(fmt::format("missing required key '{}'", key));
  }

  SweepSpec spec;
  const json& st = doc["state"];
  only_keys(st, "state", {"kind", "z", "chi", "z_exponent"});
  if (!st.contains("kind") || !st["kind"].is_string()) config_error("state.kind must be a string");
  spec.state.kind = parse_state_kind(st["kind"].get<std::string>());
  if (st.contains("z")) spec.state.z = complex_value(st["z"], "state.z");
  if (st.contains("z_exponent")) spec.z_exponent = number(st["z_exponent"], "state.z_exponent");
  if (st.contains("chi")) {
    if (st["chi"].is_string() && st["chi"].get<std::string>() == "optimize") {
      spec.optimize_chi = true;
    } else {
      spec.state.chi = number(st["chi"], "state.chi");
    }
  } else {
    spec.optimize_chi = spec.state.kind == StateKind::oat || spec.state.kind == StateKind::tat;
  }

  const json& nz = doc["noise"];
  only_keys(nz, "noise", {"kind", "gamma"});
  if (!nz.contains("kind") || !nz["kind"].is_string()) config_error("noise.kind must be a string");
  spec.noise.kind = parse_noise_kind(nz["kind"].get<std::string>());
  if (nz.contains("gamma")) spec.noise.gamma = number(nz["gamma"], "noise.gamma");
  if (spec.noise.kind != NoiseKind::none && !nz.contains("gamma")) {
    config_error("noise.gamma is required for this noise kind");
  }

  const json& grid = doc["n_grid"];
  if (grid.is_array()) {
    for (const json& v : grid) spec.n_grid.push_back(integer(v, "n_grid[]"));
  } else {
    only_keys(grid, "n_grid", {"min", "max", "per_decade"});
    if (!grid.contains("min") || !grid.contains("max")) config_error("n_grid needs min and max");
    const int per = grid.contains("per_decade") ? integer(grid["per_decade"], "per_decade") : 10;
    if (per < 1) config_error("per_decade must be >= 1");
    const int lo = integer(grid["min"], "n_grid.min"), hi = integer(grid["max"], "n_grid.max");
    if (lo < 1 || hi <= lo) config_error("n_grid needs 1 <= min < max");
    spec.n_grid = log_grid(lo, hi, per);
  }

  const json& sc = doc["schedule"];
  only_keys(sc, "schedule", {"s1", "alpha", "optimize_t"});
  if (sc.contains("optimize_t")) {
    if (!sc["optimize_t"].is_boolean()) config_error("schedule.optimize_t must be a boolean");
    spec.schedule.optimize_t = sc["optimize_t"].get<bool>();
  }
  if (spec.schedule.optimize_t) {
    if (sc.contains("s1") || sc.contains("alpha")) {
      config_error("schedule takes either optimize_t or s1/alpha");
    }
  } else {
    if (!sc.contains("s1") || !sc.contains("alpha")) config_error("schedule needs s1 and alpha");
    spec.schedule.s1 = number(sc["s1"], "schedule.s1");
    spec.schedule.alpha = number(sc["alpha"], "schedule.alpha");
  }

  spec.total_time = number(doc["T"], "T");
  if (doc.contains("omega_eval")) spec.omega_eval = number(doc["omega_eval"], "omega_eval");
  if (doc.contains("fit")) {
    if (!doc["fit"].is_boolean()) config_error("'fit' must be a boolean");
    spec.fit = doc["fit"].get<bool>();
  }
  if (doc.contains("outputs")) {
    const json& out = doc["outputs"];
    only_keys(out, "outputs", {"csv", "plot"});
    for (const char* key : {"csv", "plot"}) {
      if (out.contains(key) && !out[key].is_string()) {
        config_error(fmt::format("outputs.{} must be a string", key));
      }
    }
    if (out.contains("csv")) spec.csv_path = out["csv"].get<std::string>();
    if (out.contains("plot")) spec.plot_path = out["plot"].get<std::string>();
  }
  spec.validate();
  return spec;
}

SweepSpec load_sweep_spec(const std::string& path) { return parse_sweep_spec(read_file(path)); }

std::vector<int> log_grid(int lo, int hi, int per_decade) {
  if (lo < 1 || hi < lo || per_decade < 1) {
    throw Error(ErrorKind::validation, "log grid needs 1 <= lo <= hi and per_decade >= 1");
  }
  const double a = std::log10(lo), b = std::log10(hi);
  const int steps = static_cast<int>(std::round((b - a) * per_decade));
  std::vector<int> grid;
  for (int i = 0; i <= steps; ++i) {
    const double x = steps == 0 ? a : a + (b - a) * i / steps;
    const int n = static_cast<int>(std::lround(std::pow(10.0, x)));
    if (grid.empty() || n > grid.back()) grid.push_back(n);
  }
  return grid;
}

SweepRow evaluate_point(const SweepSpec& spec, int n) {
  SweepRow row;
  row.state = spec.state.kind;
  row.noise = spec.noise.kind;
  row.n = n;
  row.gamma = spec.noise.gamma;
  row.omega = spec.omega_eval;
  row.chi = kNaN;
  row.t = kNaN;
  row.delta_omega = row.xi2 = row.var_r = row.mean_m = kNaN;

  StateSpec st = spec.state;
  st.n_qubits = n;
  if (spec.z_exponent != 0.0) st.z *= std::pow(static_cast<double>(n), spec.z_exponent);
  row.z = st.z;

  try {
    std::optional<DickeState> state;
    if (st.kind == StateKind::tat) {
      const TatPropagator prop(n);
      if (spec.optimize_chi) st.chi = optimize_tat_chi(prop).chi;
      state = prop.state(st.chi);
    } else {
      if (st.kind == StateKind::oat && spec.optimize_chi) st.chi = optimize_oat_chi(n, st.z).chi;
      state = make_state(st);
    }
    if (st.kind == StateKind::oat || st.kind == StateKind::tat) row.chi = st.chi;

    if (st.kind != StateKind::cat) {
      const SqueezingGeometry g = squeezing_geometry(*state);
      row.xi2 = g.xi2;
      row.var_r = g.var_r;
      row.mean_m = g.mean_m;
    }

    auto uncertainty = [&](double t) {
      return probe_uncertainty(*state, st, spec.noise, t, spec.total_time, spec.omega_eval);
    };
    if (spec.schedule.optimize_t) {
      const ExposureOptimum best = optimize_exposure(uncertainty, spec.noise.gamma, spec.total_time);
      row.t = best.t;
      row.delta_omega = best.record.delta_omega;
    } else {
      row.t = schedule_exposure(n, spec.schedule.s1, spec.schedule.alpha);
      row.delta_omega = uncertainty(row.t).delta_omega;
    }
  } catch (const Error& e) {
    row.status = sanitize(fmt::format("error:{}: {}", to_string(e.kind()), e.what()));
  } catch (const std::exception& e) {
    row.status = sanitize(fmt::format("error:internal: {}", e.what()));
  }
  return row;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();
  const std::size_t count = spec.n_grid.size();
  std::vector<SweepRow> rows(count);
  std::size_t width = jobs > 0 ? static_cast<std::size_t>(jobs)
                               : std::max(1u, std::thread::hardware_concurrency());
  width = std::min(width, count);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) rows[i] = evaluate_point(spec, spec.n_grid[i]);
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < width; ++w) pool.emplace_back(worker);
    worker();
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.n < b.n; });
  return rows;
}

std::string format_csv(const std::vector<SweepRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const SweepRow& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.state),
                       to_string(r.noise), r.n, num(r.t), num(r.gamma), num(r.omega), num(r.chi),
                       num(r.z.real()), num(r.z.imag()), num(r.delta_omega), num(r.xi2),
                       num(r.var_r), num(r.mean_m), sanitize(r.status));
  }
  return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  if (rows.empty()) throw Error(ErrorKind::validation, "no rows to write");
  write_file(path, format_csv(rows));
}

std::vector<SweepRow> parse_csv(std::string_view text) {
  std::vector<std::string> lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != kCsvHeader) {
    throw Error(ErrorKind::validation, "CSV header does not match the sweep format");
  }
  std::vector<SweepRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> f = split(lines[i], ',');
    if (f.size() != 14) {
      throw Error(ErrorKind::validation, fmt::format("CSV line {} has {} fields", i + 1, f.size()));
    }
    SweepRow r;
    r.state = parse_state_kind(f[0]);
    r.noise = parse_noise_kind(f[1]);
    r.n = static_cast<int>(parse_double(f[2]));
    r.t = parse_double(f[3]);
    r.gamma = parse_double(f[4]);
    r.omega = parse_double(f[5]);
    r.chi = parse_double(f[6]);
    r.z = {parse_double(f[7]), parse_double(f[8])};
    r.delta_omega = parse_double(f[9]);
    r.xi2 = parse_double(f[10]);
    r.var_r = parse_double(f[11]);
    r.mean_m = parse_double(f[12]);
    r.status = f[13];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SweepRow> load_csv(const std::string& path) { return parse_csv(read_file(path)); }

double column_value(const SweepRow& row, std::string_view column) {
  if (column == "N") return row.n;
  if (column == "t") return row.t;
  if (column == "gamma") return row.gamma;
  if (column == "omega") return row.omega;
  if (column == "chi") return row.chi;
  if (column == "z_re") return row.z.real();
  if (column == "z_im") return row.z.imag();
  if (column == "delta_omega") return row.delta_omega;
  if (column == "xi2") return row.xi2;
  if (column == "var_r") return row.var_r;
  if (column == "mean_m") return row.mean_m;
  throw Error(ErrorKind::config, fmt::format("unknown numeric column '{}'", column));
}

FitResult fit_exponent(const std::vector<SweepRow>& rows, std::string_view x_column,
                       std::string_view y_column) {
  std::vector<double> x, y;
  for (const SweepRow& r : rows) {
    if (!r.ok()) continue;
    x.push_back(column_value(r, x_column));
    y.push_back(column_value(r, y_column));
  }
  return fit_power_law(x, y);
}

std::string format_plot(const std::vector<SweepRow>& rows, std::string_view y_column) {
  std::vector<std::pair<double, double>> pts;
  for (const SweepRow& r : rows) {
    const double y = column_value(r, y_column);
    if (r.ok() && r.n > 0 && y > 0.0 && std::isfinite(y)) pts.emplace_back(std::log10(r.n), std::log10(y));
  }
  if (pts.empty()) throw Error(ErrorKind::validation, "no plottable rows");

  constexpr double W = 640, H = 480, L = 70, R = 20, Tm = 30, B = 50;
  double x0 = pts.front().first, x1 = pts.back().first;
  double y0 = pts.front().second, y1 = y0;
  for (const auto& [x, y] : pts) {
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  // keep the guides inside the frame
  const double span = x1 - x0;
  y0 = std::min(y0, pts.front().second - span);
  y1 = std::max(y1, pts.front().second);
  if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
  y0 = std::floor(y0 - 0.1);
  y1 = std::ceil(y1 + 0.1);
  x0 = std::floor(x0);
  x1 = std::ceil(x1);
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return Tm + (y1 - y) / (y1 - y0) * (H - Tm - B); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      W, H, W, H);
  svg += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n", L, Tm,
      W - L - R, H - Tm - B);
  for (int d = static_cast<int>(x0); d <= static_cast<int>(x1); ++d) {
    svg += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"middle\">1e{}</text>\n",
        px(d), H - B + 18, d);
  }
  for (int d = static_cast<int>(y0); d <= static_cast<int>(y1); ++d) {
    svg += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"end\">1e{}</text>\n", L - 6,
        py(d) + 4, d);
  }
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"13\" text-anchor=\"middle\">N</text>\n",
                     0.5 * (L + W - R), H - 12);
  svg += fmt::format(
      "<text x=\"16\" y=\"{:.2f}\" font-size=\"13\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 16 {:.2f})\">{}</text>\n",
      0.5 * (Tm + H - B), 0.5 * (Tm + H - B), y_column);

  const auto [ax, ay] = pts.front();
  const double xe = pts.back().first;
  for (const auto& [slope, color, label] :
       {std::tuple{-0.5, "black", "N^-1/2"}, std::tuple{-1.0, "blue", "N^-1"}}) {
    svg += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
        "stroke-dasharray=\"6 4\"/>\n",
        px(ax), py(ay), px(xe), py(ay + slope * (xe - ax)), color);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" fill=\"{}\">{}</text>\n",
                       px(xe) - 50, py(ay + slope * (xe - ax)) - 6, color, label);
  }

  std::string path;
  for (const auto& [x, y] : pts) {
    path += fmt::format("{}{:.2f},{:.2f}", path.empty() ? "" : " ", px(x), py(y));
  }
  svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n",
                     path);
  for (const auto& [x, y] : pts) {
    svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"red\"/>\n", px(x), py(y));
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const std::vector<SweepRow>& rows, const std::string& path,
               std::string_view y_column) {
  if (rows.empty()) throw Error(ErrorKind::validation, "no rows to plot");
  write_file(path, format_plot(rows, y_column));
}

}  // namespace spinmetro
