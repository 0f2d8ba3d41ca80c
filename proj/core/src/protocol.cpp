#include "spinmetro/protocol.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "spinmetro/states.hpp"

namespace spinmetro {
namespace {

constexpr double kStepsPerPeriod = 50.0;

int block_index(int n, int control, int k) { return control * (n + 1) + k; }

// dU/dt = -i (A e^{i delta t} + A^dag e^{-i delta t}) U over [0, duration].
CMatrix integrate_drive(const CMatrix& a, double delta, double duration, double max_freq) {
  const Eigen::Index dim = a.rows();
  const int steps = std::max(1, static_cast<int>(std::ceil(duration * kStepsPerPeriod * max_freq)));
  const double h = duration / steps;
  const CMatrix ad = a.adjoint();
  auto rhs = [&](double t, const CMatrix& u) -> CMatrix {
    const cplx ph = std::polar(1.0, delta * t);
    return cplx(0.0, -1.0) * (ph * (a * u) + std::conj(ph) * (ad * u));
  };
  CMatrix u = CMatrix::Identity(dim, dim);
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const CMatrix k1 = rhs(t, u);
    const CMatrix k2 = rhs(t + 0.5 * h, u + 0.5 * h * k1);
    const CMatrix k3 = rhs(t + 0.5 * h, u + 0.5 * h * k2);
    const CMatrix k4 = rhs(t + h, u + h * k3);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

Mat2c control_rotation(double angle, double phase) {
  const double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
  Mat2c r;
  // (g, e) basis: exp(-i angle (cos(phase) sigma_x + sin(phase) sigma_y) / 2)
  r << c, cplx(0.0, -1.0) * std::polar(s, phase), cplx(0.0, -1.0) * std::polar(s, -phase), c;
  return r;
}

int selected_level(int n, const PulseSpec& pulse, const SystemParams& system) {
  const double x = pulse.frequency / (2.0 * system.g1) + 0.5 * n;
  const double k = std::round(x);
  if (std::abs(x - k) > 1e-9 || k < 0 || k > n) {
    throw Error(ErrorKind::validation,
                fmt::format("control pulse offset {} selects no Dicke level", pulse.frequency));
  }
  return static_cast<int>(k);
}

int selected_control(const PulseSpec& pulse, const SystemParams& system) {
  const double s = pulse.frequency / system.g1;
  if (std::abs(s + 1.0) < 1e-9) return 0;
  if (std::abs(s - 1.0) < 1e-9) return 1;
  throw Error(ErrorKind::validation,
              fmt::format("memory pulse offset {} is not +-g1", pulse.frequency));
}

Vec3 in_plane(double phase) { return {std::cos(phase), std::sin(phase), 0.0}; }

struct MemoryPulse {
  double angle;
  double phase;
};

// Takes |0,N> to |z,N> exactly.
MemoryPulse memory_pulse_for(cplx z) {
  return {2.0 * std::atan(std::abs(z)), -std::arg(z) - 0.5 * kPi};
}

}  // namespace

JointState JointState::ground(int n_qubits) {
  if (n_qubits < 1) throw Error(ErrorKind::invalid_dimension, "N must be >= 1");
  JointState s{n_qubits, CVector::Zero(2 * (n_qubits + 1))};
  s.amplitudes[0] = 1.0;
  return s;
}

JointState JointState::product(int control, const DickeState& memory) {
  const int n = memory.n_qubits();
  JointState s{n, CVector::Zero(2 * (n + 1))};
  s.amplitudes.segment(control * (n + 1), n + 1) = memory.amplitudes();
  return s;
}

void JointState::validate() const {
  if (amplitudes.size() != dim()) {
    throw Error(ErrorKind::dimension_mismatch, "joint state must have 2(N+1) amplitudes");
  }
  if (std::abs(amplitudes.squaredNorm() - 1.0) > 1e-10) {
    throw Error(ErrorKind::validation, "joint state is not normalized");
  }
}

std::string_view to_string(PulseMode mode) noexcept {
  return mode == PulseMode::ideal_gate ? "ideal" : "time-domain";
}

PulseMode parse_pulse_mode(std::string_view name) {
  if (name == "ideal" || name == "ideal_gate") return PulseMode::ideal_gate;
  if (name == "time-domain" || name == "time_domain") return PulseMode::time_domain;
  throw Error(ErrorKind::config, fmt::format("unknown pulse mode '{}'", name));
}

void PulseSpec::validate() const {
  if (!(angle > 0.0) || angle > 2.0 * kPi + 1e-12) {
    throw Error(ErrorKind::validation, fmt::format("pulse angle must be in (0, 2pi], got {}", angle));
  }
  if (mode == PulseMode::time_domain && !(rabi > 0.0)) {
    throw Error(ErrorKind::validation, "time-domain pulses need rabi > 0");
  }
}

CMatrix pulse_propagator(int n, const PulseSpec& pulse, const SystemParams& system,
                         std::vector<std::string>* warnings) {
  pulse.validate();
  if (!(system.g1 > 0.0)) throw Error(ErrorKind::validation, "coupling g1 must be > 0");
  const int dim = 2 * (n + 1);
  CMatrix u = CMatrix::Identity(dim, dim);

  if (pulse.mode == PulseMode::ideal_gate) {
    if (pulse.target == PulseTarget::control) {
      const int k = selected_level(n, pulse, system);
      const Mat2c r = control_rotation(pulse.angle, pulse.phase);
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) u(block_index(n, a, k), block_index(n, b, k)) = r(a, b);
      }
    } else {
      const int c = selected_control(pulse, system);
      u.block(c * (n + 1), c * (n + 1), n + 1, n + 1) =
          rotation_unitary(n, in_plane(pulse.phase), pulse.angle);
    }
    return u;
  }

  if (warnings && pulse.rabi >= system.g1) {
    warnings->push_back(fmt::format(
        "rabi frequency {} >= g1 = {}: pulse is not selective", pulse.rabi, system.g1));
  }
  const double duration = pulse.angle / pulse.rabi;
  const cplx drive = 0.5 * pulse.rabi * std::polar(1.0, -pulse.phase);
  if (pulse.target == PulseTarget::control) {
    CMatrix raise = CMatrix::Zero(2, 2);
    raise(1, 0) = drive;
    for (int k = 0; k <= n; ++k) {
      const double delta = 2.0 * system.g1 * (k - 0.5 * n) - pulse.frequency;
      const CMatrix block =
          integrate_drive(raise, delta, duration, std::max(std::abs(delta), pulse.rabi));
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) u(block_index(n, a, k), block_index(n, b, k)) = block(a, b);
      }
    }
  } else {
    const CollectiveOps ops = build_collective_ops(n);
    const CMatrix raise = drive * ops.jplus;
    for (int c = 0; c < 2; ++c) {
      const double delta = (c == 0 ? -1.0 : 1.0) * system.g1 - pulse.frequency;
      const double max_freq = std::max(std::abs(delta), 0.5 * pulse.rabi * n);
      u.block(c * (n + 1), c * (n + 1), n + 1, n + 1) =
          integrate_drive(raise, delta, duration, std::max(max_freq, pulse.rabi));
    }
  }
  return u;
}

JointState apply_pulse(const JointState& state, const PulseSpec& pulse,
                       const SystemParams& system, std::vector<std::string>* warnings) {
  JointState out = state;
  out.amplitudes = pulse_propagator(state.n_qubits, pulse, system, warnings) * state.amplitudes;
  return out;
}

Preparation prepare_cat(int n, cplx z, const ProtocolOptions& options) {
  const DickeState target = spin_cat(z, n);  // validates n and z
  const double g1 = options.system.g1;
  const double c = std::exp(-0.5 * n * std::log1p(std::norm(z)));  // <0,N|z,N>

  double theta1 = 0.5 * kPi, theta3 = kPi;
  if (options.angles == PrepAngles::exact) {
    const double alpha = 1.0 / std::sqrt(2.0 * (1.0 + c));
    const double beta = alpha * std::sqrt(1.0 + 2.0 * c);
    theta1 = 2.0 * std::acos(alpha);
    theta3 = 2.0 * std::atan2(beta, alpha * c);
  }
  const MemoryPulse mem = memory_pulse_for(z);
  const double rabi = options.rabi_ratio * g1;

  const std::array<PulseSpec, 3> sequence{{
      {PulseTarget::control, -g1 * n, theta1, -0.5 * kPi, options.mode, rabi},
      {PulseTarget::memory, -g1, mem.angle, mem.phase, options.mode, rabi},
      {PulseTarget::control, -g1 * n, theta3, 0.5 * kPi, options.mode, rabi},
  }};

  Preparation prep;
  prep.state = JointState::ground(n);
  for (const PulseSpec& p : sequence) {
    prep.state = apply_pulse(prep.state, p, options.system, &prep.warnings);
    prep.steps.push_back(prep.state);
  }
  prep.fidelity = fidelity(prep.state, JointState::product(0, target));
  return prep;
}

double readout_phase(const JointState& joint, cplx z, double omega, double t,
                     const DephasingModel& model, const ProtocolOptions& options) {
  joint.validate();
  if (t < 0.0) throw Error(ErrorKind::validation, "exposure time must be >= 0");
  const int n = joint.n_qubits;
  const int m = n + 1;
  DephasingModel along_z = model;
  along_z.axis = Vec3::UnitZ();

  CVector phase(m);
  for (int k = 0; k < m; ++k) phase[k] = std::polar(1.0, -omega * t * (k - 0.5 * n));
  CMatrix rho = joint.amplitudes * joint.amplitudes.adjoint();
  double leaked = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      CMatrix block = rho.block(a * m, b * m, m, m);
      block = phase.asDiagonal() * block * phase.conjugate().asDiagonal();
      const CMatrix kept = dephase_symmetric_block(block, along_z, t);
      if (a == b) leaked += (block.trace() - kept.trace()).real();
      rho.block(a * m, b * m, m, m) = kept;
    }
  }

  const double g1 = options.system.g1;
  const double rabi = options.rabi_ratio * g1;
  const MemoryPulse mem = memory_pulse_for(z);
  const PulseSpec flip{PulseTarget::control, -g1 * n, kPi, -0.5 * kPi, options.mode, rabi};
  const PulseSpec back{PulseTarget::memory, g1, mem.angle, mem.phase, options.mode, rabi};
  const CMatrix u = pulse_propagator(n, back, options.system) *
                    pulse_propagator(n, flip, options.system);
  rho = u * rho * u.adjoint();

  // sigma_y = +1 eigenvector (1, -i)/sqrt(2) in (g, e)
  const cplx gg = rho.block(0, 0, m, m).trace();
  const cplx ee = rho.block(m, m, m, m).trace();
  const cplx ge = rho.block(0, m, m, m).trace();
  const cplx eg = rho.block(m, 0, m, m).trace();
  const double p_sym = 0.5 * (gg + ee + cplx(0.0, -1.0) * ge + cplx(0.0, 1.0) * eg).real();
  return p_sym + 0.5 * leaked;
}

JointState free_evolution(const JointState& state, double duration, const FreeHamiltonian& h) {
  state.validate();
  JointState out = state;
  const int n = state.n_qubits;
  for (int c = 0; c < 2; ++c) {
    const double s = c == 0 ? -1.0 : 1.0;
    for (int k = 0; k <= n; ++k) {
      const double mk = k - 0.5 * n;
      const double energy = 0.5 * h.omega_c * s + h.omega_m * mk + h.g1 * s * mk;
      out.amplitudes[block_index(n, c, k)] *= std::polar(1.0, -energy * duration);
    }
  }
  return out;
}

CMatrix flip_flop_generator(int n, double g2) {
  const CollectiveOps ops = build_collective_ops(n);
  const int m = n + 1;
  CMatrix h = CMatrix::Zero(2 * m, 2 * m);
  // sigma_+ J_- : control g -> e while the memory loses one excitation
  h.block(m, 0, m, m) = g2 * ops.jminus;
  h.block(0, m, m, m) = g2 * ops.jplus;
  return h;
}

SampledReadout sample_readout(double p_plus, int shots, std::uint64_t seed) {
  if (shots < 0) throw Error(ErrorKind::validation, "shots must be >= 0");
  if (!(p_plus >= 0.0 && p_plus <= 1.0)) {
    throw Error(ErrorKind::validation, fmt::format("probability {} outside [0, 1]", p_plus));
  }
  std::mt19937_64 rng(seed);
  std::binomial_distribution<int> draw(shots, p_plus);
  return {shots, draw(rng)};
}

double fidelity(const JointState& a, const JointState& b) {
  if (a.amplitudes.size() != b.amplitudes.size()) {
    throw Error(ErrorKind::dimension_mismatch, "joint states differ in size");
  }
  return std::norm(a.amplitudes.dot(b.amplitudes));
}

}  // namespace spinmetro
