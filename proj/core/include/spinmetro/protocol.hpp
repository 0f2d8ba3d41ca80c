#pragma once

// Control qubit coupled to a memory ensemble through g1 sigma_z^c J_z, in the
// 2(N+1)-dimensional space control (x) Dicke. Index = control * (N+1) + k with
// control 0 = |g>, 1 = |e>.
//
// Pulse frequencies are offsets from the bare transition frequency. With the
// coupling above, the control transition for Dicke level k sits at offset
// 2 g1 (k - N/2), and the memory transition at offset -g1 (control |g>) or
// +g1 (control |e>).

#include <cstdint>
#include <string>
#include <vector>

#include "spinmetro/dephasing.hpp"

namespace spinmetro {

struct JointState {
  int n_qubits = 0;
  CVector amplitudes;  // length 2(N+1)

  static JointState ground(int n_qubits);
  static JointState product(int control, const DickeState& memory);
  [[nodiscard]] int dim() const { return 2 * (n_qubits + 1); }
  /// Throws validation unless normalized within 1e-10.
  void validate() const;
};

enum class PulseTarget { control, memory };
enum class PulseMode { ideal_gate, time_domain };

std::string_view to_string(PulseMode mode) noexcept;
PulseMode parse_pulse_mode(std::string_view name);

struct SystemParams {
  double g1 = 1.0;
};

/// Rotation exp(-i angle (cos(phase) X + sin(phase) Y) / 2) on the subspace
/// selected by `frequency`; X, Y are sigma_x, sigma_y on the control or
/// 2 J_x, 2 J_y on the memory. Rectangular envelope of duration angle / rabi
/// in time-domain mode.
struct PulseSpec {
  PulseTarget target = PulseTarget::control;
  double frequency = 0.0;
  double angle = kPi;
  double phase = 0.0;
  PulseMode mode = PulseMode::ideal_gate;
  double rabi = 0.05;

  void validate() const;
};

/// Unitary of one pulse on the joint space. Time-domain pulses integrate the
/// rotating-frame Hamiltonian with fixed-step RK4 (step <= 1/(50 max frequency)).
CMatrix pulse_propagator(int n_qubits, const PulseSpec& pulse, const SystemParams& system,
                         std::vector<std::string>* warnings = nullptr);

JointState apply_pulse(const JointState& state, const PulseSpec& pulse,
                       const SystemParams& system, std::vector<std::string>* warnings = nullptr);

/// exact: angles chosen so the sequence lands on the normalized cat for any N.
/// nominal: pi/2 then pi, exact only as <0,N|z,N> -> 0.
enum class PrepAngles { exact, nominal };

struct ProtocolOptions {
  PulseMode mode = PulseMode::ideal_gate;
  double rabi_ratio = 1.0 / 20.0;  // rabi / g1 in time-domain mode
  PrepAngles angles = PrepAngles::exact;
  SystemParams system;
};

struct Preparation {
  JointState state;
  std::vector<JointState> steps;  // after each of the three pulses
  double fidelity = 0.0;          // |<g, cat|state>|^2
  std::vector<std::string> warnings;
};

/// Control pulse at k = 0, memory pulse conditioned on control |g> taking
/// |0,N> to |z,N>, control pulse at k = 0.
Preparation prepare_cat(int n_qubits, cplx z, const ProtocolOptions& options = {});

/// Field exposure on the memory (dephasing along z plus exp(-i omega t J_z)),
/// control pi pulse at k = 0, memory pulse at +g1, then the probability of
/// sigma_y = +1 on the control. Weight that dephasing moves out of the
/// symmetric sector never meets the k = 0 pulse and contributes 1/2.
double readout_phase(const JointState& joint, cplx z, double omega, double t,
                     const DephasingModel& model, const ProtocolOptions& options = {});

struct FreeHamiltonian {
  double omega_c = 0.0;
  double omega_m = 0.0;
  double g1 = 1.0;
};

/// Lab-frame evolution under omega_c/2 sigma_z + omega_m J_z + g1 sigma_z J_z.
JointState free_evolution(const JointState& state, double duration, const FreeHamiltonian& h);

/// g2 (sigma_+ J_- + sigma_- J_+) on the joint space.
CMatrix flip_flop_generator(int n_qubits, double g2);

struct SampledReadout {
  int shots = 0;
  int plus_count = 0;
  [[nodiscard]] double estimate() const { return shots ? double(plus_count) / shots : 0.0; }
};

/// Binomial draws of the sigma_y outcome from a seeded generator.
SampledReadout sample_readout(double p_plus, int shots, std::uint64_t seed);

double fidelity(const JointState& a, const JointState& b);

}  // namespace spinmetro
