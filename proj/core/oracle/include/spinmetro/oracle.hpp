#pragma once

// Brute-force reference on the full 2^N Hilbert space (N <= 10). Nothing here
// calls the Dicke-space kernels; only the plain data types are shared.
//
// Qubit i is bit i of the computational index; a set bit means |e>.

#include "spinmetro/dephasing.hpp"
#include "spinmetro/states.hpp"

namespace spinmetro::oracle {

inline constexpr int kMaxQubits = 10;

struct FullState {
  int n_qubits = 0;
  CMatrix rho;

  [[nodiscard]] int dim() const { return 1 << n_qubits; }
  /// Trace within 1e-12, Hermitian, min eigenvalue >= -1e-10.
  void validate() const;
};

FullState pure(const CVector& psi, int n_qubits);

/// Dicke level k spread over all strings with k set bits, amplitude c_k / sqrt(C(N,k)).
FullState embed_dicke(const DickeState& state);

/// State vectors assembled directly in the computational basis.
CVector brute_coherent(cplx z, int n_qubits);
CVector brute_oat(cplx z, double chi, int n_qubits);
CVector brute_tat(double chi, int n_qubits);
CVector brute_cat(cplx z, int n_qubits);
CVector brute_ghz(int n_qubits);
CVector brute_state(const StateSpec& spec);

/// sum_i (axis . sigma)_i / 2 as a dense 2^N matrix.
CMatrix collective(int n_qubits, const Vec3& axis);

/// Kraus pair {sqrt(p) I, sqrt(1-p) axis.sigma}, p = (1 + d(t))/2, on every qubit.
FullState dephase(const FullState& state, const DephasingModel& model, double t);

/// Product rotation exp(-i angle axis.sigma / 2) on every qubit.
FullState rotate(const FullState& state, const Vec3& axis, double angle);

/// Field exposure: dephasing followed by exp(-i omega t J_n).
FullState expose(const FullState& state, const DephasingModel& model, const Vec3& sense_axis,
                 double omega, double t);

struct Moments {
  Vec3 first = Vec3::Zero();
  Mat3 second = Mat3::Zero();  // symmetrized
};
Moments moments(const FullState& state);

double probability(const FullState& state, const CMatrix& projector);

/// N Var(J_r) / |<J>|^2 minimized over r orthogonal to the mean spin.
double squeezing(const FullState& state);

/// Mixed-state QFI for rho_s = exp(-i s G) rho exp(i s G) at s = 0.
double qfi(const FullState& state, const CMatrix& generator);

/// Control qubit plus N memory qubits (N <= 9). Starts from |g> (x) cat,
/// exposes the memory, flips the control when the memory is |0...0>, rotates
/// the memory |0...0> -> |z...z> when the control is |e>, and returns the
/// probability of sigma_y = +1 on the control.
double cat_readout(cplx z, int n_qubits, double omega, double t, const DephasingModel& model);

/// Single-qubit reduced density matrix of qubit `qubit`.
Mat2c partial_trace_1(const FullState& state, int qubit = 0);

/// Relabels qubits a and b.
FullState swap_qubits(const FullState& state, int a, int b);

}  // namespace spinmetro::oracle
