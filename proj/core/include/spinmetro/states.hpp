#pragma once

#include <string_view>
#include <vector>

#include "spinmetro/dicke.hpp"

namespace spinmetro {

enum class StateKind { coherent, oat, tat, cat, ghz };

std::string_view to_string(StateKind kind) noexcept;
StateKind parse_state_kind(std::string_view name);

/// Parameters of a probe state. `z` is used by coherent/oat/cat, `chi` by
/// oat/tat; other kinds ignore the unused field.
struct StateSpec {
  StateKind kind = StateKind::coherent;
  cplx z{1.0, 0.0};
  double chi = 0.0;
  int n_qubits = 1;
};

/// Largest N for which the two-axis twisted state is built (dense spectral path).
inline constexpr int kMaxTatQubits = 4000;

/// log C(n, k) via lgamma.
double log_binomial(int n, int k);

/// |z, N> = (|g> + z|e>)^{(x)N} / (1+|z|^2)^{N/2}, evaluated in the log domain.
DickeState spin_coherent(cplx z, int n_qubits);

/// exp(-i chi J_z^2) |z, N> with |z| = 1.
DickeState oat_state(cplx z, double chi, int n_qubits);

/// exp(chi (J_+^2 - J_-^2)) |0, N>.
DickeState tat_state(double chi, int n_qubits);

/// (|0,N> + |z,N>) normalized with the exact overlap 2(1 + Re<0,N|z,N>).
DickeState spin_cat(cplx z, int n_qubits);

DickeState ghz_state(int n_qubits);

DickeState make_state(const StateSpec& spec);

/// Two-axis twisting restricted to the even-k sector, where J_+^2 - J_-^2 is a
/// real antisymmetric tridiagonal matrix. The spectral decomposition is
/// computed once per N; each chi then costs O(N^2).
class TatPropagator {
 public:
  explicit TatPropagator(int n_qubits);

  [[nodiscard]] int n_qubits() const noexcept { return n_qubits_; }
  [[nodiscard]] DickeState state(double chi) const;

 private:
  int n_qubits_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

}  // namespace spinmetro
