#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qclab/kernels.hpp"

namespace qclab {

using cplx = std::complex<double>;
using kernels::Mat2;

inline constexpr unsigned kMaxQubits = 14;

/// Dense n-qubit state. Amplitude index bit q is qubit q (little-endian).
class Statevector {
 public:
  /// |0...0> on n qubits.
  explicit Statevector(unsigned n_qubits);

  /// Takes amplitudes verbatim; size must be a power of two. No normalization.
  static Statevector from_amplitudes(std::vector<cplx> amps);
  static Statevector basis(unsigned n_qubits, std::size_t index);

  unsigned n_qubits() const noexcept { return n_qubits_; }
  std::size_t dim() const noexcept { return amps_.size(); }

  std::span<const cplx> amps() const noexcept { return amps_; }
  std::span<cplx> amps() noexcept { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }

  double norm() const;

  friend bool operator==(const Statevector&, const Statevector&) = default;

 private:
  Statevector(unsigned n_qubits, std::vector<cplx> amps)
      : n_qubits_(n_qubits), amps_(std::move(amps)) {}

  unsigned n_qubits_;
  std::vector<cplx> amps_;
};

enum class GateKind { RX, RZ, CNOT, CRX };

/// One gate of a circuit program. For two-qubit kinds qubits[0] is the
/// control and qubits[1] the target.
struct GateOp {
  GateKind kind;
  std::array<unsigned, 2> qubits{};
  std::optional<std::size_t> param_index;

  static GateOp rx(unsigned q, std::size_t param) { return {GateKind::RX, {q, 0}, param}; }
  static GateOp rz(unsigned q, std::size_t param) { return {GateKind::RZ, {q, 0}, param}; }
  static GateOp cnot(unsigned c, unsigned t) { return {GateKind::CNOT, {c, t}, std::nullopt}; }
  static GateOp crx(unsigned c, unsigned t, std::size_t param) {
    return {GateKind::CRX, {c, t}, param};
  }

  unsigned arity() const noexcept { return kind == GateKind::RX || kind == GateKind::RZ ? 1 : 2; }
  unsigned target() const noexcept { return arity() == 1 ? qubits[0] : qubits[1]; }
  bool parameterized() const noexcept { return kind != GateKind::CNOT; }

  friend bool operator==(const GateOp&, const GateOp&) = default;
};

/// Throws InvalidGate unless the gate is well formed for an n-qubit register.
void validate(const GateOp& gate, unsigned n_qubits);

// Rotations follow R_P(theta) = exp(+i theta P / 2).
Mat2 rx_matrix(double theta);
Mat2 rz_matrix(double theta);
Mat2 matmul(const Mat2& a, const Mat2& b);
Mat2 dagger(const Mat2& m);

/// Evolves `state` in place. `theta` is ignored for CNOT.
void apply_gate(Statevector& state, const GateOp& gate, double theta);

/// Probability that measuring `qubit` yields `outcome` (0 or 1).
double expectation_diagonal(const Statevector& state, unsigned qubit, unsigned outcome);

/// |<a|b>|^2, clamped to at most 1.
double fidelity(const Statevector& a, const Statevector& b);

Statevector normalize(std::span<const double> raw);
Statevector normalize(std::span<const cplx> raw);

}  // namespace qclab
