#include "qclab/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "qclab/error.hpp"

namespace qclab {
namespace {

unsigned log2_dim(std::size_t dim) {
  if (dim == 0 || !std::has_single_bit(dim)) {
    throw DimensionMismatch("amplitude count " + std::to_string(dim) + " is not a power of two");
  }
  const auto n = static_cast<unsigned>(std::countr_zero(dim));
  if (n > kMaxQubits) {
    throw DimensionMismatch("register of " + std::to_string(n) + " qubits exceeds the limit of " +
                            std::to_string(kMaxQubits));
  }
  return n;
}

}  // namespace

Statevector::Statevector(unsigned n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits > kMaxQubits) {
    throw DimensionMismatch("register of " + std::to_string(n_qubits) +
                            " qubits exceeds the limit of " + std::to_string(kMaxQubits));
  }
  amps_.assign(std::size_t{1} << n_qubits, cplx{});
  amps_[0] = 1.0;
}

Statevector Statevector::from_amplitudes(std::vector<cplx> amps) {
  const unsigned n = log2_dim(amps.size());
  return Statevector(n, std::move(amps));
}

Statevector Statevector::basis(unsigned n_qubits, std::size_t index) {
  Statevector s(n_qubits);
  if (index >= s.dim()) throw DimensionMismatch("basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

double Statevector::norm() const {
  return std::sqrt(kernels::active().norm_sq(amps_.data(), amps_.size()));
}

void validate(const GateOp& gate, unsigned n_qubits) {
  for (unsigned k = 0; k < gate.arity(); ++k) {
    if (gate.qubits[k] >= n_qubits) {
      throw InvalidGate("gate qubit " + std::to_string(gate.qubits[k]) + " out of range for " +
                        std::to_string(n_qubits) + " qubits");
    }
  }
  if (gate.arity() == 2 && gate.qubits[0] == gate.qubits[1]) {
    throw InvalidGate("control and target coincide");
  }
  if (gate.parameterized() != gate.param_index.has_value()) {
    throw InvalidGate(gate.parameterized() ? "rotation gate without a parameter index"
                                           : "CNOT carries a parameter index");
  }
}

Mat2 rx_matrix(double theta) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  return {c, {0, s}, {0, s}, c};
}

Mat2 rz_matrix(double theta) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  return {{c, s}, 0.0, 0.0, {c, -s}};
}

Mat2 matmul(const Mat2& a, const Mat2& b) {
  return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
          a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}

Mat2 dagger(const Mat2& m) {
  return {std::conj(m.m00), std::conj(m.m10), std::conj(m.m01), std::conj(m.m11)};
}

void apply_gate(Statevector& state, const GateOp& gate, double theta) {
  validate(gate, state.n_qubits());
  const auto& k = kernels::active();
  cplx* amps = state.amps().data();
  const std::size_t dim = state.dim();
  switch (gate.kind) {
    case GateKind::RX:
      k.apply_1q(amps, dim, gate.qubits[0], rx_matrix(theta));
      break;
    case GateKind::RZ:
      k.apply_1q(amps, dim, gate.qubits[0], rz_matrix(theta));
      break;
    case GateKind::CNOT:
      k.apply_cnot(amps, dim, gate.qubits[0], gate.qubits[1]);
      break;
    case GateKind::CRX:
      k.apply_controlled_1q(amps, dim, gate.qubits[0], gate.qubits[1], rx_matrix(theta));
      break;
  }
}

double expectation_diagonal(const Statevector& state, unsigned qubit, unsigned outcome) {
  if (qubit >= state.n_qubits()) throw InvalidGate("measured qubit out of range");
  if (outcome > 1) throw InvalidGate("outcome must be 0 or 1");
  const double one = kernels::active().prob_one(state.amps().data(), state.dim(), qubit);
  if (outcome == 1) return one;
  return kernels::active().norm_sq(state.amps().data(), state.dim()) - one;
}

double fidelity(const Statevector& a, const Statevector& b) {
  if (a.n_qubits() != b.n_qubits()) throw DimensionMismatch("fidelity of unequal registers");
  // Rounding can push |<a|b>|^2 of unit vectors a few ulps past 1.
  return std::min(1.0, std::norm(kernels::active().inner(a.amps().data(), b.amps().data(), a.dim())));
}

Statevector normalize(std::span<const double> raw) {
  std::vector<cplx> amps(raw.begin(), raw.end());
  return normalize(std::span<const cplx>(amps));
}

Statevector normalize(std::span<const cplx> raw) {
  log2_dim(raw.size());
  double sq = 0.0;
  for (const cplx& v : raw) sq += std::norm(v);
  if (!(sq > 0.0) || !std::isfinite(sq)) throw DegenerateInput("cannot normalize a zero vector");
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<cplx> amps(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) amps[i] = raw[i] * inv;
  return Statevector::from_amplitudes(std::move(amps));
}

}  // namespace qclab
