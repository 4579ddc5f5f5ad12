#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qclab/statevector.hpp"

namespace qclab {

enum class Architecture { FullyConnected, QCNN };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& text);

/// Measure one qubit; class k wins when its one-hot projector has the larger
/// probability. Threshold is fixed at 0.5 for two classes, ties go to class 0.
struct DecodingRule {
  unsigned measure_qubit = 0;
  double threshold = 0.5;
};

using ParameterVector = std::vector<double>;

struct ClassProbabilities {
  double p0 = 0.0;
  double p1 = 0.0;

  double operator[](unsigned cls) const { return cls == 0 ? p0 : p1; }
};

/// Execution unit produced by compiling the gate list: a run of rotations on
/// one qubit is applied as a single 2x2 matrix.
struct Block {
  enum class Kind { Rotations, ControlledRx, Cnot };
  Kind kind;
  unsigned control = 0;  // unused for Rotations
  unsigned target = 0;
  // Rotations: (RX or RZ, parameter) in application order; ControlledRx: one entry.
  std::vector<std::pair<GateKind, std::size_t>> rotations;
};

/// Immutable gate program over a shared parameter vector.
class CircuitModel {
 public:
  Architecture arch() const noexcept { return arch_; }
  unsigned n_qubits() const noexcept { return n_qubits_; }
  /// Depth of the fully connected section (the whole circuit for FullyConnected).
  unsigned depth() const noexcept { return depth_; }
  std::size_t n_params() const noexcept { return n_params_; }
  const DecodingRule& decode() const noexcept { return decode_; }
  const std::vector<GateOp>& gates() const noexcept { return gates_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  /// Qubits still carrying gates at the end of the program, in register order.
  const std::vector<unsigned>& active_qubits() const noexcept { return active_; }

  /// Key/value description written into checkpoint metadata.
  std::vector<std::pair<std::string, std::string>> describe() const;

  void check_parameters(std::span<const double> theta) const;
  void check_input(const Statevector& input) const;

 private:
  friend class ProgramBuilder;
  CircuitModel() = default;

  Architecture arch_ = Architecture::FullyConnected;
  unsigned n_qubits_ = 0;
  unsigned depth_ = 0;
  std::size_t n_params_ = 0;
  DecodingRule decode_;
  std::vector<GateOp> gates_;
  std::vector<Block> blocks_;
  std::vector<unsigned> active_;
};

/// Rx-Rz-Rx on every qubit, then a CNOT ring (q -> q+1, last -> 0), per depth unit.
CircuitModel build_fully_connected(unsigned n_qubits, unsigned depth);

/// Two convolution + pooling rounds (n -> n/2 -> n/4 active qubits) followed
/// by the fully connected structure of depth `fc_depth` on the survivors.
CircuitModel build_qcnn(unsigned n_qubits = 12, unsigned fc_depth = 20);

CircuitModel build_model(Architecture arch, unsigned n_qubits, unsigned depth);

/// Final state after the whole program.
Statevector run(const CircuitModel& model, std::span<const double> theta, const Statevector& input);

ClassProbabilities measure(const CircuitModel& model, const Statevector& output);

ClassProbabilities forward(const CircuitModel& model, std::span<const double> theta,
                           const Statevector& input);

/// argmax with ties resolved to class 0.
unsigned decide(const ClassProbabilities& probs) noexcept;

unsigned predict(const CircuitModel& model, std::span<const double> theta,
                 const Statevector& input);

/// Composite matrix of a Rotations block.
Mat2 block_matrix(const Block& block, std::span<const double> theta);

}  // namespace qclab
