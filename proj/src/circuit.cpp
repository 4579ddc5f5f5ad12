#include "qclab/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qclab/error.hpp"

namespace qclab {

std::string to_string(Architecture arch) {
  return arch == Architecture::FullyConnected ? "fully_connected" : "qcnn";
}

Architecture parse_architecture(const std::string& text) {
  if (text == "fully_connected" || text == "fcq" || text == "FullyConnected") {
    return Architecture::FullyConnected;
  }
  if (text == "qcnn" || text == "QCNN") return Architecture::QCNN;
  throw ConfigError("unknown architecture '" + text + "'");
}

// Accumulates a validated gate program. Retired (pooled-away) qubits may not
// receive further gates.
class ProgramBuilder {
 public:
  ProgramBuilder(Architecture arch, unsigned n_qubits) : retired_(n_qubits, false) {
    model_.arch_ = arch;
    model_.n_qubits_ = n_qubits;
  }

  void rotation(GateKind kind, unsigned q) {
    add(kind == GateKind::RX ? GateOp::rx(q, model_.n_params_) : GateOp::rz(q, model_.n_params_));
    ++model_.n_params_;
  }

  void crx(unsigned control, unsigned target) {
    add(GateOp::crx(control, target, model_.n_params_));
    ++model_.n_params_;
  }

  void cnot(unsigned control, unsigned target) { add(GateOp::cnot(control, target)); }

  void retire(unsigned q) { retired_.at(q) = true; }

  void add(const GateOp& gate) {
    validate(gate, model_.n_qubits_);
    for (unsigned k = 0; k < gate.arity(); ++k) {
      if (retired_[gate.qubits[k]]) {
        throw InvalidGate("gate on pooled-away qubit " + std::to_string(gate.qubits[k]));
      }
    }
    model_.gates_.push_back(gate);
  }

  CircuitModel finish(unsigned depth, std::vector<unsigned> active) {
    model_.depth_ = depth;
    model_.active_ = std::move(active);
    model_.decode_.measure_qubit = model_.active_.back();
    compile();
    return std::move(model_);
  }

 private:
  void compile() {
    auto& blocks = model_.blocks_;
    for (const GateOp& g : model_.gates_) {
      switch (g.kind) {
        case GateKind::RX:
        case GateKind::RZ:
          if (blocks.empty() || blocks.back().kind != Block::Kind::Rotations ||
              blocks.back().target != g.qubits[0]) {
            blocks.push_back({Block::Kind::Rotations, 0, g.qubits[0], {}});
          }
          blocks.back().rotations.emplace_back(g.kind, *g.param_index);
          break;
        case GateKind::CRX:
          blocks.push_back({Block::Kind::ControlledRx, g.qubits[0], g.qubits[1],
                            {{GateKind::RX, *g.param_index}}});
          break;
        case GateKind::CNOT:
          blocks.push_back({Block::Kind::Cnot, g.qubits[0], g.qubits[1], {}});
          break;
      }
    }
  }

  CircuitModel model_;
  std::vector<bool> retired_;
};

namespace {

void fully_connected_layers(ProgramBuilder& b, const std::vector<unsigned>& active,
                            unsigned depth) {
  for (unsigned d = 0; d < depth; ++d) {
    for (unsigned q : active) {
      b.rotation(GateKind::RX, q);
      b.rotation(GateKind::RZ, q);
      b.rotation(GateKind::RX, q);
    }
    if (active.size() < 2) continue;
    for (std::size_t k = 0; k + 1 < active.size(); ++k) b.cnot(active[k], active[k + 1]);
    b.cnot(active.back(), active.front());
  }
}

// Convolution: every adjacent active pair gets RX,RZ on both qubits and a
// controlled RX from the first to the second.
void convolution(ProgramBuilder& b, const std::vector<unsigned>& active) {
  for (std::size_t k = 0; k + 1 < active.size(); ++k) {
    const unsigned q = active[k];
    const unsigned r = active[k + 1];
    b.rotation(GateKind::RX, q);
    b.rotation(GateKind::RZ, q);
    b.rotation(GateKind::RX, r);
    b.rotation(GateKind::RZ, r);
    b.crx(q, r);
  }
}

// Pooling: in each consecutive pair the first qubit is dropped after a
// controlled RX onto the second, which is kept.
std::vector<unsigned> pooling(ProgramBuilder& b, const std::vector<unsigned>& active) {
  std::vector<unsigned> kept;
  for (std::size_t k = 0; k + 1 < active.size(); k += 2) {
    b.crx(active[k], active[k + 1]);
    b.retire(active[k]);
    kept.push_back(active[k + 1]);
  }
  return kept;
}

std::vector<unsigned> all_qubits(unsigned n) {
  std::vector<unsigned> v(n);
  for (unsigned q = 0; q < n; ++q) v[q] = q;
  return v;
}

}  // namespace

CircuitModel build_fully_connected(unsigned n_qubits, unsigned depth) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw ConfigError("fully connected model needs 1.." + std::to_string(kMaxQubits) + " qubits");
  }
  if (depth < 1) throw ConfigError("depth must be at least 1");
  ProgramBuilder b(Architecture::FullyConnected, n_qubits);
  auto active = all_qubits(n_qubits);
  fully_connected_layers(b, active, depth);
  return b.finish(depth, std::move(active));
}

CircuitModel build_qcnn(unsigned n_qubits, unsigned fc_depth) {
  if (n_qubits == 0 || n_qubits % 4 != 0 || n_qubits > kMaxQubits) {
    throw ConfigError("QCNN needs a qubit count divisible by 4, got " + std::to_string(n_qubits));
  }
  if (fc_depth < 1) throw ConfigError("depth must be at least 1");
  ProgramBuilder b(Architecture::QCNN, n_qubits);
  auto active = all_qubits(n_qubits);
  for (int round = 0; round < 2; ++round) {
    convolution(b, active);
    active = pooling(b, active);
  }
  fully_connected_layers(b, active, fc_depth);
  return b.finish(fc_depth, std::move(active));
}

CircuitModel build_model(Architecture arch, unsigned n_qubits, unsigned depth) {
  return arch == Architecture::FullyConnected ? build_fully_connected(n_qubits, depth)
                                              : build_qcnn(n_qubits, depth);
}

std::vector<std::pair<std::string, std::string>> CircuitModel::describe() const {
  std::vector<std::pair<std::string, std::string>> d{
      {"architecture", to_string(arch_)},
      {"n_qubits", std::to_string(n_qubits_)},
      {"depth", std::to_string(depth_)},
      {"n_params", std::to_string(n_params_)},
      {"rotation_layer", "rx-rz-rx"},
      {"rotation_convention", "exp(+i*theta*P/2)"},
      {"entangler", "cnot_ring"},
      {"measure_qubit", std::to_string(decode_.measure_qubit)},
  };
  if (arch_ == Architecture::QCNN) {
    d.emplace_back("conv_unit", "rx,rz on each of (q,q+1); crx(q->q+1); all adjacent active pairs");
    d.emplace_back("pool_unit", "crx(dropped->kept) over consecutive pairs, first of pair dropped");
  }
  return d;
}

void CircuitModel::check_parameters(std::span<const double> theta) const {
  if (theta.size() != n_params_) {
    throw DimensionMismatch("parameter vector has " + std::to_string(theta.size()) +
                            " entries, model needs " + std::to_string(n_params_));
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(theta[i])) throw NumericalFailure("parameter " + std::to_string(i) + " is not finite");
  }
}

void CircuitModel::check_input(const Statevector& input) const {
  if (input.n_qubits() != n_qubits_) {
    throw DimensionMismatch("input has " + std::to_string(input.n_qubits()) +
                            " qubits, model needs " + std::to_string(n_qubits_));
  }
}

Mat2 block_matrix(const Block& block, std::span<const double> theta) {
  Mat2 u{1.0, 0.0, 0.0, 1.0};
  for (const auto& [kind, p] : block.rotations) {
    u = matmul(kind == GateKind::RX ? rx_matrix(theta[p]) : rz_matrix(theta[p]), u);
  }
  return u;
}

Statevector run(const CircuitModel& model, std::span<const double> theta,
                const Statevector& input) {
  model.check_parameters(theta);
  model.check_input(input);
  Statevector state = input;
  const auto& k = kernels::active();
  cplx* amps = state.amps().data();
  const std::size_t dim = state.dim();
  for (const Block& b : model.blocks()) {
    switch (b.kind) {
      case Block::Kind::Rotations:
        k.apply_1q(amps, dim, b.target, block_matrix(b, theta));
        break;
      case Block::Kind::ControlledRx:
        k.apply_controlled_1q(amps, dim, b.control, b.target,
                              rx_matrix(theta[b.rotations.front().second]));
        break;
      case Block::Kind::Cnot:
        k.apply_cnot(amps, dim, b.control, b.target);
        break;
    }
  }
  return state;
}

ClassProbabilities measure(const CircuitModel& model, const Statevector& output) {
  const unsigned q = model.decode().measure_qubit;
  return {expectation_diagonal(output, q, 0), expectation_diagonal(output, q, 1)};
}

ClassProbabilities forward(const CircuitModel& model, std::span<const double> theta,
                           const Statevector& input) {
  return measure(model, run(model, theta, input));
}

unsigned decide(const ClassProbabilities& probs) noexcept { return probs.p1 > probs.p0 ? 1 : 0; }

unsigned predict(const CircuitModel& model, std::span<const double> theta,
                 const Statevector& input) {
  return decide(forward(model, theta, input));
}

}  // namespace qclab
