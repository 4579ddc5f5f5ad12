#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qclab/circuit.hpp"

namespace qclab {

struct Dataset;

/// Floor applied to probabilities inside the log of the cross-entropy.
inline constexpr double kProbabilityFloor = 1e-12;

struct GradientBundle {
  std::vector<double> d_theta;
  /// Wirtinger derivative dL/d(conj amp) at the circuit input.
  std::vector<cplx> d_input;
};

struct LossAndGradients {
  double loss = 0.0;
  ClassProbabilities probs;
  GradientBundle grads;
};

/// Cross-entropy -log max(p_label, floor) and its exact derivatives, from one
/// forward sweep and one reverse (adjoint) sweep of the gate program.
LossAndGradients loss_and_gradients(const CircuitModel& model, std::span<const double> theta,
                                    const Statevector& input, unsigned label);

/// p_cls and dp_cls/dtheta.
struct ProbabilityGradient {
  double probability = 0.0;
  std::vector<double> d_theta;
};
ProbabilityGradient probability_gradient(const CircuitModel& model, std::span<const double> theta,
                                         const Statevector& input, unsigned cls);

/// Real-valued gradient w.r.t. a real vector `raw` that is fed to the circuit
/// as normalize(raw), given the Wirtinger input derivative at normalize(raw).
std::vector<double> pixel_gradient(std::span<const double> raw, std::span<const cplx> d_input);

/// Pixel-space loss gradient for a single real input vector.
std::vector<double> input_gradient(const CircuitModel& model, std::span<const double> theta,
                                   std::span<const double> raw, unsigned label);

/// Mean of the per-sample pixel-space gradients, summed in sample order.
/// Samples without raw pixels use the real part of their state as the raw vector.
std::vector<double> mean_input_gradient(const CircuitModel& model, std::span<const double> theta,
                                        const Dataset& dataset, unsigned threads = 1);

}  // namespace qclab
