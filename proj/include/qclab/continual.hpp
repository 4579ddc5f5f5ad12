#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qclab/circuit.hpp"
#include "qclab/dataset.hpp"
#include "qclab/training.hpp"

namespace qclab {

/// Diagonal Fisher importance of each parameter for the first task, together
/// with the parameters it was evaluated at.
struct FisherDiagonal {
  std::vector<double> f;
  ParameterVector anchor_theta;
  /// Samples dropped because p_true fell below the division guard.
  std::size_t skipped = 0;
};

inline constexpr double kFisherGuard = 1e-12;

struct EwcConfig {
  double lambda_ewc = 0.0;

  void validate() const;
};

/// Mean over samples of (grad p_y / p_y)^2, p_y the probability of the true
/// class, evaluated at theta_a.
FisherDiagonal fisher_information(const CircuitModel& model, std::span<const double> theta_a,
                                  const Dataset& dataset, unsigned threads = 1);

/// lambda * F_i * (theta_i - anchor_i): gradient of lambda/2 sum F_i (theta_i - anchor_i)^2.
std::vector<double> ewc_penalty_gradient(std::span<const double> theta,
                                         const FisherDiagonal& fisher, const EwcConfig& config);

double ewc_penalty(std::span<const double> theta, const FisherDiagonal& fisher,
                   const EwcConfig& config);

/// Trains on task B starting from theta_a with the EWC gradient added at every
/// step. Monitors (typically the task A and task B test sets) are evaluated
/// per epoch.
TrainReport continual_train(const CircuitModel& model, std::span<const double> theta_a,
                            const Dataset& dataset_b, const FisherDiagonal& fisher,
                            const TrainConfig& train_config, const EwcConfig& ewc_config,
                            std::span<const Monitor> monitors = {});

}  // namespace qclab
