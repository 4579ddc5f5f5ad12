#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qclab/circuit.hpp"
#include "qclab/dataset.hpp"

namespace qclab {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  double learning_rate = 0.005;
  std::size_t batch_size = 100;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  AdamConfig adam;
  unsigned threads = 1;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update of `theta` in place.
void adam_step(std::vector<double>& theta, std::span<const double> grad, AdamState& state,
               const TrainConfig& config);

struct Evaluation {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  /// Mean probability the model assigns to each sample's true class.
  double mean_true_class_probability = 0.0;
};

Evaluation evaluate(const CircuitModel& model, std::span<const double> theta,
                    const Dataset& dataset, unsigned threads = 1);

/// Metrics from precomputed per-sample class probabilities, summed in order.
Evaluation summarize(std::span<const ClassProbabilities> probs,
                     std::span<const std::uint8_t> labels);

/// forward() on every state of the dataset.
std::vector<ClassProbabilities> predict_all(const CircuitModel& model,
                                            std::span<const double> theta,
                                            std::span<const Statevector> states,
                                            unsigned threads = 1);

/// Added to the data gradient at every optimizer step.
using ExtraGradient = std::function<std::vector<double>(std::span<const double> theta)>;

/// Held-out set evaluated at the end of every epoch.
struct Monitor {
  std::string name;
  const Dataset* dataset = nullptr;
};

struct TrainReport {
  // Per epoch, accumulated over the minibatch passes of that epoch.
  std::vector<double> mean_loss;
  std::vector<double> accuracy;
  std::vector<double> mean_true_class_probability;
  // Per monitor name, one evaluation per epoch at the end-of-epoch parameters.
  std::map<std::string, std::vector<Evaluation>> monitors;
  std::vector<double> theta;
  std::uint64_t steps = 0;
  std::map<std::string, std::string> metadata;
};

/// Uniform on [0, 2*pi) per parameter.
std::vector<double> init_parameters(std::size_t n_params, std::uint64_t seed);

/// Minibatch Adam. Epoch e visits the samples in permutation(n, derive_seed(seed, e)).
TrainReport train(const CircuitModel& model, std::span<const double> init_theta,
                  const Dataset& dataset, const TrainConfig& config,
                  const ExtraGradient& extra_gradient = {},
                  std::span<const Monitor> monitors = {});

}  // namespace qclab
