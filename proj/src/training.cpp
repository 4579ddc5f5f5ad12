#include "qclab/training.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qclab/error.hpp"
#include "qclab/gradients.hpp"
#include "qclab/parallel.hpp"
#include "qclab/rng.hpp"

namespace qclab {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

void adam_step(std::vector<double>& theta, std::span<const double> grad, AdamState& state,
               const TrainConfig& config) {
  if (grad.size() != theta.size()) throw DimensionMismatch("gradient length mismatch");
  if (state.m.empty()) {
    state.m.assign(theta.size(), 0.0);
    state.v.assign(theta.size(), 0.0);
  }
  if (state.m.size() != theta.size()) throw DimensionMismatch("optimizer state length mismatch");
  const auto& a = config.adam;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(a.beta1, t);
  const double c2 = 1.0 - std::pow(a.beta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = a.beta1 * state.m[i] + (1.0 - a.beta1) * grad[i];
    state.v[i] = a.beta2 * state.v[i] + (1.0 - a.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    theta[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + a.epsilon);
  }
}

std::vector<ClassProbabilities> predict_all(const CircuitModel& model,
                                            std::span<const double> theta,
                                            std::span<const Statevector> states,
                                            unsigned threads) {
  model.check_parameters(theta);
  std::vector<ClassProbabilities> probs(states.size());
  parallel_for(states.size(), threads,
               [&](std::size_t i) { probs[i] = forward(model, theta, states[i]); });
  return probs;
}

Evaluation summarize(std::span<const ClassProbabilities> probs,
                     std::span<const std::uint8_t> labels) {
  if (probs.empty()) throw DimensionMismatch("metrics of an empty dataset");
  if (probs.size() != labels.size()) throw DimensionMismatch("probabilities/labels mismatch");
  Evaluation e;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const unsigned y = labels[i];
    correct += decide(probs[i]) == y;
    e.mean_loss += -std::log(std::max(probs[i][y], kProbabilityFloor));
    e.mean_true_class_probability += probs[i][y];
  }
  const auto n = static_cast<double>(probs.size());
  e.accuracy = static_cast<double>(correct) / n;
  e.mean_loss /= n;
  e.mean_true_class_probability /= n;
  return e;
}

Evaluation evaluate(const CircuitModel& model, std::span<const double> theta,
                    const Dataset& dataset, unsigned threads) {
  if (dataset.size() == 0) throw DimensionMismatch("evaluate on an empty dataset");
  return summarize(predict_all(model, theta, dataset.states, threads), dataset.labels);
}

std::vector<double> init_parameters(std::size_t n_params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> theta(n_params);
  for (double& t : theta) t = 2.0 * std::numbers::pi * uniform_unit(rng);
  return theta;
}

TrainReport train(const CircuitModel& model, std::span<const double> init_theta,
                  const Dataset& dataset, const TrainConfig& config,
                  const ExtraGradient& extra_gradient, std::span<const Monitor> monitors) {
  config.validate();
  model.check_parameters(init_theta);
  if (dataset.size() == 0) throw DimensionMismatch("training on an empty dataset");
  dataset.validate();
  if (dataset.n_qubits != model.n_qubits()) {
    throw DimensionMismatch("dataset register size does not match the model");
  }

  TrainReport report;
  report.theta.assign(init_theta.begin(), init_theta.end());
  report.metadata["optimizer"] = "adam";
  report.metadata["prng"] = std::string(kPrngContract);
  report.metadata["epoch_metrics"] = "running means over the minibatch passes of each epoch";
  report.metadata["fidelity_column"] = "mean predicted probability of the true class";

  AdamState adam;
  const std::size_t n = dataset.size();
  const std::size_t np = model.n_params();
  std::vector<LossAndGradients> per(n);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = permutation(n, derive_seed(config.seed, epoch));
    double loss_sum = 0.0;
    double prob_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      parallel_for(stop - start, config.threads, [&](std::size_t k) {
        const std::size_t i = order[start + k];
        per[k] = loss_and_gradients(model, report.theta, dataset.states[i], dataset.labels[i]);
      });
      std::vector<double> grad(np, 0.0);
      for (std::size_t k = 0; k < stop - start; ++k) {
        const unsigned y = dataset.labels[order[start + k]];
        loss_sum += per[k].loss;
        prob_sum += per[k].probs[y];
        correct += decide(per[k].probs) == y;
        for (std::size_t j = 0; j < np; ++j) grad[j] += per[k].grads.d_theta[j];
      }
      const auto batch = static_cast<double>(stop - start);
      for (double& g : grad) g /= batch;
      if (extra_gradient) {
        const auto extra = extra_gradient(report.theta);
        if (extra.size() != np) throw DimensionMismatch("extra gradient length mismatch");
        for (std::size_t j = 0; j < np; ++j) grad[j] += extra[j];
      }
      adam_step(report.theta, grad, adam, config);
      ++report.steps;
    }
    const auto nd = static_cast<double>(n);
    if (!std::isfinite(loss_sum)) {
      throw NumericalFailure("non-finite loss in epoch " + std::to_string(epoch + 1));
    }
    report.mean_loss.push_back(loss_sum / nd);
    report.accuracy.push_back(static_cast<double>(correct) / nd);
    report.mean_true_class_probability.push_back(prob_sum / nd);
    for (const Monitor& m : monitors) {
      report.monitors[m.name].push_back(evaluate(model, report.theta, *m.dataset, config.threads));
    }
  }
  return report;
}

}  // namespace qclab
