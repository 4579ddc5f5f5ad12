#include "qclab/continual.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "qclab/error.hpp"
#include "qclab/gradients.hpp"
#include "qclab/parallel.hpp"

namespace qclab {

void EwcConfig::validate() const {
  if (!(lambda_ewc >= 0.0) || !std::isfinite(lambda_ewc)) {
    throw ConfigError("EWC lambda must be a finite nonnegative number");
  }
}

FisherDiagonal fisher_information(const CircuitModel& model, std::span<const double> theta_a,
                                  const Dataset& dataset, unsigned threads) {
  if (dataset.size() == 0) throw DimensionMismatch("Fisher information of an empty dataset");
  model.check_parameters(theta_a);
  std::vector<ProbabilityGradient> per(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t i) {
    per[i] = probability_gradient(model, theta_a, dataset.states[i], dataset.labels[i]);
  });

  FisherDiagonal out;
  out.anchor_theta.assign(theta_a.begin(), theta_a.end());
  out.f.assign(model.n_params(), 0.0);
  for (const auto& s : per) {
    if (!(s.probability >= kFisherGuard)) {
      ++out.skipped;
      continue;
    }
    for (std::size_t j = 0; j < out.f.size(); ++j) {
      const double g = s.d_theta[j] / s.probability;
      out.f[j] += g * g;
    }
  }
  // The mean runs over the whole batch, skipped samples contribute zero.
  const auto n = static_cast<double>(dataset.size());
  for (double& v : out.f) v /= n;
  return out;
}

std::vector<double> ewc_penalty_gradient(std::span<const double> theta,
                                         const FisherDiagonal& fisher, const EwcConfig& config) {
  if (theta.size() != fisher.f.size() || theta.size() != fisher.anchor_theta.size()) {
    throw DimensionMismatch("EWC penalty length mismatch");
  }
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    g[i] = config.lambda_ewc * fisher.f[i] * (theta[i] - fisher.anchor_theta[i]);
  }
  return g;
}

double ewc_penalty(std::span<const double> theta, const FisherDiagonal& fisher,
                   const EwcConfig& config) {
  if (theta.size() != fisher.f.size() || theta.size() != fisher.anchor_theta.size()) {
    throw DimensionMismatch("EWC penalty length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double d = theta[i] - fisher.anchor_theta[i];
    acc += fisher.f[i] * d * d;
  }
  return 0.5 * config.lambda_ewc * acc;
}

TrainReport continual_train(const CircuitModel& model, std::span<const double> theta_a,
                            const Dataset& dataset_b, const FisherDiagonal& fisher,
                            const TrainConfig& train_config, const EwcConfig& ewc_config,
                            std::span<const Monitor> monitors) {
  ewc_config.validate();
  if (fisher.anchor_theta.size() != theta_a.size() ||
      !std::equal(theta_a.begin(), theta_a.end(), fisher.anchor_theta.begin())) {
    throw DimensionMismatch("Fisher anchor does not match the starting parameters");
  }
  ExtraGradient penalty;
  if (ewc_config.lambda_ewc > 0.0) {
    penalty = [&fisher, &ewc_config](std::span<const double> theta) {
      return ewc_penalty_gradient(theta, fisher, ewc_config);
    };
  }
  TrainReport report = train(model, theta_a, dataset_b, train_config, penalty, monitors);
  report.metadata["ewc_lambda"] = fmt::format("{:.17g}", ewc_config.lambda_ewc);
  report.metadata["ewc_mode"] = ewc_config.lambda_ewc > 0.0 ? "ewc" : "no_ewc_baseline";
  report.metadata["fisher_skipped"] = std::to_string(fisher.skipped);
  return report;
}

}  // namespace qclab
