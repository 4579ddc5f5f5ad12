#include "qclab/attack.hpp"

#include <algorithm>
#include <cmath>

#include "qclab/error.hpp"
#include "qclab/gradients.hpp"
#include "qclab/image.hpp"
#include "qclab/parallel.hpp"

namespace qclab {

std::string to_string(PerturbationDomain d) {
  return d == PerturbationDomain::Amplitude ? "amplitude" : "pixel";
}

PerturbationDomain parse_domain(const std::string& text) {
  if (text == "amplitude") return PerturbationDomain::Amplitude;
  if (text == "pixel") return PerturbationDomain::Pixel;
  throw ConfigError("unknown perturbation domain '" + text + "'");
}

double AttackConfig::step() const {
  return epsilon_step ? *epsilon_step : epsilon_total / static_cast<double>(n_iterations);
}

void AttackConfig::validate() const {
  if (n_iterations < 1) throw ConfigError("attack needs at least one iteration");
  if (!(epsilon_total >= 0.0) || !std::isfinite(epsilon_total)) {
    throw ConfigError("attack epsilon_total must be finite and nonnegative");
  }
  if (epsilon_step) {
    if (!(*epsilon_step >= 0.0) || !std::isfinite(*epsilon_step)) {
      throw ConfigError("attack epsilon_step must be finite and nonnegative");
    }
    const double implied = *epsilon_step * static_cast<double>(n_iterations);
    if (std::abs(implied - epsilon_total) > 1e-12 * std::max(1.0, epsilon_total)) {
      throw ConfigError("epsilon_step * iterations does not match epsilon_total");
    }
  }
}

void AttackTrace::push(const Evaluation& e, double fidelity) {
  accuracy.push_back(e.accuracy);
  mean_loss.push_back(e.mean_loss);
  mean_fidelity.push_back(fidelity);
  mean_true_class_probability.push_back(e.mean_true_class_probability);
}

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void clip_unit(std::vector<double>& x) {
  for (double& v : x) v = std::clamp(v, 0.0, kClipHigh);
}

std::vector<double> unit(const std::vector<double>& x) {
  const Statevector s = normalize(x);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = s[i].real();
  return out;
}

// Per-sample attack state across both tasks, task A first.
struct Sample {
  std::vector<double> x;
  Statevector state;
  unsigned label;
  bool clip;
  std::size_t task;
};

double mean_fidelity(const std::vector<Sample>& s, const Dataset& a, const Dataset& b,
                     std::size_t task_filter) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (task_filter != 2 && s[i].task != task_filter) continue;
    const Statevector& orig = i < a.size() ? a.states[i] : b.states[i - a.size()];
    acc += fidelity(orig, s[i].state);
    ++n;
  }
  return acc / static_cast<double>(n);
}

}  // namespace

AttackReport universal_qbim(const CircuitModel& model, std::span<const double> theta,
                            const Dataset& dataset_a, const Dataset& dataset_b,
                            const AttackConfig& config) {
  config.validate();
  model.check_parameters(theta);
  if (dataset_a.size() == 0 || dataset_b.size() == 0) {
    throw DimensionMismatch("attack needs two non-empty datasets");
  }
  for (const Dataset* d : {&dataset_a, &dataset_b}) {
    d->validate();
    if (d->n_qubits != model.n_qubits()) throw DimensionMismatch("dataset/model register size");
    if (d->has_raw()) continue;
    // Samples without raw rows are perturbed through their real amplitudes.
    for (const Statevector& s : d->states) {
      for (const cplx& a : s.amps()) {
        if (a.imag() != 0.0) throw DegenerateInput("attack on '" + d->task_tag + "' needs real amplitudes");
      }
    }
  }

  std::vector<Sample> samples;
  for (std::size_t task = 0; task < 2; ++task) {
    const Dataset& d = task == 0 ? dataset_a : dataset_b;
    for (std::size_t i = 0; i < d.size(); ++i) {
      std::vector<double> x = d.pixel_vector(i);
      if (config.domain == PerturbationDomain::Amplitude) x = unit(x);
      samples.push_back({std::move(x), d.states[i], d.labels[i], d.has_raw(), task});
    }
  }
  const std::size_t n_a = dataset_a.size();
  std::vector<std::uint8_t> labels;
  for (const auto& s : samples) labels.push_back(static_cast<std::uint8_t>(s.label));

  AttackReport report;
  auto record = [&] {
    std::vector<Statevector> states;
    states.reserve(samples.size());
    for (const auto& s : samples) states.push_back(s.state);
    const auto probs = predict_all(model, theta, states, config.threads);
    const std::span<const ClassProbabilities> all(probs);
    const std::span<const std::uint8_t> lab(labels);
    report.task_a.push(summarize(all.first(n_a), lab.first(n_a)),
                       mean_fidelity(samples, dataset_a, dataset_b, 0));
    report.task_b.push(summarize(all.subspan(n_a), lab.subspan(n_a)),
                       mean_fidelity(samples, dataset_a, dataset_b, 1));
    report.overall.push(summarize(all, lab), mean_fidelity(samples, dataset_a, dataset_b, 2));
  };

  auto mean_gradient = [&] {
    std::vector<std::vector<double>> per(samples.size());
    parallel_for(samples.size(), config.threads, [&](std::size_t i) {
      per[i] = input_gradient(model, theta, samples[i].x, samples[i].label);
    });
    std::vector<double> mean(per.front().size(), 0.0);
    for (const auto& g : per) {
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += g[j];
    }
    for (double& v : mean) v /= static_cast<double>(per.size());
    return mean;
  };

  record();
  const double eps = config.step();
  std::vector<double> direction = mean_gradient();
  for (std::size_t k = 0; k < config.n_iterations; ++k) {
    if (config.recompute_gradient_each_iter && k > 0) direction = mean_gradient();
    std::vector<double> step(direction.size());
    for (std::size_t j = 0; j < step.size(); ++j) step[j] = eps * sgn(direction[j]);
    const bool moves = std::any_of(step.begin(), step.end(), [](double v) { return v != 0.0; });
    if (moves) {
      for (auto& s : samples) {
        for (std::size_t j = 0; j < step.size(); ++j) s.x[j] += step[j];
        if (s.clip) clip_unit(s.x);
        s.state = normalize(s.x);
        if (config.domain == PerturbationDomain::Amplitude) {
          for (std::size_t j = 0; j < s.x.size(); ++j) s.x[j] = s.state[j].real();
        }
      }
    }
    report.steps.push_back(std::move(step));
    record();
  }

  for (std::size_t task = 0; task < 2; ++task) {
    const Dataset& src = task == 0 ? dataset_a : dataset_b;
    Dataset& dst = task == 0 ? report.adversarial_a : report.adversarial_b;
    dst.task_tag = src.task_tag + "_adversarial";
    dst.n_qubits = src.n_qubits;
    for (const auto& s : samples) {
      if (s.task != task) continue;
      if (src.has_raw()) dst.raw.push_back(s.x);
      dst.states.push_back(s.state);
      dst.labels.push_back(static_cast<std::uint8_t>(s.label));
    }
  }
  return report;
}

AdversarialSample fgsm_per_sample(const CircuitModel& model, std::span<const double> theta,
                                  std::span<const double> raw, unsigned label, double epsilon,
                                  bool clip) {
  if (!(epsilon >= 0.0)) throw ConfigError("FGSM epsilon must be nonnegative");
  std::vector<double> x(raw.begin(), raw.end());
  if (epsilon > 0.0) {
    const auto g = input_gradient(model, theta, raw, label);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += epsilon * sgn(g[j]);
    if (clip) clip_unit(x);
  }
  Statevector state = normalize(x);
  return {std::move(x), std::move(state)};
}

std::vector<std::uint8_t> amplitude_image(const Statevector& state) {
  double peak = 0.0;
  for (const cplx& a : state.amps()) peak = std::max(peak, a.real());
  if (!(peak > 0.0)) throw DegenerateInput("state has no positive amplitude to render");
  std::vector<std::uint8_t> px(state.dim());
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double v = std::max(0.0, state[i].real()) / peak * 255.0;
    px[i] = static_cast<std::uint8_t>(std::lround(std::min(255.0, v)));
  }
  return px;
}

std::vector<std::filesystem::path> export_adversarial_pairs(
    const Dataset& original, const Dataset& adversarial, std::span<const std::size_t> indices,
    const std::filesystem::path& dir, const std::string& prefix) {
  if (original.size() != adversarial.size()) {
    throw DimensionMismatch("original/adversarial dataset sizes differ");
  }
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(double(std::size_t{1} << original.n_qubits))));
  if (side * side != (std::size_t{1} << original.n_qubits)) {
    throw DimensionMismatch("amplitude count is not a square image");
  }
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (std::size_t idx : indices) {
    if (idx >= original.size()) throw DimensionMismatch("export index out of range");
    for (int which = 0; which < 2; ++which) {
      const Statevector& s = which == 0 ? original.states[idx] : adversarial.states[idx];
      GrayImage img{side, side, amplitude_image(s)};
      auto path = dir / (prefix + "_" + std::to_string(idx) +
                         (which == 0 ? "_original.pgm" : "_adversarial.pgm"));
      write_pgm(path, img);
      written.push_back(std::move(path));
    }
  }
  return written;
}

}  // namespace qclab
