#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qclab/circuit.hpp"
#include "qclab/dataset.hpp"
#include "qclab/training.hpp"

namespace qclab {

/// Vector the sign-gradient steps are added to.
///  - Amplitude: the unit-norm real amplitude vector fed to the circuit; it is
///    renormalized in place after every step.
///  - Pixel: the raw [0,1] pixel row; only the encoded copy is normalized.
enum class PerturbationDomain { Amplitude, Pixel };

std::string to_string(PerturbationDomain d);
PerturbationDomain parse_domain(const std::string& text);

struct AttackConfig {
  double epsilon_total = 0.02;
  std::size_t n_iterations = 30;
  /// Defaults to epsilon_total / n_iterations; if both are given they must agree.
  std::optional<double> epsilon_step;
  PerturbationDomain domain = PerturbationDomain::Amplitude;
  bool recompute_gradient_each_iter = false;
  unsigned threads = 1;

  double step() const;
  void validate() const;
};

/// Upper clip bound for pixel values: the largest double below 1.
inline constexpr double kClipHigh = 0x1.fffffffffffffp-1;

struct AttackTrace {
  std::vector<double> accuracy;
  std::vector<double> mean_loss;
  /// Mean |<original|adversarial>|^2.
  std::vector<double> mean_fidelity;
  /// Mean classifier probability of the true class.
  std::vector<double> mean_true_class_probability;

  void push(const Evaluation& e, double fidelity);
};

/// Row 0 is the unperturbed baseline, row k the state after k steps.
struct AttackReport {
  AttackTrace overall;
  AttackTrace task_a;
  AttackTrace task_b;
  /// Step vector added at each iteration (identical for every sample).
  std::vector<std::vector<double>> steps;
  /// Final adversarial samples; `raw` holds the perturbed vectors.
  Dataset adversarial_a;
  Dataset adversarial_b;
};

/// Quantum-adapted basic iterative method with one perturbation shared by
/// every sample of both tasks.
AttackReport universal_qbim(const CircuitModel& model, std::span<const double> theta,
                            const Dataset& dataset_a, const Dataset& dataset_b,
                            const AttackConfig& config);

struct AdversarialSample {
  std::vector<double> raw;
  Statevector state;
};

/// One sign-gradient step on `raw`, clip to [0,1) when `clip`, renormalize.
AdversarialSample fgsm_per_sample(const CircuitModel& model, std::span<const double> theta,
                                  std::span<const double> raw, unsigned label, double epsilon,
                                  bool clip = true);

/// Writes <prefix>_<index>_original.pgm and <prefix>_<index>_adversarial.pgm,
/// 8-bit images of round(amp / max(amp) * 255). Returns the written paths.
std::vector<std::filesystem::path> export_adversarial_pairs(
    const Dataset& original, const Dataset& adversarial, std::span<const std::size_t> indices,
    const std::filesystem::path& dir, const std::string& prefix);

/// Square grayscale image of a state's real amplitudes scaled by their maximum.
std::vector<std::uint8_t> amplitude_image(const Statevector& state);

}  // namespace qclab
