#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "qclab/attack.hpp"
#include "qclab/error.hpp"
#include "qclab/gradients.hpp"
#include "qclab/image.hpp"

using namespace qclab;

namespace {

struct Setup {
  CircuitModel model = build_fully_connected(4, 2);
  std::vector<double> theta;
  Dataset a = fixtures::classical(4, 12, 1, "a");
  Dataset b = fixtures::classical(4, 8, 2, "b");
  Setup() {
    std::mt19937_64 rng(3);
    theta = oracle::random_theta(model.n_params(), rng);
  }
};

}  // namespace

TEST_CASE("attack config") {
  AttackConfig c;
  CHECK(c.step() == doctest::Approx(0.02 / 30));
  c.epsilon_step = 0.001;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.epsilon_step = 0.02 / 30;
  CHECK_NOTHROW(c.validate());
  c.n_iterations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_domain("pixel") == PerturbationDomain::Pixel);
  CHECK_THROWS_AS(parse_domain("both"), ConfigError);
}

TEST_CASE("baseline row equals evaluate and rows count iterations") {
  Setup s;
  AttackConfig c;
  c.n_iterations = 5;
  c.epsilon_total = 0.05;
  const auto r = universal_qbim(s.model, s.theta, s.a, s.b, c);
  CHECK(r.overall.accuracy.size() == 6);
  CHECK(r.steps.size() == 5);
  const Evaluation ea = evaluate(s.model, s.theta, s.a);
  const Evaluation eb = evaluate(s.model, s.theta, s.b);
  CHECK(r.task_a.accuracy[0] == ea.accuracy);
  CHECK(r.task_a.mean_loss[0] == ea.mean_loss);
  CHECK(r.task_b.mean_true_class_probability[0] == eb.mean_true_class_probability);
  CHECK(r.overall.mean_fidelity[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.overall.mean_fidelity.back() < 1.0);
  CHECK(r.overall.mean_fidelity.back() > 0.0);
}

TEST_CASE("zero step leaves every row at the baseline") {
  Setup s;
  AttackConfig c;
  c.epsilon_total = 0.0;
  c.n_iterations = 4;
  const auto r = universal_qbim(s.model, s.theta, s.a, s.b, c);
  for (std::size_t k = 0; k < r.overall.accuracy.size(); ++k) {
    CHECK(r.overall.accuracy[k] == r.overall.accuracy[0]);
    CHECK(r.overall.mean_loss[k] == r.overall.mean_loss[0]);
    CHECK(r.overall.mean_fidelity[k] == doctest::Approx(1.0).epsilon(1e-14));
  }
  for (std::size_t i = 0; i < s.a.size(); ++i) CHECK(r.adversarial_a.states[i] == s.a.states[i]);
}

TEST_CASE("one perturbation is shared by all samples of both tasks") {
  Setup s;
  for (PerturbationDomain dom : {PerturbationDomain::Amplitude, PerturbationDomain::Pixel}) {
    AttackConfig c;
    c.epsilon_total = 0.3;
    c.n_iterations = 3;
    c.domain = dom;
    const auto r = universal_qbim(s.model, s.theta, s.a, s.b, c);
    const double eps = c.step();
    // Step vectors are eps * sign of the dataset-mean gradient.
    Dataset all = s.a;
    for (std::size_t i = 0; i < s.b.size(); ++i) {
      all.raw.push_back(s.b.raw[i]);
      all.states.push_back(s.b.states[i]);
      all.labels.push_back(s.b.labels[i]);
    }
    if (dom == PerturbationDomain::Pixel) {
      const auto j = mean_input_gradient(s.model, s.theta, all);
      for (std::size_t q = 0; q < j.size(); ++q)
        CHECK(r.steps[0][q] == (j[q] > 0 ? eps : (j[q] < 0 ? -eps : 0.0)));
    }
    for (const auto& st : r.steps) CHECK(st == r.steps[0]);
    // Replaying the shared steps on each sample reproduces its adversarial copy bit-exactly.
    for (std::size_t task = 0; task < 2; ++task) {
      const Dataset& src = task == 0 ? s.a : s.b;
      const Dataset& adv = task == 0 ? r.adversarial_a : r.adversarial_b;
      for (std::size_t i = 0; i < src.size(); ++i) {
        std::vector<double> x = src.raw[i];
        if (dom == PerturbationDomain::Amplitude)
          for (std::size_t q = 0; q < x.size(); ++q) x[q] = src.states[i][q].real();
        Statevector st = src.states[i];
        for (const auto& step : r.steps) {
          for (std::size_t q = 0; q < x.size(); ++q) x[q] = std::clamp(x[q] + step[q], 0.0, kClipHigh);
          st = normalize(std::span<const double>(x));
          if (dom == PerturbationDomain::Amplitude)
            for (std::size_t q = 0; q < x.size(); ++q) x[q] = st[q].real();
        }
        CHECK(adv.raw[i] == x);
        CHECK(adv.states[i] == st);
        CHECK(st.norm() == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : x) {
          CHECK(v >= 0.0);
          CHECK(v < 1.0);
        }
      }
    }
  }
}

TEST_CASE("single-sample qBIM coincides with iterated FGSM") {
  Setup s;
  const Dataset one = s.a.subset({3});
  AttackConfig c;
  c.epsilon_total = 0.2;
  c.n_iterations = 4;
  c.domain = PerturbationDomain::Pixel;
  c.recompute_gradient_each_iter = true;
  const auto r = universal_qbim(s.model, s.theta, one, one, c);
  std::vector<double> x = one.raw[0];
  for (std::size_t k = 0; k < c.n_iterations; ++k) {
    const auto adv = fgsm_per_sample(s.model, s.theta, x, one.labels[0], c.step());
    x = adv.raw;
    const Evaluation e = evaluate(s.model, s.theta, [&] {
      Dataset d = one;
      d.states[0] = adv.state;
      return d;
    }());
    CHECK(r.task_a.mean_loss[k + 1] == e.mean_loss);
    CHECK(r.task_a.accuracy[k + 1] == e.accuracy);
    CHECK(r.task_a.mean_fidelity[k + 1] == fidelity(one.states[0], adv.state));
  }
  CHECK(r.adversarial_a.raw[0] == x);
}

TEST_CASE("fgsm basics") {
  Setup s;
  const auto same = fgsm_per_sample(s.model, s.theta, s.a.raw[0], s.a.labels[0], 0.0);
  CHECK(fidelity(same.state, s.a.states[0]) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(same.raw == s.a.raw[0]);

  // Sign pattern matches finite differences of the loss in pixel space.
  const CircuitModel toy = build_fully_connected(3, 2);
  std::mt19937_64 rng(4);
  const auto th = oracle::random_theta(toy.n_params(), rng);
  const auto raw = oracle::random_pixels(8, rng);
  const double eps = 0.01;
  const auto adv = fgsm_per_sample(toy, th, raw, 1, eps, false);
  auto loss = [&](const std::vector<double>& x) {
    return loss_and_gradients(toy, th, normalize(std::span<const double>(x)), 1).loss;
  };
  for (std::size_t q = 0; q < 8; ++q) {
    const double fd = oracle::central_difference(loss, raw, q, 1e-6);
    if (std::abs(fd) < 1e-8) continue;
    CHECK(adv.raw[q] - raw[q] == doctest::Approx(fd > 0 ? eps : -eps));
  }
}

TEST_CASE("quantum samples are perturbed without clipping") {
  Setup s;
  const Dataset q = fixtures::quantum(4, 6, 9, true);
  AttackConfig c;
  c.epsilon_total = 0.1;
  c.n_iterations = 2;
  const auto r = universal_qbim(s.model, s.theta, s.a, q, c);
  CHECK_FALSE(r.adversarial_b.has_raw());
  for (const auto& st : r.adversarial_b.states) CHECK(st.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // Amplitudes may leave [0, 1) since nothing clips them.
  bool negative = false;
  for (const auto& st : r.adversarial_b.states)
    for (const auto& a : st.amps()) negative = negative || a.real() < 0;
  CHECK(negative);
  CHECK_THROWS_AS(universal_qbim(s.model, s.theta, s.a, Dataset{"e", 4, {}, {}, {}}, c), Error);
  CHECK_THROWS_AS(universal_qbim(s.model, s.theta, s.a, fixtures::quantum(4, 6, 9), c), DegenerateInput);
}

TEST_CASE("adversarial pairs export as 8-bit PGMs") {
  Setup s;
  AttackConfig c;
  c.epsilon_total = 0.1;
  c.n_iterations = 2;
  const auto r = universal_qbim(s.model, s.theta, s.a, s.b, c);
  const auto dir = std::filesystem::temp_directory_path() / "qclab_export_test";
  std::filesystem::remove_all(dir);
  const std::vector<std::size_t> idx = {0, 5};
  const auto files = export_adversarial_pairs(s.a, r.adversarial_a, idx, dir, "a");
  CHECK(files.size() == 4);
  CHECK(files[0].filename() == "a_0_original.pgm");
  CHECK(files[1].filename() == "a_0_adversarial.pgm");
  const GrayImage img = read_pgm(files[0]);
  CHECK(img.width == 4);
  CHECK(img.height == 4);
  // Re-import reproduces amp / max(amp) within quantization.
  double peak = 0;
  for (const auto& a : s.a.states[0].amps()) peak = std::max(peak, a.real());
  for (std::size_t i = 0; i < 16; ++i)
    CHECK(std::abs(img.pixels[i] / 255.0 - s.a.states[0][i].real() / peak) <= 0.5 / 255 + 1e-12);
  CHECK_THROWS_AS(export_adversarial_pairs(s.a, r.adversarial_a, std::vector<std::size_t>{99}, dir, "a"),
                  DimensionMismatch);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(amplitude_image(Statevector::from_amplitudes(std::vector<cplx>(4))), DegenerateInput);
}
