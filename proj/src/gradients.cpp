#include "qclab/gradients.hpp"

#include <cmath>

#include "qclab/dataset.hpp"
#include "qclab/error.hpp"
#include "qclab/parallel.hpp"

namespace qclab {
namespace {

// Seed of the reverse sweep: lambda = sum_k coeff[k] * P_k psi, where P_k
// projects the decode qubit onto |k>. coeff[k] = dF/dp_k for the scalar F.
struct Sweep {
  ClassProbabilities probs;
  GradientBundle grads;
};

template <class SeedFn>
Sweep adjoint_sweep(const CircuitModel& model, std::span<const double> theta,
                    const Statevector& input, SeedFn&& seed) {
  Statevector psi = run(model, theta, input);
  const ClassProbabilities probs = measure(model, psi);
  const auto [c0, c1] = seed(probs);

  const std::size_t dim = psi.dim();
  const std::size_t mbit = std::size_t{1} << model.decode().measure_qubit;
  std::vector<cplx> lambda(dim);
  cplx* p = psi.amps().data();
  for (std::size_t i = 0; i < dim; ++i) lambda[i] = ((i & mbit) ? c1 : c0) * p[i];

  std::vector<double> d_theta(model.n_params(), 0.0);
  const auto& k = kernels::active();
  const auto& blocks = model.blocks();
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    const Block& b = *it;
    switch (b.kind) {
      case Block::Kind::Rotations: {
        const Mat2 u = block_matrix(b, theta);
        Mat2 r;
        k.adjoint_1q(p, lambda.data(), dim, b.target, dagger(u), r);
        // For gate j in the block, dU U^H = V (i/2 P_j) V^H with V the gates
        // after j, and dL/dtheta_j = 2 Re Tr(dU U^H R) = -Im Tr(V P_j V^H R).
        Mat2 v{1.0, 0.0, 0.0, 1.0};
        for (auto g = b.rotations.rbegin(); g != b.rotations.rend(); ++g) {
          const Mat2 gen = g->first == GateKind::RX ? Mat2{0.0, 1.0, 1.0, 0.0}
                                                    : Mat2{1.0, 0.0, 0.0, -1.0};
          const Mat2 m = matmul(matmul(v, gen), dagger(v));
          const cplx tr = m.m00 * r.m00 + m.m01 * r.m10 + m.m10 * r.m01 + m.m11 * r.m11;
          d_theta[g->second] += -tr.imag();
          const double angle = theta[g->second];
          v = matmul(v, g->first == GateKind::RX ? rx_matrix(angle) : rz_matrix(angle));
        }
        break;
      }
      case Block::Kind::ControlledRx: {
        const std::size_t idx = b.rotations.front().second;
        Mat2 r;
        k.adjoint_controlled_1q(p, lambda.data(), dim, b.control, b.target,
                                dagger(rx_matrix(theta[idx])), r);
        d_theta[idx] += -(r.m01 + r.m10).imag();
        break;
      }
      case Block::Kind::Cnot:
        k.apply_cnot(p, dim, b.control, b.target);
        k.apply_cnot(lambda.data(), dim, b.control, b.target);
        break;
    }
  }
  for (double g : d_theta) {
    if (!std::isfinite(g)) throw NumericalFailure("non-finite parameter gradient");
  }
  return {probs, {std::move(d_theta), std::move(lambda)}};
}

}  // namespace

LossAndGradients loss_and_gradients(const CircuitModel& model, std::span<const double> theta,
                                    const Statevector& input, unsigned label) {
  if (label > 1) throw DimensionMismatch("label must be 0 or 1");
  auto sweep = adjoint_sweep(model, theta, input, [label](const ClassProbabilities& pr) {
    const double pt = pr[label];
    const double dl = pt > kProbabilityFloor ? -1.0 / pt : 0.0;
    return std::pair{label == 0 ? dl : 0.0, label == 1 ? dl : 0.0};
  });
  const double loss = -std::log(std::max(sweep.probs[label], kProbabilityFloor));
  if (!std::isfinite(loss)) throw NumericalFailure("non-finite loss");
  return {loss, sweep.probs, std::move(sweep.grads)};
}

ProbabilityGradient probability_gradient(const CircuitModel& model, std::span<const double> theta,
                                         const Statevector& input, unsigned cls) {
  if (cls > 1) throw DimensionMismatch("class must be 0 or 1");
  auto sweep = adjoint_sweep(model, theta, input, [cls](const ClassProbabilities&) {
    return std::pair{cls == 0 ? 1.0 : 0.0, cls == 1 ? 1.0 : 0.0};
  });
  return {sweep.probs[cls], std::move(sweep.grads.d_theta)};
}

std::vector<double> pixel_gradient(std::span<const double> raw, std::span<const cplx> d_input) {
  if (raw.size() != d_input.size()) throw DimensionMismatch("gradient/raw length mismatch");
  double sq = 0.0;
  for (double x : raw) sq += x * x;
  if (!(sq > 0.0)) throw DegenerateInput("cannot differentiate through a zero vector");
  const double norm = std::sqrt(sq);
  // d/dr L(r/|r|) = (g - x (x.g)) / |r|, with g = 2 Re(dL/d conj psi), x = r/|r|.
  double xg = 0.0;
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = 2.0 * d_input[i].real();
    xg += raw[i] / norm * out[i];
  }
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (out[i] - raw[i] / norm * xg) / norm;
  return out;
}

std::vector<double> input_gradient(const CircuitModel& model, std::span<const double> theta,
                                   std::span<const double> raw, unsigned label) {
  const auto lg = loss_and_gradients(model, theta, normalize(raw), label);
  return pixel_gradient(raw, lg.grads.d_input);
}

std::vector<double> mean_input_gradient(const CircuitModel& model, std::span<const double> theta,
                                        const Dataset& dataset, unsigned threads) {
  if (dataset.size() == 0) throw DimensionMismatch("mean gradient of an empty dataset");
  std::vector<std::vector<double>> per(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t i) {
    const std::vector<double> raw = dataset.pixel_vector(i);
    per[i] = input_gradient(model, theta, raw, dataset.labels[i]);
  });
  std::vector<double> mean(per.front().size(), 0.0);
  for (const auto& g : per) {
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += g[j];
  }
  const auto n = static_cast<double>(dataset.size());
  for (double& v : mean) v /= n;
  return mean;
}

}  // namespace qclab
