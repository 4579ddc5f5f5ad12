#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "qclab/datasets.hpp"
#include "qclab/error.hpp"
#include "qclab/rng.hpp"

namespace qclab {

void SptConfig::validate() const {
  if (n_sites < 3 || n_sites > kMaxQubits) {
    throw ConfigError("SPT chain needs 3.." + std::to_string(kMaxQubits) + " sites");
  }
  if (!(lambda_step > 0.0)) throw ConfigError("lambda_step must be positive");
  if (!(lambda_max > lambda_min)) throw ConfigError("lambda_max must exceed lambda_min");
  if (!(tolerance > 0.0)) throw ConfigError("eigensolver tolerance must be positive");
  if (krylov_dim < 2) throw ConfigError("krylov_dim must be at least 2");
}

std::vector<double> SptConfig::grid() const {
  validate();
  const auto steps = static_cast<std::size_t>(std::llround((lambda_max - lambda_min) / lambda_step));
  std::vector<double> out;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double lam = lambda_min + static_cast<double>(i) * lambda_step;
    if (std::abs(lam - 1.0) < 0.5 * lambda_step) continue;  // critical point, no label
    out.push_back(lam);
  }
  return out;
}

unsigned spt_label(double lambda) {
  if (lambda == 1.0) throw ConfigError("lambda = 1 has no phase label");
  return lambda < 1.0 ? 0 : 1;
}

void SparseMatrix::multiply(const double* x, double* y) const {
  for (std::size_t r = 0; r < dim; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_start[r]; k < row_start[r + 1]; ++k) acc += val[k] * x[col[k]];
    y[r] = acc;
  }
}

SparseMatrix cluster_ising_hamiltonian(unsigned n_sites, double lambda) {
  if (n_sites < 3 || n_sites > kMaxQubits) throw ConfigError("cluster-Ising chain size out of range");
  const std::size_t dim = std::size_t{1} << n_sites;
  SparseMatrix h;
  h.dim = dim;
  h.row_start.reserve(dim + 1);
  h.row_start.push_back(0);
  std::map<std::size_t, double> row;
  for (std::size_t b = 0; b < dim; ++b) {
    row.clear();
    for (unsigned j = 0; j < n_sites; ++j) {
      const unsigned left = (j + n_sites - 1) % n_sites;
      const unsigned right = (j + 1) % n_sites;
      // -X_{j-1} Z_j X_{j+1}: flip both neighbours, sign from Z_j.
      const double z = ((b >> j) & 1u) ? -1.0 : 1.0;
      row[b ^ (std::size_t{1} << left) ^ (std::size_t{1} << right)] += -z;
      // lambda Y_j Y_{j+1}: flip both, Y|0> = i|1>, Y|1> = -i|0>.
      const bool equal = ((b >> j) & 1u) == ((b >> right) & 1u);
      row[b ^ (std::size_t{1} << j) ^ (std::size_t{1} << right)] += lambda * (equal ? -1.0 : 1.0);
    }
    // H is symmetric, so the entries generated from column b form row b.
    for (const auto& [c, v] : row) {
      if (v == 0.0) continue;
      h.col.push_back(c);
      h.val.push_back(v);
    }
    h.row_start.push_back(h.col.size());
  }
  return h;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

double normalize_in_place(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
  return n;
}

}  // namespace

GroundState lanczos_ground_state(const SparseMatrix& h, double tol, std::size_t krylov_dim,
                                 std::size_t max_restarts) {
  const std::size_t n = h.dim;
  if (n == 0) throw DimensionMismatch("empty Hamiltonian");
  std::vector<double> start(n);
  std::mt19937_64 rng(0x5eedc1u);
  for (double& v : start) v = 2.0 * uniform_unit(rng) - 1.0;
  normalize_in_place(start);

  GroundState gs;
  const std::size_t kmax = std::min(krylov_dim, n);
  std::vector<double> w(n);
  for (std::size_t restart = 0; restart <= max_restarts; ++restart) {
    std::vector<std::vector<double>> basis{start};
    std::vector<double> alpha, beta;
    Eigen::VectorXd ritz_y;
    for (std::size_t j = 0; j < kmax; ++j) {
      h.multiply(basis[j].data(), w.data());
      ++gs.matvecs;
      const double a = dot(w, basis[j]);
      axpy(-a, basis[j], w);
      if (j > 0) axpy(-beta[j - 1], basis[j - 1], w);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) axpy(-dot(w, q), q, w);
      }
      alpha.push_back(a);
      const double b = std::sqrt(dot(w, w));

      Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), alpha.size());
      Eigen::VectorXd sub = Eigen::Map<Eigen::VectorXd>(beta.data(), beta.size());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      ritz_y = tri.eigenvectors().col(0);
      const double estimate = b * std::abs(ritz_y(static_cast<Eigen::Index>(j)));
      if (estimate < 0.1 * tol || b < 1e-14 || j + 1 == kmax) break;
      beta.push_back(b);
      basis.push_back(w);
      for (double& x : basis.back()) x /= b;
    }

    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < basis.size(); ++i) axpy(ritz_y(static_cast<Eigen::Index>(i)), basis[i], x);
    normalize_in_place(x);
    h.multiply(x.data(), w.data());
    ++gs.matvecs;
    const double energy = dot(x, w);
    axpy(-energy, x, w);
    const double residual = std::sqrt(dot(w, w));
    start = x;
    if (residual <= tol) {
      for (double v : x) {
        if (std::abs(v) > 1e-10) {
          if (v < 0.0) {
            for (double& y : x) y = -y;
          }
          break;
        }
      }
      gs.energy = energy;
      gs.vector = std::move(x);
      gs.residual = residual;
      return gs;
    }
    gs.residual = residual;
  }
  throw ConvergenceError("Lanczos did not reach residual " + std::to_string(tol) + " (last " +
                         std::to_string(gs.residual) + ")");
}

namespace {

Statevector to_state(const std::vector<double>& v) {
  std::vector<cplx> amps(v.begin(), v.end());
  return Statevector::from_amplitudes(std::move(amps));
}

GroundState solve_point(const SptConfig& config, double lambda) {
  try {
    return lanczos_ground_state(cluster_ising_hamiltonian(config.n_sites, lambda),
                                config.tolerance, config.krylov_dim, config.max_restarts);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("lambda = " + std::to_string(lambda) + ": " + e.what());
  }
}

}  // namespace

SptDataset generate_spt(const SptConfig& config) {
  const auto grid = config.grid();
  std::vector<double> class0, class1;
  for (double lam : grid) (spt_label(lam) == 0 ? class0 : class1).push_back(lam);

  const auto& spec = config.split;
  const std::size_t need = spec.n_train_per_class + spec.n_test_per_class;
  SptDataset out;
  std::vector<std::pair<double, std::uint8_t>> train, test;
  for (std::uint8_t cls = 0; cls < 2; ++cls) {
    const auto& pts = cls == 0 ? class0 : class1;
    if (pts.size() < need) {
      throw InsufficientSamples("SPT grid has " + std::to_string(pts.size()) +
                                " points in class " + std::to_string(cls) + ", " +
                                std::to_string(need) + " requested");
    }
    const auto order = permutation(pts.size(), derive_seed(spec.seed, cls == 0 ? "spt-class0" : "spt-class1"));
    for (std::size_t k = 0; k < spec.n_train_per_class; ++k) train.emplace_back(pts[order[k]], cls);
    for (std::size_t k = spec.n_train_per_class; k < need; ++k) test.emplace_back(pts[order[k]], cls);
  }
  auto build = [&](std::vector<std::pair<double, std::uint8_t>> items, std::uint64_t seed,
                   std::vector<double>& lambdas) {
    const auto order = permutation(items.size(), seed);
    Dataset d;
    d.task_tag = "spt_cluster_ising_" + std::to_string(config.n_sites);
    d.n_qubits = config.n_sites;
    for (std::size_t i : order) {
      const auto [lam, cls] = items[i];
      d.states.push_back(to_state(solve_point(config, lam).vector));
      d.labels.push_back(cls);
      lambdas.push_back(lam);
    }
    return d;
  };
  out.split.train = build(std::move(train), derive_seed(spec.seed, "train-order"), out.train_lambdas);
  out.split.test = build(std::move(test), derive_seed(spec.seed, "test-order"), out.test_lambdas);
  return out;
}

SptSweep spt_sweep(const SptConfig& config) {
  SptSweep out;
  out.states.task_tag = "spt_sweep_" + std::to_string(config.n_sites);
  out.states.n_qubits = config.n_sites;
  for (double lam : config.grid()) {
    const GroundState gs = solve_point(config, lam);
    out.lambdas.push_back(lam);
    out.energies.push_back(gs.energy);
    out.residuals.push_back(gs.residual);
    out.states.states.push_back(to_state(gs.vector));
    out.states.labels.push_back(static_cast<std::uint8_t>(spt_label(lam)));
  }
  return out;
}

}  // namespace qclab
