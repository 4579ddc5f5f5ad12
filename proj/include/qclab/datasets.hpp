#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "qclab/dataset.hpp"

namespace qclab {

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

/// Per-class sample counts and the seed that picks them.
struct SplitSpec {
  std::size_t n_train_per_class = 500;
  std::size_t n_test_per_class = 100;
  std::uint64_t seed = 0;
};

/// Rescaled images are side x side; side^2 must equal 2^n_qubits.
inline constexpr std::size_t kImageSide = 64;

/// MNIST-style IDX pair. The first digit becomes class 0, the second class 1.
TrainTestSplit load_mnist_idx(const std::filesystem::path& images_path,
                              const std::filesystem::path& labels_path,
                              std::pair<int, int> digits, const SplitSpec& split,
                              std::size_t side = kImageSide);

/// Two directories of P5 PGM images, read in lexicographic filename order.
TrainTestSplit load_grayscale_dir(const std::filesystem::path& root,
                                  const std::filesystem::path& class0_subdir,
                                  const std::filesystem::path& class1_subdir,
                                  const SplitSpec& split, std::size_t side = kImageSide);

/// Raw pixel rows in [0,1] -> normalized states.
Dataset encode_classical(std::vector<std::vector<double>> raw, std::vector<std::uint8_t> labels,
                         std::string task_tag);

// ---------------------------------------------------------------------------
// Cluster-Ising ground states
//   H(lambda) = -sum_j X_{j-1} Z_j X_{j+1} + lambda sum_j Y_j Y_{j+1}
// on a periodic chain.

struct SptConfig {
  unsigned n_sites = 12;
  double lambda_min = 0.0;
  double lambda_max = 2.0;
  double lambda_step = 0.001;
  SplitSpec split{500, 100, 0};
  double tolerance = 1e-10;
  std::size_t krylov_dim = 160;
  std::size_t max_restarts = 200;

  void validate() const;
  /// Grid points, lambda = 1 excluded.
  std::vector<double> grid() const;
};

/// Compressed sparse rows; real symmetric.
struct SparseMatrix {
  std::size_t dim = 0;
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> col;
  std::vector<double> val;

  void multiply(const double* x, double* y) const;
};

SparseMatrix cluster_ising_hamiltonian(unsigned n_sites, double lambda);

struct GroundState {
  double energy = 0.0;
  std::vector<double> vector;  // unit norm, first nonzero entry positive
  double residual = 0.0;       // ||H v - E v||
  std::size_t matvecs = 0;
};

/// Restarted Lanczos with full reorthogonalization from a fixed pseudo-random
/// start vector. Throws ConvergenceError when the residual does not reach `tol`.
GroundState lanczos_ground_state(const SparseMatrix& h, double tol = 1e-10,
                                 std::size_t krylov_dim = 160, std::size_t max_restarts = 200);

/// Class 0 for lambda < 1 (cluster phase), class 1 for lambda > 1.
unsigned spt_label(double lambda);

struct SptDataset {
  TrainTestSplit split;
  std::vector<double> train_lambdas;
  std::vector<double> test_lambdas;
};

SptDataset generate_spt(const SptConfig& config);

/// Ground states for every grid point, in grid order.
struct SptSweep {
  std::vector<double> lambdas;
  std::vector<double> energies;
  std::vector<double> residuals;
  Dataset states;
};
SptSweep spt_sweep(const SptConfig& config);

// ---------------------------------------------------------------------------
// QDST cache: "QDST", u32 version, u32 flags (bit 0: raw rows present),
// u64 n_samples, u32 n_qubits, n label bytes, raw rows (f64), state rows
// (re, im f64 pairs), then u32 tag length and the tag bytes. Little-endian.

inline constexpr std::uint32_t kCacheVersion = 1;

void save_cache(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_cache(const std::filesystem::path& path);

}  // namespace qclab
