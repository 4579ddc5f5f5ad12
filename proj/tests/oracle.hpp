#pragma once

// Test-only reference implementations. Nothing here calls into the kernel
// tables: gates are built as dense 2^n x 2^n matrices from their textbook
// definitions and multiplied out.

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qclab/circuit.hpp"
#include "qclab/datasets.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline Eigen::Matrix2cd rotation(qclab::GateKind kind, double theta) {
  // exp(i theta P / 2) = cos(theta/2) I + i sin(theta/2) P
  Eigen::Matrix2cd p;
  if (kind == qclab::GateKind::RZ) {
    p << 1, 0, 0, -1;
  } else {
    p << 0, 1, 1, 0;
  }
  const cplx i(0, 1);
  return std::cos(theta / 2) * Eigen::Matrix2cd::Identity() + i * std::sin(theta / 2) * p;
}

/// Dense matrix of a gate on an n-qubit register, qubit 0 = least significant bit.
inline Matrix gate_matrix(const qclab::GateOp& g, unsigned n, double theta) {
  const std::size_t dim = std::size_t{1} << n;
  Matrix m = Matrix::Zero(dim, dim);
  for (std::size_t c = 0; c < dim; ++c) {
    if (g.kind == qclab::GateKind::CNOT) {
      const bool ctrl = (c >> g.qubits[0]) & 1u;
      m(ctrl ? c ^ (std::size_t{1} << g.qubits[1]) : c, c) = 1.0;
      continue;
    }
    const unsigned t = g.target();
    if (g.kind == qclab::GateKind::CRX && !((c >> g.qubits[0]) & 1u)) {
      m(c, c) = 1.0;
      continue;
    }
    const auto r2 = rotation(g.kind == qclab::GateKind::CRX ? qclab::GateKind::RX : g.kind, theta);
    const std::size_t cb = (c >> t) & 1u;
    for (std::size_t rb = 0; rb < 2; ++rb) {
      const std::size_t r = (c & ~(std::size_t{1} << t)) | (rb << t);
      m(r, c) += r2(static_cast<Eigen::Index>(rb), static_cast<Eigen::Index>(cb));
    }
  }
  return m;
}

inline Matrix circuit_unitary(const qclab::CircuitModel& model, const std::vector<double>& theta) {
  const std::size_t dim = std::size_t{1} << model.n_qubits();
  Matrix u = Matrix::Identity(dim, dim);
  for (const auto& g : model.gates()) {
    const double t = g.param_index ? theta[*g.param_index] : 0.0;
    u = gate_matrix(g, model.n_qubits(), t) * u;
  }
  return u;
}

/// Output state by multiplying dense gate matrices into the vector one at a time.
inline Vector apply_circuit(const qclab::CircuitModel& model, const std::vector<double>& theta,
                            Vector v) {
  for (const auto& g : model.gates()) {
    const double t = g.param_index ? theta[*g.param_index] : 0.0;
    v = gate_matrix(g, model.n_qubits(), t) * v;
  }
  return v;
}

inline Vector to_vector(const qclab::Statevector& s) {
  Vector v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

/// (p0, p1) on `qubit` by direct summation.
inline std::pair<double, double> probabilities(const Vector& v, unsigned qubit) {
  double p0 = 0, p1 = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    (((static_cast<std::size_t>(i) >> qubit) & 1u) ? p1 : p0) += std::norm(v(i));
  }
  return {p0, p1};
}

inline std::vector<double> random_theta(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  std::vector<double> t(n);
  for (double& x : t) x = u(rng);
  return t;
}

inline std::vector<cplx> random_amplitudes(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> a(dim);
  double sq = 0;
  for (auto& x : a) {
    x = {g(rng), g(rng)};
    sq += std::norm(x);
  }
  for (auto& x : a) x /= std::sqrt(sq);
  return a;
}

inline std::vector<double> random_pixels(std::size_t dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> a(dim);
  for (auto& x : a) x = u(rng);
  return a;
}

/// Central difference of f at x along coordinate i.
template <class F>
double central_difference(F&& f, std::vector<double> x, std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2 * h);
}

inline Matrix pauli(char p) {
  Matrix m(2, 2);
  const std::complex<double> i(0, 1);
  switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m = Matrix::Identity(2, 2);
  }
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

// Pauli string with ops[j] acting on site j (site 0 = least significant bit).
inline Matrix string_op(const std::string& ops) {
  Matrix m = Matrix::Identity(1, 1);
  for (std::size_t j = ops.size(); j-- > 0;) m = kron(m, pauli(ops[j]));
  return m;
}

// Cluster-Ising Hamiltonian built from Pauli strings.
inline Matrix dense_cluster_ising(unsigned n, double lambda) {
  const auto dim = static_cast<Eigen::Index>(1) << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (unsigned j = 0; j < n; ++j) {
    std::string xzx(n, 'I'), yy(n, 'I');
    xzx[(j + n - 1) % n] = 'X';
    xzx[j] = 'Z';
    xzx[(j + 1) % n] = 'X';
    yy[j] = 'Y';
    yy[(j + 1) % n] = 'Y';
    h -= string_op(xzx);
    h += lambda * string_op(yy);
  }
  return h;
}

inline Matrix to_dense(const qclab::SparseMatrix& s) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(s.dim), static_cast<Eigen::Index>(s.dim));
  for (std::size_t r = 0; r < s.dim; ++r)
    for (std::size_t k = s.row_start[r]; k < s.row_start[r + 1]; ++k)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s.col[k])) += s.val[k];
  return m;
}

}  // namespace oracle
