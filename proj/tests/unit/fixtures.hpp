#pragma once

#include <random>
#include <span>
#include <string>

#include "qclab/dataset.hpp"
#include "qclab/statevector.hpp"
#include "../oracle.hpp"

namespace fixtures {

/// Random classical dataset with raw rows in (0.05, 1) and alternating labels.
inline qclab::Dataset classical(unsigned n_qubits, std::size_t n, std::uint64_t seed,
                                std::string tag = "toy") {
  std::mt19937_64 rng(seed);
  qclab::Dataset d;
  d.task_tag = std::move(tag);
  d.n_qubits = n_qubits;
  for (std::size_t k = 0; k < n; ++k) {
    auto raw = oracle::random_pixels(std::size_t{1} << n_qubits, rng);
    d.states.push_back(qclab::normalize(std::span<const double>(raw)));
    d.raw.push_back(std::move(raw));
    d.labels.push_back(static_cast<std::uint8_t>(k % 2));
  }
  return d;
}

/// Same shape but no raw rows; complex amplitudes unless `real_amplitudes`.
inline qclab::Dataset quantum(unsigned n_qubits, std::size_t n, std::uint64_t seed,
                              bool real_amplitudes = false) {
  std::mt19937_64 rng(seed);
  qclab::Dataset d;
  d.task_tag = "toy_quantum";
  d.n_qubits = n_qubits;
  for (std::size_t k = 0; k < n; ++k) {
    auto amps = oracle::random_amplitudes(std::size_t{1} << n_qubits, rng);
    if (real_amplitudes) {
      double sq = 0;
      for (auto& a : amps) {
        a = a.real();
        sq += std::norm(a);
      }
      for (auto& a : amps) a /= std::sqrt(sq);
    }
    d.states.push_back(qclab::Statevector::from_amplitudes(std::move(amps)));
    d.labels.push_back(static_cast<std::uint8_t>((k / 2) % 2));
  }
  return d;
}

}  // namespace fixtures
