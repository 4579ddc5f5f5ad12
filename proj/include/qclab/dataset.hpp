#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qclab/statevector.hpp"

namespace qclab {

/// Matched samples of one binary task. Classical samples keep their raw
/// pixel rows (values in [0,1]) next to the encoded states; quantum samples
/// (e.g. ground states) have no raw rows.
struct Dataset {
  std::string task_tag;
  unsigned n_qubits = 0;
  std::vector<std::vector<double>> raw;
  std::vector<Statevector> states;
  std::vector<std::uint8_t> labels;  // class index, 0 or 1

  std::size_t size() const noexcept { return states.size(); }
  bool has_raw() const noexcept { return !raw.empty(); }

  static std::array<double, 2> one_hot(unsigned cls) {
    return cls == 0 ? std::array{1.0, 0.0} : std::array{0.0, 1.0};
  }

  /// Raw row, or the real part of the state when there is none.
  std::vector<double> pixel_vector(std::size_t i) const;

  /// Throws DimensionMismatch on inconsistent fields.
  void validate() const;

  std::size_t count(unsigned cls) const;

  /// Samples at the given positions, in that order.
  Dataset subset(const std::vector<std::size_t>& idx) const;
};

/// FNV-1a 64 over labels and state amplitude bytes.
std::uint64_t fingerprint(const Dataset& d);

}  // namespace qclab
