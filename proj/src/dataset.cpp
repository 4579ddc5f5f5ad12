#include "qclab/dataset.hpp"

#include <cstring>
#include <string>

#include "qclab/error.hpp"

namespace qclab {

std::vector<double> Dataset::pixel_vector(std::size_t i) const {
  if (has_raw()) return raw.at(i);
  const auto amps = states.at(i).amps();
  std::vector<double> v(amps.size());
  for (std::size_t k = 0; k < amps.size(); ++k) v[k] = amps[k].real();
  return v;
}

void Dataset::validate() const {
  if (labels.size() != states.size()) throw DimensionMismatch("labels/states length mismatch");
  if (has_raw() && raw.size() != states.size()) {
    throw DimensionMismatch("raw/states length mismatch");
  }
  const std::size_t dim = std::size_t{1} << n_qubits;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].n_qubits() != n_qubits) throw DimensionMismatch("state register size mismatch");
    if (has_raw() && raw[i].size() != dim) throw DimensionMismatch("raw row length mismatch");
    if (labels[i] > 1) throw DimensionMismatch("label out of range");
  }
}

std::size_t Dataset::count(unsigned cls) const {
  std::size_t n = 0;
  for (auto l : labels) n += (l == cls);
  return n;
}

Dataset Dataset::subset(const std::vector<std::size_t>& idx) const {
  Dataset out;
  out.task_tag = task_tag;
  out.n_qubits = n_qubits;
  for (std::size_t i : idx) {
    if (has_raw()) out.raw.push_back(raw.at(i));
    out.states.push_back(states.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

std::uint64_t fingerprint(const Dataset& d) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(d.labels.data(), d.labels.size());
  for (const auto& s : d.states) mix(s.amps().data(), s.dim() * sizeof(cplx));
  return h;
}

}  // namespace qclab
