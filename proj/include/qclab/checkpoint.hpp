#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qclab/continual.hpp"

namespace qclab {

/// Trained parameters plus the provenance needed to rebuild the model.
/// File layout (little-endian): "QADV", u32 version, u32 flags (bit 0: Fisher
/// block present), u64 metadata length and UTF-8 `key=value` lines, u64
/// parameter count, theta; if flagged, anchor theta, Fisher diagonal and u64
/// skipped-sample count.
struct Checkpoint {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<double> theta;
  std::optional<FisherDiagonal> fisher;

  /// First value stored under `key`; throws FormatError when absent.
  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const;

  friend bool operator==(const Checkpoint& a, const Checkpoint& b);
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Writes via a temporary file renamed into place, so a failure leaves no
/// partial checkpoint behind.
void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rebuilds the model described by the architecture keys of the metadata.
CircuitModel model_from_checkpoint(const Checkpoint& c);

}  // namespace qclab
