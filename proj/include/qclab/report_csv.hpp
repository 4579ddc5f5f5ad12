#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qclab {

/// One row of a run report. Unset fields are written as empty cells.
struct ReportRow {
  std::string phase;
  std::size_t step = 0;
  std::optional<double> loss, accuracy, fidelity;
  std::optional<double> task_a_accuracy, task_b_accuracy;
  std::optional<double> task_a_fidelity, task_b_fidelity;
  std::optional<double> task_a_loss, task_b_loss;
};

inline constexpr const char* kReportHeader =
    "phase,step,loss,accuracy,fidelity,task_a_accuracy,task_b_accuracy,task_a_fidelity,"
    "task_b_fidelity,task_a_loss,task_b_loss";

/// Numbers use 17 significant digits, so values survive a text round trip.
std::string render_report(const std::vector<ReportRow>& rows);
void write_report(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report(const std::filesystem::path& path);

}  // namespace qclab
