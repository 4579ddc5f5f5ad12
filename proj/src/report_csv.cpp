#include "qclab/report_csv.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "qclab/error.hpp"

namespace qclab {

namespace {

std::string cell(const std::optional<double>& v) {
  return v ? fmt::format("{:.17g}", *v) : std::string();
}

std::optional<double> parse_cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw FormatError("bad report cell '" + s + "'");
  return v;
}

}  // namespace

std::string render_report(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.phase, r.step, cell(r.loss),
                       cell(r.accuracy), cell(r.fidelity), cell(r.task_a_accuracy),
                       cell(r.task_b_accuracy), cell(r.task_a_fidelity), cell(r.task_b_fidelity),
                       cell(r.task_a_loss), cell(r.task_b_loss));
  }
  return out;
}

void write_report(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << render_report(rows);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ReportRow> read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    throw FormatError(path.string() + ": unexpected report header");
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 11) throw FormatError(path.string() + ": report row with " + std::to_string(f.size()) + " fields");
    ReportRow r;
    r.phase = f[0];
    r.step = std::stoul(f[1]);
    r.loss = parse_cell(f[2]);
    r.accuracy = parse_cell(f[3]);
    r.fidelity = parse_cell(f[4]);
    r.task_a_accuracy = parse_cell(f[5]);
    r.task_b_accuracy = parse_cell(f[6]);
    r.task_a_fidelity = parse_cell(f[7]);
    r.task_b_fidelity = parse_cell(f[8]);
    r.task_a_loss = parse_cell(f[9]);
    r.task_b_loss = parse_cell(f[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace qclab
