#include "qclab/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "qclab/binary_io.hpp"
#include "qclab/error.hpp"

namespace qclab {

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
  for (double x : v) bin::put_f64(out, x);
}

std::vector<double> get_doubles(std::istream& in, std::uint64_t n, const char* what) {
  std::vector<double> v(n);
  for (double& x : v) x = bin::get_f64(in, what);
  return v;
}

}  // namespace

const std::string& Checkpoint::get(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  throw FormatError("checkpoint has no '" + key + "' entry");
}

bool Checkpoint::has(const std::string& key) const {
  for (const auto& kv : metadata) {
    if (kv.first == key) return true;
  }
  return false;
}

bool operator==(const Checkpoint& a, const Checkpoint& b) {
  if (a.metadata != b.metadata || !same_bits(a.theta, b.theta)) return false;
  if (a.fisher.has_value() != b.fisher.has_value()) return false;
  if (!a.fisher) return true;
  return same_bits(a.fisher->f, b.fisher->f) &&
         same_bits(a.fisher->anchor_theta, b.fisher->anchor_theta) &&
         a.fisher->skipped == b.fisher->skipped;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::string meta;
  for (const auto& [k, v] : c.metadata) {
    if (k.empty() || k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw FormatError("checkpoint metadata entry '" + k + "' cannot be stored");
    }
    meta += k + "=" + v + "\n";
  }
  if (c.fisher && (c.fisher->f.size() != c.theta.size() ||
                   c.fisher->anchor_theta.size() != c.theta.size())) {
    throw DimensionMismatch("checkpoint Fisher block does not match theta");
  }

  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write("QADV", 4);
    bin::put_u32(out, kCheckpointVersion);
    bin::put_u32(out, c.fisher ? 1u : 0u);
    bin::put_u64(out, meta.size());
    bin::put_bytes(out, meta);
    bin::put_u64(out, c.theta.size());
    put_doubles(out, c.theta);
    if (c.fisher) {
      put_doubles(out, c.fisher->anchor_theta);
      put_doubles(out, c.fisher->f);
      bin::put_u64(out, c.fisher->skipped);
    }
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string where = path.string() + ": ";
  if (bin::get_bytes(in, 4, "magic") != "QADV") throw FormatError(where + "not a QADV checkpoint");
  const std::uint32_t version = bin::get_u32(in, "version");
  if (version != kCheckpointVersion) {
    throw FormatError(where + "unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t flags = bin::get_u32(in, "flags");
  if ((flags & ~1u) != 0) throw FormatError(where + "unknown checkpoint flags");

  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::uint64_t>(in.tellg() - here);
  in.seekg(here);

  const std::uint64_t meta_len = bin::get_u64(in, "metadata length");
  if (meta_len > size) throw FormatError(where + "truncated metadata");
  Checkpoint c;
  std::istringstream meta(bin::get_bytes(in, meta_len, "metadata"));
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) throw FormatError(where + "malformed metadata line");
    c.metadata.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  const std::uint64_t n = bin::get_u64(in, "parameter count");
  if (n > size / 8) throw FormatError(where + "truncated parameters");
  c.theta = get_doubles(in, n, "theta");
  if (flags & 1u) {
    FisherDiagonal f;
    f.anchor_theta = get_doubles(in, n, "anchor theta");
    f.f = get_doubles(in, n, "Fisher diagonal");
    f.skipped = bin::get_u64(in, "skipped count");
    c.fisher = std::move(f);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(where + "trailing bytes");
  return c;
}

CircuitModel model_from_checkpoint(const Checkpoint& c) {
  const auto arch = parse_architecture(c.get("architecture"));
  const auto nq = static_cast<unsigned>(std::stoul(c.get("n_qubits")));
  const auto depth = static_cast<unsigned>(std::stoul(c.get("depth")));
  CircuitModel m = build_model(arch, nq, depth);
  if (m.n_params() != c.theta.size()) {
    throw DimensionMismatch("checkpoint holds " + std::to_string(c.theta.size()) +
                            " parameters, model needs " + std::to_string(m.n_params()));
  }
  return m;
}

}  // namespace qclab
