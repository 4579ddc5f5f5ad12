#include "qclab/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "qclab/binary_io.hpp"
#include "qclab/error.hpp"
#include "qclab/image.hpp"
#include "qclab/rng.hpp"

namespace qclab {
namespace {

std::uint32_t read_be32(std::istream& in, const char* what) {
  unsigned char b[4];
  bin::read_exact(in, reinterpret_cast<char*>(b), 4, what);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

unsigned qubits_for_side(std::size_t side) {
  const std::size_t dim = side * side;
  if (side == 0 || (dim & (dim - 1)) != 0) {
    throw ConfigError("image side " + std::to_string(side) + " does not give 2^n pixels");
  }
  unsigned n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  return n;
}

// Class-balanced split: each class's candidates are shuffled, the first
// n_train go to train and the next n_test to test; each split is then
// shuffled as a whole.
template <class Item>
std::pair<std::vector<std::pair<Item, std::uint8_t>>, std::vector<std::pair<Item, std::uint8_t>>>
balanced_split(const std::vector<Item>& class0, const std::vector<Item>& class1,
               const SplitSpec& spec) {
  const std::size_t need = spec.n_train_per_class + spec.n_test_per_class;
  std::vector<std::pair<Item, std::uint8_t>> train, test;
  for (std::uint8_t cls = 0; cls < 2; ++cls) {
    const auto& items = cls == 0 ? class0 : class1;
    if (items.size() < need) {
      throw InsufficientSamples("class " + std::to_string(cls) + " has " +
                                std::to_string(items.size()) + " samples, " +
                                std::to_string(need) + " requested");
    }
    const auto order = permutation(items.size(), derive_seed(spec.seed, cls == 0 ? "class0" : "class1"));
    for (std::size_t k = 0; k < spec.n_train_per_class; ++k) train.emplace_back(items[order[k]], cls);
    for (std::size_t k = spec.n_train_per_class; k < need; ++k) test.emplace_back(items[order[k]], cls);
  }
  auto mix = [](auto& v, std::uint64_t seed) {
    const auto order = permutation(v.size(), seed);
    std::remove_reference_t<decltype(v)> out;
    out.reserve(v.size());
    for (std::size_t i : order) out.push_back(v[i]);
    v = std::move(out);
  };
  mix(train, derive_seed(spec.seed, "train-order"));
  mix(test, derive_seed(spec.seed, "test-order"));
  return {std::move(train), std::move(test)};
}

template <class Item, class Loader>
TrainTestSplit build_split(const std::vector<Item>& class0, const std::vector<Item>& class1,
                           const SplitSpec& spec, const std::string& tag, Loader&& load) {
  auto [train, test] = balanced_split(class0, class1, spec);
  auto encode = [&](const std::vector<std::pair<Item, std::uint8_t>>& items) {
    std::vector<std::vector<double>> raw;
    std::vector<std::uint8_t> labels;
    for (const auto& [item, cls] : items) {
      raw.push_back(load(item));
      labels.push_back(cls);
    }
    return encode_classical(std::move(raw), std::move(labels), tag);
  };
  return {encode(train), encode(test)};
}

}  // namespace

Dataset encode_classical(std::vector<std::vector<double>> raw, std::vector<std::uint8_t> labels,
                         std::string task_tag) {
  if (raw.size() != labels.size()) throw DimensionMismatch("raw/labels length mismatch");
  Dataset d;
  d.task_tag = std::move(task_tag);
  for (const auto& r : raw) d.states.push_back(normalize(r));
  d.n_qubits = d.states.empty() ? 0 : d.states.front().n_qubits();
  d.raw = std::move(raw);
  d.labels = std::move(labels);
  d.validate();
  return d;
}

TrainTestSplit load_mnist_idx(const std::filesystem::path& images_path,
                              const std::filesystem::path& labels_path,
                              std::pair<int, int> digits, const SplitSpec& split,
                              std::size_t side) {
  qubits_for_side(side);
  if (digits.first == digits.second) throw ConfigError("the two digits must differ");
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IoError("cannot open " + images_path.string());
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw IoError("cannot open " + labels_path.string());

  if (read_be32(img, "IDX image magic") != 2051) {
    throw FormatError(images_path.string() + ": bad IDX image magic");
  }
  const std::uint32_t n_images = read_be32(img, "IDX image count");
  const std::uint32_t rows = read_be32(img, "IDX rows");
  const std::uint32_t cols = read_be32(img, "IDX cols");
  if (read_be32(lab, "IDX label magic") != 2049) {
    throw FormatError(labels_path.string() + ": bad IDX label magic");
  }
  const std::uint32_t n_labels = read_be32(lab, "IDX label count");
  if (n_images != n_labels) throw FormatError("IDX image and label counts differ");
  if (rows == 0 || cols == 0) throw FormatError("IDX images have zero size");

  const std::string label_bytes = bin::get_bytes(lab, n_labels, "IDX labels");
  std::vector<std::size_t> class0, class1;
  for (std::size_t i = 0; i < n_labels; ++i) {
    const int d = static_cast<unsigned char>(label_bytes[i]);
    if (d == digits.first) class0.push_back(i);
    if (d == digits.second) class1.push_back(i);
  }
  const std::size_t image_bytes = std::size_t{rows} * cols;
  const std::streamoff data_start = 16;
  img.seekg(0, std::ios::end);
  if (static_cast<std::size_t>(img.tellg()) < data_start + image_bytes * n_images) {
    throw FormatError(images_path.string() + ": truncated IDX image data");
  }
  const std::string tag = "mnist_" + std::to_string(digits.first) + "v" + std::to_string(digits.second);
  return build_split(class0, class1, split, tag, [&](std::size_t idx) {
    GrayImage g{cols, rows, std::vector<std::uint8_t>(image_bytes)};
    img.seekg(data_start + static_cast<std::streamoff>(idx * image_bytes));
    bin::read_exact(img, reinterpret_cast<char*>(g.pixels.data()), image_bytes, "IDX image");
    return resize_bilinear(g, side, side);
  });
}

TrainTestSplit load_grayscale_dir(const std::filesystem::path& root,
                                  const std::filesystem::path& class0_subdir,
                                  const std::filesystem::path& class1_subdir,
                                  const SplitSpec& split, std::size_t side) {
  qubits_for_side(side);
  auto list = [&](const std::filesystem::path& sub) {
    const auto dir = root / sub;
    if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    }
    if (files.empty()) throw InsufficientSamples("no .pgm files in " + dir.string());
    std::sort(files.begin(), files.end());
    return files;
  };
  const auto c0 = list(class0_subdir);
  const auto c1 = list(class1_subdir);
  const std::string tag = class0_subdir.filename().string() + "_v_" + class1_subdir.filename().string();
  return build_split(c0, c1, split, tag, [&](const std::filesystem::path& p) {
    const GrayImage g = read_pgm(p);
    if (g.width != g.height) throw FormatError("non-square image " + p.string());
    return resize_bilinear(g, side, side);
  });
}

void save_cache(const Dataset& dataset, const std::filesystem::path& path) {
  dataset.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write("QDST", 4);
  bin::put_u32(out, kCacheVersion);
  bin::put_u32(out, dataset.has_raw() ? 1u : 0u);
  bin::put_u64(out, dataset.size());
  bin::put_u32(out, dataset.n_qubits);
  out.write(reinterpret_cast<const char*>(dataset.labels.data()),
            static_cast<std::streamsize>(dataset.labels.size()));
  for (const auto& row : dataset.raw) {
    for (double v : row) bin::put_f64(out, v);
  }
  for (const auto& s : dataset.states) {
    for (const cplx& a : s.amps()) {
      bin::put_f64(out, a.real());
      bin::put_f64(out, a.imag());
    }
  }
  bin::put_u32(out, static_cast<std::uint32_t>(dataset.task_tag.size()));
  bin::put_bytes(out, dataset.task_tag);
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (bin::get_bytes(in, 4, "magic") != "QDST") throw FormatError(path.string() + ": not a QDST file");
  const std::uint32_t version = bin::get_u32(in, "version");
  if (version != kCacheVersion) {
    throw FormatError(path.string() + ": unsupported QDST version " + std::to_string(version));
  }
  const std::uint32_t flags = bin::get_u32(in, "flags");
  if ((flags & ~1u) != 0) throw FormatError(path.string() + ": unknown QDST flags");
  const std::uint64_t n = bin::get_u64(in, "sample count");
  const std::uint32_t nq = bin::get_u32(in, "qubit count");
  if (nq > kMaxQubits) throw FormatError(path.string() + ": qubit count out of range");
  const std::size_t dim = std::size_t{1} << nq;
  // Reject counts the file cannot possibly hold before allocating.
  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
  in.seekg(here);
  const std::uint64_t per_sample = 1 + dim * 16 + ((flags & 1u) ? dim * 8 : 0);
  if (n > remaining / per_sample) throw FormatError(path.string() + ": truncated QDST file");

  Dataset d;
  d.n_qubits = nq;
  const std::string labels = bin::get_bytes(in, n, "labels");
  d.labels.assign(labels.begin(), labels.end());
  if (flags & 1u) {
    d.raw.resize(n);
    for (auto& row : d.raw) {
      row.resize(dim);
      for (double& v : row) v = bin::get_f64(in, "raw rows");
    }
  }
  d.states.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<cplx> amps(dim);
    for (cplx& a : amps) {
      const double re = bin::get_f64(in, "states");
      const double im = bin::get_f64(in, "states");
      a = {re, im};
    }
    d.states.push_back(Statevector::from_amplitudes(std::move(amps)));
  }
  const std::uint32_t tag_len = bin::get_u32(in, "tag length");
  d.task_tag = bin::get_bytes(in, tag_len, "tag");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after QDST payload");
  }
  d.validate();
  return d;
}

}  // namespace qclab
