#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "qclab/datasets.hpp"
#include "qclab/error.hpp"
#include "qclab/image.hpp"

using namespace qclab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {char(v >> 24), char(v >> 16), char(v >> 8), char(v)};
  out.write(b, 4);
}

// Synthetic IDX pair: image k of digit d has every pixel equal to 10*d + k % 7 + 1.
void write_idx(const fs::path& images, const fs::path& labels, const std::vector<int>& digits,
               std::uint32_t side) {
  std::ofstream img(images, std::ios::binary), lab(labels, std::ios::binary);
  put_be32(img, 2051);
  put_be32(img, static_cast<std::uint32_t>(digits.size()));
  put_be32(img, side);
  put_be32(img, side);
  put_be32(lab, 2049);
  put_be32(lab, static_cast<std::uint32_t>(digits.size()));
  for (std::size_t k = 0; k < digits.size(); ++k) {
    lab.put(static_cast<char>(digits[k]));
    for (std::uint32_t p = 0; p < side * side; ++p)
      img.put(static_cast<char>(10 * digits[k] + static_cast<int>(k % 7) + 1 + static_cast<int>(p % 3)));
  }
}

void expect_identical(const Dataset& a, const Dataset& b) {
  CHECK(a.task_tag == b.task_tag);
  CHECK(a.n_qubits == b.n_qubits);
  CHECK(a.labels == b.labels);
  CHECK(a.raw == b.raw);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.states[i] == b.states[i]);
}

}  // namespace

TEST_CASE("IDX loader filters, balances and encodes") {
  TempDir t("qclab_idx");
  std::vector<int> digits;
  for (int k = 0; k < 40; ++k) digits.push_back(k % 4 == 0 ? 9 : (k % 4 == 1 ? 1 : 3));
  write_idx(t.path / "img", t.path / "lab", digits, 3);
  const auto s = load_mnist_idx(t.path / "img", t.path / "lab", {1, 9}, {6, 3, 7}, 4);
  CHECK(s.train.size() == 12);
  CHECK(s.test.size() == 6);
  CHECK(s.train.count(0) == 6);
  CHECK(s.test.count(1) == 3);
  CHECK(s.train.n_qubits == 4);
  for (const Dataset* d : {&s.train, &s.test}) {
    for (std::size_t i = 0; i < d->size(); ++i) {
      CHECK(d->states[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
      for (double v : d->raw[i]) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      // class 1 (digit 9) images are much brighter than class 0 (digit 1)
      CHECK((d->raw[i][0] > 0.3) == (d->labels[i] == 1));
    }
  }
  // Same seed, same split; other seed, other order.
  const auto again = load_mnist_idx(t.path / "img", t.path / "lab", {1, 9}, {6, 3, 7}, 4);
  expect_identical(s.train, again.train);
  const auto other = load_mnist_idx(t.path / "img", t.path / "lab", {1, 9}, {6, 3, 8}, 4);
  CHECK(other.train.raw != s.train.raw);

  CHECK_THROWS_AS(load_mnist_idx(t.path / "img", t.path / "lab", {1, 9}, {1000000000, 3, 7}, 4),
                  InsufficientSamples);
  CHECK_THROWS_AS(load_mnist_idx(t.path / "lab", t.path / "img", {1, 9}, {6, 3, 7}, 4), FormatError);
  CHECK_THROWS_AS(load_mnist_idx(t.path / "nope", t.path / "lab", {1, 9}, {6, 3, 7}, 4), IoError);
  CHECK_THROWS_AS(load_mnist_idx(t.path / "img", t.path / "lab", {1, 9}, {6, 3, 7}, 5), ConfigError);
}

TEST_CASE("bilinear rescale") {
  GrayImage g{2, 2, {0, 255, 255, 0}};
  const auto r = resize_bilinear(g, 4, 4);
  // Half-pixel centers: output pixel 0 sits on input pixel 0, pixel 1 a quarter of the way to 1.
  CHECK(r[0] == doctest::Approx(0.0));
  CHECK(r[1] == doctest::Approx(0.25));
  CHECK(r[2] == doctest::Approx(0.75));
  CHECK(r[3] == doctest::Approx(1.0));
  CHECK(r[5] == doctest::Approx(0.375));
  GrayImage same{3, 3, {0, 10, 20, 30, 40, 50, 60, 70, 255}};
  const auto id = resize_bilinear(same, 3, 3);
  for (std::size_t i = 0; i < 9; ++i) CHECK(id[i] == same.pixels[i] / 255.0);
}

TEST_CASE("PGM round trip and header comments") {
  TempDir t("qclab_pgm");
  GrayImage g{3, 2, {0, 1, 2, 250, 254, 255}};
  write_pgm(t.path / "a.pgm", g);
  const GrayImage back = read_pgm(t.path / "a.pgm");
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.pixels == g.pixels);
  {
    std::ofstream out(t.path / "c.pgm", std::ios::binary);
    out << "P5\n# a comment\n2 1\n# another\n255\n";
    out.put(7);
    out.put(9);
  }
  CHECK(read_pgm(t.path / "c.pgm").pixels == std::vector<std::uint8_t>{7, 9});
  {
    std::ofstream out(t.path / "bad.pgm", std::ios::binary);
    out << "P2\n1 1\n255\n0\n";
  }
  CHECK_THROWS_AS(read_pgm(t.path / "bad.pgm"), FormatError);
  {
    std::ofstream out(t.path / "short.pgm", std::ios::binary);
    out << "P5\n4 4\n255\n";
    out.put(1);
  }
  CHECK_THROWS_AS(read_pgm(t.path / "short.pgm"), FormatError);
}

TEST_CASE("grayscale directories") {
  TempDir t("qclab_gray");
  fs::create_directories(t.path / "c0");
  fs::create_directories(t.path / "c1");
  fs::create_directories(t.path / "empty");
  for (int k = 0; k < 5; ++k) {
    write_pgm(t.path / "c0" / ("img" + std::to_string(k) + ".pgm"),
              GrayImage{8, 8, std::vector<std::uint8_t>(64, static_cast<std::uint8_t>(20 + k))});
    write_pgm(t.path / "c1" / ("img" + std::to_string(k) + ".pgm"),
              GrayImage{2, 2, std::vector<std::uint8_t>(4, static_cast<std::uint8_t>(200 + k))});
  }
  std::ofstream(t.path / "c0" / "notes.txt") << "ignored";
  const auto s = load_grayscale_dir(t.path, "c0", "c1", {3, 2, 1}, 4);
  CHECK(s.train.size() == 6);
  CHECK(s.test.size() == 4);
  // Uniform images encode to the uniform state.
  for (const auto& st : s.train.states)
    for (const auto& a : st.amps()) CHECK(a.real() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(load_grayscale_dir(t.path, "c0", "empty", {1, 1, 1}, 4), InsufficientSamples);
  CHECK_THROWS_AS(load_grayscale_dir(t.path, "c0", "missing", {1, 1, 1}, 4), IoError);
  CHECK_THROWS_AS(load_grayscale_dir(t.path, "c0", "c1", {5, 1, 1}, 4), InsufficientSamples);
}

TEST_CASE("a 64x64 mid-gray image bypasses interpolation and gives amplitudes 1/64") {
  TempDir t("qclab_gray64");
  fs::create_directories(t.path / "a");
  fs::create_directories(t.path / "b");
  std::vector<std::uint8_t> px(4096, 128);
  write_pgm(t.path / "a" / "x.pgm", GrayImage{64, 64, px});
  px[5] = 3;
  write_pgm(t.path / "b" / "y.pgm", GrayImage{64, 64, px});
  const auto s = load_grayscale_dir(t.path, "a", "b", {1, 0, 0});
  REQUIRE(s.train.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& raw = s.train.raw[i];
    const bool is_b = s.train.labels[i] == 1;
    CHECK(raw[5] == (is_b ? 3.0 : 128.0) / 255.0);
    CHECK(raw[6] == 128.0 / 255.0);
    if (!is_b)
      for (const auto& a : s.train.states[i].amps()) CHECK(a.real() == doctest::Approx(1.0 / 64).epsilon(1e-14));
  }
}

TEST_CASE("QDST cache round trips bit-exactly") {
  TempDir t("qclab_qdst");
  const Dataset c = fixtures::classical(3, 7, 4, "classical");
  save_cache(c, t.path / "c.qdst");
  expect_identical(c, load_cache(t.path / "c.qdst"));

  const Dataset q = fixtures::quantum(4, 5, 6);
  save_cache(q, t.path / "q.qdst");
  const Dataset qb = load_cache(t.path / "q.qdst");
  expect_identical(q, qb);
  CHECK_FALSE(qb.has_raw());

  // Corruptions
  auto bytes = [&](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  auto write = [&](const fs::path& p, const std::string& b) {
    std::ofstream(p, std::ios::binary).write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  std::string b = bytes(t.path / "c.qdst");
  std::string bad = b;
  bad[0] = 'X';
  write(t.path / "m.qdst", bad);
  CHECK_THROWS_AS(load_cache(t.path / "m.qdst"), FormatError);
  bad = b;
  bad[4] = 9;
  write(t.path / "v.qdst", bad);
  CHECK_THROWS_AS(load_cache(t.path / "v.qdst"), FormatError);
  write(t.path / "t.qdst", b.substr(0, b.size() - 20));
  CHECK_THROWS_AS(load_cache(t.path / "t.qdst"), FormatError);
  write(t.path / "x.qdst", b + "junk");
  CHECK_THROWS_AS(load_cache(t.path / "x.qdst"), FormatError);
  CHECK_THROWS_AS(load_cache(t.path / "absent.qdst"), IoError);
}

TEST_CASE("dataset helpers") {
  const Dataset c = fixtures::classical(2, 6, 1);
  CHECK_NOTHROW(c.validate());
  CHECK(c.count(0) == 3);
  const Dataset s = c.subset({4, 1});
  CHECK(s.size() == 2);
  CHECK(s.raw[0] == c.raw[4]);
  CHECK(s.labels[1] == c.labels[1]);
  CHECK(fingerprint(c) == fingerprint(c.subset({0, 1, 2, 3, 4, 5})));
  CHECK(fingerprint(c) != fingerprint(s));
  Dataset broken = c;
  broken.labels.pop_back();
  CHECK_THROWS_AS(broken.validate(), DimensionMismatch);
  CHECK(Dataset::one_hot(1) == std::array{0.0, 1.0});
  const Dataset q = fixtures::quantum(2, 2, 3);
  CHECK(q.pixel_vector(1)[0] == q.states[1][0].real());
}
