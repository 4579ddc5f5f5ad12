#include "qclab/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "qclab/error.hpp"

namespace qclab {
namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

std::size_t header_number(std::istream& in, const std::filesystem::path& path) {
  const std::string tok = header_token(in);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit)) {
    throw FormatError("malformed PGM header in " + path.string());
  }
  return std::stoul(tok);
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (header_token(in) != "P5") throw FormatError(path.string() + " is not a binary PGM (P5)");
  GrayImage img;
  img.width = header_number(in, path);
  img.height = header_number(in, path);
  const std::size_t maxval = header_number(in, path);
  if (maxval == 0 || maxval > 255) throw FormatError("unsupported PGM maxval in " + path.string());
  if (img.width == 0 || img.height == 0) throw FormatError("empty PGM " + path.string());
  img.pixels.resize(img.width * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw FormatError("truncated PGM " + path.string());
  }
  if (maxval != 255) {
    for (auto& p : img.pixels) {
      p = static_cast<std::uint8_t>(std::lround(std::min<double>(p, maxval) * 255.0 / maxval));
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  if (image.pixels.size() != image.width * image.height) {
    throw DimensionMismatch("image buffer does not match its dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<double> resize_bilinear(const GrayImage& image, std::size_t width,
                                    std::size_t height) {
  if (image.width == 0 || image.height == 0 || width == 0 || height == 0) {
    throw DimensionMismatch("cannot resize an empty image");
  }
  std::vector<double> out(width * height);
  if (image.width == width && image.height == height) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = image.pixels[i] / 255.0;
    return out;
  }
  const double sx = static_cast<double>(image.width) / static_cast<double>(width);
  const double sy = static_cast<double>(image.height) / static_cast<double>(height);
  auto px = [&](std::size_t x, std::size_t y) { return image.pixels[y * image.width + x] / 255.0; };
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(image.height - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(image.width - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = (1.0 - wx) * px(x0, y0) + wx * px(x1, y0);
      const double bottom = (1.0 - wx) * px(x0, y1) + wx * px(x1, y1);
      out[y * width + x] = (1.0 - wy) * top + wy * bottom;
    }
  }
  return out;
}

}  // namespace qclab
