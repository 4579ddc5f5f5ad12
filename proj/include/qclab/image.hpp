#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace qclab {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Binary PGM (P5), maxval <= 255.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Bilinear resampling with pixel-center alignment; values are in [0,1]
/// (input bytes divided by 255). Same-size input is copied without
/// interpolation.
std::vector<double> resize_bilinear(const GrayImage& image, std::size_t width, std::size_t height);

}  // namespace qclab
