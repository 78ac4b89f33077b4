#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "veinmatch/image.hpp"

namespace veinmatch {

// Reads an 8-bit PNG or binary PGM (P5), detected by content. Colour inputs
// are reduced to the average of their channels.
GrayImage read_image(const std::filesystem::path& path);

// Writes PNG or PGM depending on the extension (.png / .pgm).
void write_image(const std::filesystem::path& path, const GrayImage& img);

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major RGB triples

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* px(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* px(int x, int y) const {
    return &data[(static_cast<std::size_t>(y) * width + x) * 3];
  }
};

void write_png(const std::filesystem::path& path, const RgbImage& img);
RgbImage read_png_rgb(const std::filesystem::path& path);

}  // namespace veinmatch
