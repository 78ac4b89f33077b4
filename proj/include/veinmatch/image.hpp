#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace veinmatch {

struct Point2d {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2d&, const Point2d&) = default;
};

struct Point2i {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point2i&, const Point2i&) = default;
};

// Row-major raster of doubles. The tag distinguishes intensity images, whose
// values live in [0, 1], from unconstrained real planes (DoG layers,
// gradient components) so the two cannot be mixed up at call sites.
template <typename Tag>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, double fill = 0.0);
  Raster(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  double at(int x, int y) const { return data_[index(x, y)]; }
  double& at(int x, int y) { return data_[index(x, y)]; }

  // Edge-clamped read; coordinates outside the raster replicate the border.
  double clamped(int x, int y) const;

  std::span<const double> pixels() const noexcept { return data_; }
  std::span<double> pixels() noexcept { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

struct IntensityTag {};
struct PlaneTag {};

/// Intensity image with values in [0, 1]. Quantization to 8 bits happens
/// only in image_io.
using GrayImage = Raster<IntensityTag>;
/// Real-valued plane without range constraints.
using Plane = Raster<PlaneTag>;

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return bits_.empty(); }

  bool at(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool value) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
  }
  // False outside the raster.
  bool test(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && at(x, y);
  }
  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct GradientField {
  Plane magnitude;
  Plane orientation;  // radians in [-pi, pi); 0 where magnitude is 0
};

GrayImage gaussian_blur(const GrayImage& img, double sigma);

// Sampled, normalized 1-D Gaussian of radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

GrayImage resize_bilinear(const GrayImage& img, double factor);

// Bilinear sample at real pixel coordinates (pixel centers at integers),
// edge-clamped.
double sample_bilinear(const GrayImage& img, double x, double y);

GradientField gradients(const GrayImage& img);

BinaryMask otsu_threshold(const GrayImage& img);
// The 8-bit level chosen by otsu_threshold; the mask is level > threshold.
int otsu_level(const GrayImage& img);

BinaryMask erode(const BinaryMask& mask, int radius);

// Rotates the image content by `angle` radians about `center` (pixel
// coordinates, y down, positive angle turns +x toward +y). Inverse mapping
// with bilinear sampling; source samples outside the raster read as 0.
GrayImage rotate_about(const GrayImage& img, double angle, Point2d center);
BinaryMask rotate_about(const BinaryMask& mask, double angle, Point2d center);

// Point form of the same transform.
Point2d rotate_point(Point2d p, double angle, Point2d center);

// Quantized 8-bit level of an intensity, as used by file I/O and Otsu.
inline int quantize_level(double v) {
  const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return static_cast<int>(c * 255.0 + 0.5);
}

GrayImage mask_to_image(const BinaryMask& mask);

// Contrast enhancement stage. Alternative enhancers plug in behind this.
class Enhancer {
 public:
  virtual ~Enhancer() = default;
  virtual GrayImage enhance(const GrayImage& img) const = 0;
};

// Per-tile clip-limited linear stretch. Each tile maps its
// [low, high] quantile range (clip_fraction of the mass, centred) onto
// [0, 1]; per-pixel output blends the four nearest tile mappings
// bilinearly. Tiles without contrast fall back to identity.
class TileStretchEnhancer final : public Enhancer {
 public:
  explicit TileStretchEnhancer(int tile_size = 16, double clip_fraction = 0.98);
  GrayImage enhance(const GrayImage& img) const override;

  int tile_size() const noexcept { return tile_size_; }
  double clip_fraction() const noexcept { return clip_fraction_; }

 private:
  int tile_size_;
  double clip_fraction_;
};

GrayImage tile_contrast_enhance(const GrayImage& img, int tile_size = 16,
                                double clip_fraction = 0.98);

}  // namespace veinmatch
