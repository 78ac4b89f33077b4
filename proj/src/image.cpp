#include "veinmatch/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "veinmatch/error.hpp"

namespace veinmatch {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_image(int width, int height) {
  if (width <= 0 || height <= 0) {
    Fail(ErrorKind::kParameter, "raster dimensions must be positive, got " +
                                    std::to_string(width) + "x" +
                                    std::to_string(height));
  }
}

// Reads 0 outside the raster.
double zero_padded(const GrayImage& img, int x, int y) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return 0.0;
  return img.at(x, y);
}

double sample_zero_fill(const GrayImage& img, double x, double y) {
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  if (fx0 < -1.0 || fy0 < -1.0 || fx0 >= img.width() || fy0 >= img.height()) {
    return 0.0;
  }
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double ax = x - fx0;
  const double ay = y - fy0;
  const double top = (1.0 - ax) * zero_padded(img, x0, y0) +
                     ax * zero_padded(img, x0 + 1, y0);
  const double bottom = (1.0 - ax) * zero_padded(img, x0, y0 + 1) +
                        ax * zero_padded(img, x0 + 1, y0 + 1);
  return (1.0 - ay) * top + ay * bottom;
}

}  // namespace

template <typename Tag>
Raster<Tag>::Raster(int width, int height, double fill)
    : width_(width), height_(height) {
  require_image(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

template <typename Tag>
Raster<Tag>::Raster(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  require_image(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    Fail(ErrorKind::kParameter, "raster data length does not match dimensions");
  }
}

template <typename Tag>
double Raster<Tag>::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return data_[index(x, y)];
}

template class Raster<IntensityTag>;
template class Raster<PlaneTag>;

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  require_image(width, height);
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    Fail(ErrorKind::kParameter, "gaussian sigma must be positive and finite");
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[i + radius] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int w = img.width();
  const int h = img.height();

  Plane tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[i + radius] * img.clamped(x + i, y);
      }
      tmp.at(x, y) = acc;
    }
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[i + radius] * tmp.clamped(x, y + i);
      }
      out.at(x, y) = clamp01(acc);
    }
  }
  return out;
}

double sample_bilinear(const GrayImage& img, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  const double top = (1.0 - ax) * img.at(x0, y0) + ax * img.at(x1, y0);
  const double bottom = (1.0 - ax) * img.at(x0, y1) + ax * img.at(x1, y1);
  return (1.0 - ay) * top + ay * bottom;
}

GrayImage resize_bilinear(const GrayImage& img, double factor) {
  if (!std::isfinite(factor) || factor <= 0.0 || factor > 4.0) {
    Fail(ErrorKind::kParameter, "resize factor must lie in (0, 4]");
  }
  const int ow = static_cast<int>(std::lround(factor * img.width()));
  const int oh = static_cast<int>(std::lround(factor * img.height()));
  if (ow < 1 || oh < 1) {
    Fail(ErrorKind::kParameter, "resize would produce an empty image");
  }
  const double sx = static_cast<double>(img.width()) / ow;
  const double sy = static_cast<double>(img.height()) / oh;
  GrayImage out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    const double src_y = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < ow; ++x) {
      const double src_x = (x + 0.5) * sx - 0.5;
      out.at(x, y) = clamp01(sample_bilinear(img, src_x, src_y));
    }
  }
  return out;
}

GradientField gradients(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 2 || h < 2) {
    Fail(ErrorKind::kParameter, "gradients need an image of at least 2x2");
  }
  GradientField g{Plane(w, h), Plane(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double gx;
      if (x == 0) {
        gx = img.at(1, y) - img.at(0, y);
      } else if (x == w - 1) {
        gx = img.at(w - 1, y) - img.at(w - 2, y);
      } else {
        gx = 0.5 * (img.at(x + 1, y) - img.at(x - 1, y));
      }
      double gy;
      if (y == 0) {
        gy = img.at(x, 1) - img.at(x, 0);
      } else if (y == h - 1) {
        gy = img.at(x, h - 1) - img.at(x, h - 2);
      } else {
        gy = 0.5 * (img.at(x, y + 1) - img.at(x, y - 1));
      }
      const double mag = std::sqrt(gx * gx + gy * gy);
      double ori = 0.0;
      if (mag > 0.0) {
        ori = std::atan2(gy, gx);
        if (ori >= std::numbers::pi) ori -= 2.0 * std::numbers::pi;
      }
      g.magnitude.at(x, y) = mag;
      g.orientation.at(x, y) = ori;
    }
  }
  return g;
}

int otsu_level(const GrayImage& img) {
  std::array<std::size_t, 256> hist{};
  for (double v : img.pixels()) ++hist[quantize_level(v)];
  const auto levels = std::count_if(hist.begin(), hist.end(),
                                    [](std::size_t c) { return c > 0; });
  if (levels < 2) {
    Fail(ErrorKind::kDegenerateHistogram,
         "otsu threshold needs at least two distinct intensity levels");
  }

  const double total = static_cast<double>(img.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * static_cast<double>(hist[i]);

  double w0 = 0.0;
  double sum0 = 0.0;
  double best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 255; ++t) {
    w0 += static_cast<double>(hist[t]);
    sum0 += t * static_cast<double>(hist[t]);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = (w0 / total) * (w1 / total) * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

BinaryMask otsu_threshold(const GrayImage& img) {
  const int t = otsu_level(img);
  BinaryMask mask(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      mask.set(x, y, quantize_level(img.at(x, y)) > t);
    }
  }
  return mask;
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  const int w = mask.width();
  const int h = mask.height();
  if (radius < 1 || radius >= std::min(w, h)) {
    Fail(ErrorKind::kParameter, "erosion radius must be in [1, min(width, height))");
  }
  // Separable min filter using running counts of true pixels; anything
  // reaching outside the raster is false.
  BinaryMask horiz(w, h);
  std::vector<int> prefix(std::max(w, h) + 1);
  for (int y = 0; y < h; ++y) {
    prefix[0] = 0;
    for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + (mask.at(x, y) ? 1 : 0);
    for (int x = radius; x < w - radius; ++x) {
      horiz.set(x, y, prefix[x + radius + 1] - prefix[x - radius] == 2 * radius + 1);
    }
  }
  BinaryMask out(w, h);
  for (int x = 0; x < w; ++x) {
    prefix[0] = 0;
    for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + (horiz.at(x, y) ? 1 : 0);
    for (int y = radius; y < h - radius; ++y) {
      out.set(x, y, prefix[y + radius + 1] - prefix[y - radius] == 2 * radius + 1);
    }
  }
  return out;
}

Point2d rotate_point(Point2d p, double angle, Point2d center) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double dx = p.x - center.x;
  const double dy = p.y - center.y;
  return {center.x + c * dx - s * dy, center.y + s * dx + c * dy};
}

GrayImage rotate_about(const GrayImage& img, double angle, Point2d center) {
  GrayImage out(img.width(), img.height());
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double dx = x - center.x;
      const double dy = y - center.y;
      const double sx = center.x + c * dx + s * dy;
      const double sy = center.y - s * dx + c * dy;
      out.at(x, y) = clamp01(sample_zero_fill(img, sx, sy));
    }
  }
  return out;
}

GrayImage mask_to_image(const BinaryMask& mask) {
  GrayImage img(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) img.at(x, y) = mask.at(x, y) ? 1.0 : 0.0;
  }
  return img;
}

BinaryMask rotate_about(const BinaryMask& mask, double angle, Point2d center) {
  const GrayImage rotated = rotate_about(mask_to_image(mask), angle, center);
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) out.set(x, y, rotated.at(x, y) >= 0.5);
  }
  return out;
}

}  // namespace veinmatch
