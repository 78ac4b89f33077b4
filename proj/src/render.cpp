#include "veinmatch/render.hpp"

#include <algorithm>
#include <cmath>

#include "veinmatch/error.hpp"

namespace veinmatch {
namespace {

void blend(RgbImage& img, int x, int y, Rgb c, double alpha) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height || alpha <= 0.0) return;
  alpha = std::min(alpha, 1.0);
  std::uint8_t* p = img.px(x, y);
  const std::uint8_t src[3] = {c.r, c.g, c.b};
  for (int k = 0; k < 3; ++k) {
    p[k] = static_cast<std::uint8_t>(std::lround((1.0 - alpha) * p[k] + alpha * src[k]));
  }
}

double fpart(double v) { return v - std::floor(v); }

GrayImage blank_for(const FeatureSet& fs) {
  double mx = 15.0;
  double my = 15.0;
  for (const Keypoint& k : fs.keypoints) {
    mx = std::max(mx, static_cast<double>(k.x));
    my = std::max(my, static_cast<double>(k.y));
  }
  return GrayImage(static_cast<int>(std::ceil(mx)) + 9, static_cast<int>(std::ceil(my)) + 9);
}

void paste(RgbImage& canvas, const GrayImage& img, int offset_x) {
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      std::uint8_t* p = canvas.px(x + offset_x, y);
      p[0] = p[1] = p[2] = static_cast<std::uint8_t>(quantize_level(img.at(x, y)));
    }
  }
}

}  // namespace

void draw_line(RgbImage& img, Point2d a, Point2d b, Rgb colour) {
  double x0 = a.x, y0 = a.y, x1 = b.x, y1 = b.y;
  const bool steep = std::abs(y1 - y0) > std::abs(x1 - x0);
  if (steep) {
    std::swap(x0, y0);
    std::swap(x1, y1);
  }
  if (x0 > x1) {
    std::swap(x0, x1);
    std::swap(y0, y1);
  }
  const double dx = x1 - x0;
  const double gradient = dx == 0.0 ? 1.0 : (y1 - y0) / dx;
  auto plot = [&](int x, int y, double alpha) {
    if (steep) {
      blend(img, y, x, colour, alpha);
    } else {
      blend(img, x, y, colour, alpha);
    }
  };

  double xend = std::round(x0);
  double yend = y0 + gradient * (xend - x0);
  double xgap = 1.0 - fpart(x0 + 0.5);
  const int xpxl1 = static_cast<int>(xend);
  const int ypxl1 = static_cast<int>(std::floor(yend));
  plot(xpxl1, ypxl1, (1.0 - fpart(yend)) * xgap);
  plot(xpxl1, ypxl1 + 1, fpart(yend) * xgap);
  double intery = yend + gradient;

  xend = std::round(x1);
  yend = y1 + gradient * (xend - x1);
  xgap = fpart(x1 + 0.5);
  const int xpxl2 = static_cast<int>(xend);
  const int ypxl2 = static_cast<int>(std::floor(yend));
  plot(xpxl2, ypxl2, (1.0 - fpart(yend)) * xgap);
  plot(xpxl2, ypxl2 + 1, fpart(yend) * xgap);

  for (int x = xpxl1 + 1; x < xpxl2; ++x) {
    const int y = static_cast<int>(std::floor(intery));
    plot(x, y, 1.0 - fpart(intery));
    plot(x, y + 1, fpart(intery));
    intery += gradient;
  }
}

RgbImage render_matches(const std::optional<GrayImage>& query_image,
                        const std::optional<GrayImage>& gallery_image, const FeatureSet& query,
                        const FeatureSet& gallery, const MatchSet& matches,
                        const std::vector<bool>& accepted) {
  if (accepted.size() != matches.size()) {
    Fail(ErrorKind::kConsistency, "one acceptance flag per match pair is required");
  }
  const GrayImage left = query_image ? *query_image : blank_for(query);
  const GrayImage right = gallery_image ? *gallery_image : blank_for(gallery);
  RgbImage canvas(left.width() + right.width(), std::max(left.height(), right.height()));
  paste(canvas, left, 0);
  paste(canvas, right, left.width());

  // Rejected lines first so accepted ones stay visible on top.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < matches.size(); ++i) {
      if (accepted[i] != (pass == 1)) continue;
      const MatchPair& m = matches.pairs[i];
      if (m.query_idx >= query.keypoints.size() || m.gallery_idx >= gallery.keypoints.size()) {
        Fail(ErrorKind::kConsistency, "match index outside the feature sets");
      }
      const Keypoint& q = query.keypoints[m.query_idx];
      const Keypoint& g = gallery.keypoints[m.gallery_idx];
      draw_line(canvas, {q.x, q.y}, {g.x + left.width(), g.y},
                accepted[i] ? kAcceptedColour : kRejectedColour);
    }
  }
  return canvas;
}

}  // namespace veinmatch
