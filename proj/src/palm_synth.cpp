#include <algorithm>
#include <cmath>
#include <numbers>

#include "veinmatch/synthbench.hpp"

namespace veinmatch {
namespace {

constexpr double kPalmLeft = 60.0;
constexpr double kPalmRight = 260.0;
constexpr double kPalmTop = 170.0;
constexpr double kPalmBottom = 385.0;
constexpr double kCornerRadius = 20.0;
constexpr double kTipRadius = 18.0;

struct Finger {
  double left;
  double right;
  double tip;  // y of the topmost point
};

struct HandShape {
  Finger fingers[4];
  double web_top;  // webbing between the two middle fingers
  double width;

  bool inside_canonical(double x, double y) const {
    if (x >= kPalmLeft && x <= kPalmRight && y >= kPalmTop && y <= kPalmBottom) {
      // Rounded bottom corners.
      const double cy = kPalmBottom - kCornerRadius;
      if (y > cy) {
        const double cx = x < kPalmLeft + kCornerRadius    ? kPalmLeft + kCornerRadius
                          : x > kPalmRight - kCornerRadius ? kPalmRight - kCornerRadius
                                                           : x;
        return std::hypot(x - cx, y - cy) <= kCornerRadius;
      }
      return true;
    }
    if (x >= fingers[1].right && x <= fingers[2].left && y >= web_top && y <= kPalmTop) return true;
    for (const Finger& f : fingers) {
      if (x < f.left || x > f.right || y > kPalmTop || y < f.tip) continue;
      const double ty = f.tip + kTipRadius;
      if (y >= ty) return true;
      const double cx = std::clamp(x, f.left + kTipRadius, f.right - kTipRadius);
      if (std::hypot(x - cx, y - ty) <= kTipRadius) return true;
    }
    return false;
  }
};

HandShape make_shape(SeededRng& rng) {
  HandShape h;
  h.width = 320.0;
  const double tips[4] = {60.0, 30.0, 40.0, 80.0};
  const double lefts[4] = {60.0, 113.0, 167.0, 220.0};
  for (int i = 0; i < 4; ++i) {
    h.fingers[i] = {lefts[i], lefts[i] + 40.0, tips[i] + rng.uniform(-8.0, 8.0)};
  }
  h.web_top = 105.0 + rng.uniform(-5.0, 5.0);
  return h;
}

// Vein darkness in the canonical frame, stamped along random-walk curves.
Plane render_veins(SeededRng& rng, int width, int height, int count) {
  Plane dark(width, height);
  std::vector<Point2d> anchors;
  for (int v = 0; v < count; ++v) {
    Point2d p;
    if (v >= 3 && !anchors.empty() && rng.uniform() < 0.6) {
      p = anchors[rng.index(anchors.size())];
    } else {
      p = {rng.uniform(kPalmLeft + 15, kPalmRight - 15), rng.uniform(kPalmTop + 10, kPalmBottom - 20)};
    }
    double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double sigma = rng.uniform(1.3, 2.3);
    const double depth = rng.uniform(0.10, 0.18);
    const int steps = 18 + static_cast<int>(rng.index(18));
    const int reach = static_cast<int>(std::ceil(3.0 * sigma));
    for (int s = 0; s < steps; ++s) {
      heading += 0.35 * rng.normal();
      const Point2d next{p.x + 5.0 * std::cos(heading), p.y + 5.0 * std::sin(heading)};
      for (int k = 0; k < 10; ++k) {
        const double t = k / 10.0;
        const double cx = p.x + t * (next.x - p.x);
        const double cy = p.y + t * (next.y - p.y);
        const int x0 = static_cast<int>(std::floor(cx));
        const int y0 = static_cast<int>(std::floor(cy));
        for (int y = y0 - reach; y <= y0 + reach + 1; ++y) {
          if (y < 0 || y >= height) continue;
          for (int x = x0 - reach; x <= x0 + reach + 1; ++x) {
            if (x < 0 || x >= width) continue;
            const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            const double val = depth * std::exp(-d2 / (2.0 * sigma * sigma));
            dark.at(x, y) = std::max(dark.at(x, y), val);
          }
        }
      }
      p = next;
      if (s % 4 == 0) anchors.push_back(p);
    }
  }
  return dark;
}

double sample_plane(const Plane& p, double x, double y) {
  if (x < 0.0 || y < 0.0 || x > p.width() - 1 || y > p.height() - 1) return 0.0;
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, p.width() - 1);
  const int y1 = std::min(y0 + 1, p.height() - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  return (1 - ay) * ((1 - ax) * p.at(x0, y0) + ax * p.at(x1, y0)) +
         ay * ((1 - ax) * p.at(x0, y1) + ax * p.at(x1, y1));
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SyntheticPalm render_palm(std::uint64_t identity_seed, int sample_index, bool mirror,
                          const PalmRenderOptions& options) {
  const int w = options.width;
  const int h = options.height;
  SeededRng identity_rng(mix(identity_seed, 0xA11CE));
  const HandShape shape = make_shape(identity_rng);
  const Plane veins = render_veins(identity_rng, w, h, options.vein_count);
  const double skin = identity_rng.uniform(0.6, 0.7);

  SeededRng rng(mix(identity_seed, static_cast<std::uint64_t>(sample_index) + 1));
  const double angle = rng.uniform(-1.0, 1.0) * options.max_rotation_deg * std::numbers::pi / 180.0;
  const Point2d shift{rng.uniform(-1.0, 1.0) * options.max_shift,
                      rng.uniform(-1.0, 1.0) * options.max_shift};
  const double illum = rng.uniform(-0.05, 0.05);
  const double warp_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const Point2d centre{0.5 * (w - 1), 0.5 * (h - 1)};

  auto canonical_x = [&](double x) { return mirror ? (w - 1) - x : x; };

  SyntheticPalm out;
  out.image = GrayImage(w, h);
  const double c = std::cos(-angle);
  const double s = std::sin(-angle);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Output pixel -> canonical coordinates (inverse pose).
      const double px = x - shift.x - centre.x;
      const double py = y - shift.y - centre.y;
      double cx = centre.x + c * px - s * py;
      const double cy = centre.y + s * px + c * py;
      cx += 1.0 * std::sin(2.0 * std::numbers::pi * cy / 150.0 + warp_phase);
      const double fx = canonical_x(cx);
      double v = 0.06;
      if (shape.inside_canonical(fx, cy)) {
        v = skin + illum * (fx - centre.x) / w - sample_plane(veins, fx, cy);
      }
      v += options.noise_sigma * rng.normal();
      out.image.at(x, y) = std::clamp(v, 0.0, 1.0);
    }
  }

  auto forward = [&](Point2d canon) {
    const Point2d m{canonical_x(canon.x), canon.y};
    const Point2d r = rotate_point(m, angle, centre);
    return Point2d{r.x + shift.x, r.y + shift.y};
  };
  const double gap_left = 0.5 * (shape.fingers[0].right + shape.fingers[1].left);
  const double gap_right = 0.5 * (shape.fingers[2].right + shape.fingers[3].left);
  Point2d a = forward({gap_left, kPalmTop});
  Point2d b = forward({gap_right, kPalmTop});
  if (b.x < a.x) std::swap(a, b);
  out.valleys = {a, b};
  return out;
}

}  // namespace veinmatch
