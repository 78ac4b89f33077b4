#include <algorithm>
#include <cmath>
#include <vector>

#include "veinmatch/error.hpp"
#include "veinmatch/image.hpp"

namespace veinmatch {
namespace {

struct TileMapping {
  double low = 0.0;
  double high = 1.0;
  bool identity = true;

  double operator()(double v) const {
    if (identity) return v;
    return std::clamp((v - low) / (high - low), 0.0, 1.0);
  }
};

// Tile boundaries along one axis: `count` tiles covering [0, extent).
std::vector<int> tile_edges(int extent, int count) {
  std::vector<int> edges(count + 1);
  for (int i = 0; i <= count; ++i) {
    edges[i] = static_cast<int>(static_cast<long long>(i) * extent / count);
  }
  return edges;
}

struct Blend {
  int lo = 0;
  int hi = 0;
  double t = 0.0;  // weight of `hi`
};

// For every coordinate, the two neighbouring tile centres and the linear
// weight between them. Outside the outermost centres a single tile applies.
std::vector<Blend> axis_blend(const std::vector<int>& edges) {
  const int count = static_cast<int>(edges.size()) - 1;
  std::vector<double> centres(count);
  for (int i = 0; i < count; ++i) centres[i] = 0.5 * (edges[i] + edges[i + 1] - 1);

  std::vector<Blend> out(edges.back());
  int seg = 0;
  for (int p = 0; p < edges.back(); ++p) {
    if (p <= centres.front()) {
      out[p] = {0, 0, 0.0};
    } else if (p >= centres.back()) {
      out[p] = {count - 1, count - 1, 0.0};
    } else {
      while (centres[seg + 1] < p) ++seg;
      const double t = (p - centres[seg]) / (centres[seg + 1] - centres[seg]);
      out[p] = {seg, seg + 1, t};
    }
  }
  return out;
}

}  // namespace

TileStretchEnhancer::TileStretchEnhancer(int tile_size, double clip_fraction)
    : tile_size_(tile_size), clip_fraction_(clip_fraction) {
  if (tile_size < 4) Fail(ErrorKind::kParameter, "tile size must be at least 4");
  if (!(clip_fraction > 0.0 && clip_fraction <= 1.0)) {
    Fail(ErrorKind::kParameter, "clip fraction must lie in (0, 1]");
  }
}

GrayImage TileStretchEnhancer::enhance(const GrayImage& img) const {
  const int w = img.width();
  const int h = img.height();
  if (w < tile_size_ || h < tile_size_) {
    Fail(ErrorKind::kParameter, "image is smaller than one enhancement tile");
  }
  const int nx = w / tile_size_;
  const int ny = h / tile_size_;
  const std::vector<int> ex = tile_edges(w, nx);
  const std::vector<int> ey = tile_edges(h, ny);

  const double tail = 0.5 * (1.0 - clip_fraction_);
  std::vector<TileMapping> maps(static_cast<std::size_t>(nx) * ny);
  std::vector<double> values;
  for (int ty = 0; ty < ny; ++ty) {
    for (int tx = 0; tx < nx; ++tx) {
      values.clear();
      for (int y = ey[ty]; y < ey[ty + 1]; ++y) {
        for (int x = ex[tx]; x < ex[tx + 1]; ++x) values.push_back(img.at(x, y));
      }
      std::sort(values.begin(), values.end());
      const double last = static_cast<double>(values.size() - 1);
      const double low = values[static_cast<std::size_t>(std::lround(tail * last))];
      const double high =
          values[static_cast<std::size_t>(std::lround((1.0 - tail) * last))];
      TileMapping& m = maps[static_cast<std::size_t>(ty) * nx + tx];
      if (high - low > 1e-6) m = {low, high, false};
    }
  }

  const std::vector<Blend> bx = axis_blend(ex);
  const std::vector<Blend> by = axis_blend(ey);
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const Blend& vy = by[y];
    for (int x = 0; x < w; ++x) {
      const Blend& vx = bx[x];
      const double v = img.at(x, y);
      auto map_at = [&](int tx, int ty) { return maps[static_cast<std::size_t>(ty) * nx + tx](v); };
      const double top = (1.0 - vx.t) * map_at(vx.lo, vy.lo) + vx.t * map_at(vx.hi, vy.lo);
      const double bottom = (1.0 - vx.t) * map_at(vx.lo, vy.hi) + vx.t * map_at(vx.hi, vy.hi);
      out.at(x, y) = std::clamp((1.0 - vy.t) * top + vy.t * bottom, 0.0, 1.0);
    }
  }
  return out;
}

GrayImage tile_contrast_enhance(const GrayImage& img, int tile_size,
                                double clip_fraction) {
  return TileStretchEnhancer(tile_size, clip_fraction).enhance(img);
}

}  // namespace veinmatch
