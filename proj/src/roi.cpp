#include "veinmatch/roi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <utility>

#include <json.hpp>

#include "veinmatch/error.hpp"

namespace veinmatch {
namespace {

// Clockwise on screen (y down), starting east.
constexpr std::array<Point2i, 8> kDirs = {{
    {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1},
}};

int direction_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i) {
    if (kDirs[i].x == dx && kDirs[i].y == dy) return i;
  }
  return -1;
}

long long cross(Point2i o, Point2i a, Point2i b) {
  return static_cast<long long>(a.x - o.x) * (b.y - o.y) -
         static_cast<long long>(a.y - o.y) * (b.x - o.x);
}

double distance(Point2d a, Point2d b) { return std::hypot(b.x - a.x, b.y - a.y); }

Point2d to_d(Point2i p) { return {static_cast<double>(p.x), static_cast<double>(p.y)}; }

struct Labels {
  std::vector<int> label;  // -1 for background
  std::vector<std::size_t> area;
  std::vector<Point2i> first;  // first pixel of each component in raster order
};

Labels label_components(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  Labels out;
  out.label.assign(static_cast<std::size_t>(w) * h, -1);
  std::vector<Point2i> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y) || out.label[static_cast<std::size_t>(y) * w + x] >= 0) continue;
      const int id = static_cast<int>(out.area.size());
      out.area.push_back(0);
      out.first.push_back({x, y});
      stack.push_back({x, y});
      out.label[static_cast<std::size_t>(y) * w + x] = id;
      while (!stack.empty()) {
        const Point2i p = stack.back();
        stack.pop_back();
        ++out.area[id];
        for (const Point2i d : kDirs) {
          const int nx = p.x + d.x;
          const int ny = p.y + d.y;
          if (!mask.test(nx, ny)) continue;
          int& l = out.label[static_cast<std::size_t>(ny) * w + nx];
          if (l >= 0) continue;
          l = id;
          stack.push_back({nx, ny});
        }
      }
    }
  }
  return out;
}

}  // namespace

double signed_area2(const std::vector<Point2i>& pts) {
  double acc = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2i a = pts[i];
    const Point2i b = pts[(i + 1) % n];
    acc += static_cast<double>(a.x) * b.y - static_cast<double>(b.x) * a.y;
  }
  return acc;
}

Contour trace_outer_contour(const BinaryMask& mask, std::size_t min_area) {
  const Labels labels = label_components(mask);
  int best = -1;
  for (std::size_t i = 0; i < labels.area.size(); ++i) {
    if (labels.area[i] < min_area) continue;
    if (best < 0 || labels.area[i] > labels.area[best]) best = static_cast<int>(i);
  }
  if (best < 0) {
    Fail(ErrorKind::kSegmentation, "no connected component of at least " +
                                       std::to_string(min_area) + " pixels");
  }

  const int w = mask.width();
  auto inside = [&](Point2i p) {
    return mask.test(p.x, p.y) &&
           labels.label[static_cast<std::size_t>(p.y) * w + p.x] == best;
  };

  // Moore-neighbour border following from the first raster pixel, whose
  // west neighbour is guaranteed to be background.
  const Point2i start = labels.first[best];
  Contour contour;
  contour.points.push_back(start);

  auto step = [&](Point2i p, int backtrack, Point2i& next, int& next_backtrack) {
    for (int k = 1; k <= 8; ++k) {
      const int d = (backtrack + k) % 8;
      const Point2i q{p.x + kDirs[d].x, p.y + kDirs[d].y};
      if (inside(q)) {
        const Point2i prev{p.x + kDirs[(d + 7) % 8].x, p.y + kDirs[(d + 7) % 8].y};
        next = q;
        next_backtrack = direction_index(prev.x - q.x, prev.y - q.y);
        return true;
      }
    }
    return false;
  };

  Point2i first_move;
  int backtrack = 4;
  if (!step(start, backtrack, first_move, backtrack)) return contour;

  Point2i p = first_move;
  for (;;) {
    Point2i next;
    int next_backtrack = backtrack;
    step(p, backtrack, next, next_backtrack);
    if (p == start && next == first_move) break;
    contour.points.push_back(p);
    p = next;
    backtrack = next_backtrack;
  }
  return contour;
}

Contour convex_hull(const Contour& contour) {
  std::vector<Point2i> pts = contour.points;
  std::sort(pts.begin(), pts.end(), [](Point2i a, Point2i b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) {
    Fail(ErrorKind::kDegenerateGeometry, "convex hull needs three distinct points");
  }

  std::vector<Point2i> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point2i p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) {
    Fail(ErrorKind::kDegenerateGeometry, "input points are collinear");
  }
  return Contour{std::move(hull)};
}

std::vector<ValleyCandidate> detect_valley_points(const Contour& contour,
                                                  const Contour& hull,
                                                  double min_depth_fraction) {
  const auto& pts = contour.points;
  std::map<std::pair<int, int>, std::size_t> first_index;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    first_index.emplace(std::make_pair(pts[i].x, pts[i].y), i);
  }
  std::vector<std::size_t> hull_idx;
  double perimeter = 0.0;
  for (std::size_t i = 0; i < hull.points.size(); ++i) {
    const Point2i v = hull.points[i];
    const auto it = first_index.find({v.x, v.y});
    if (it == first_index.end()) {
      Fail(ErrorKind::kDegenerateGeometry, "hull vertex is not on the contour");
    }
    hull_idx.push_back(it->second);
    perimeter += distance(to_d(v), to_d(hull.points[(i + 1) % hull.points.size()]));
  }
  std::sort(hull_idx.begin(), hull_idx.end());
  hull_idx.erase(std::unique(hull_idx.begin(), hull_idx.end()), hull_idx.end());

  const double min_depth = min_depth_fraction * perimeter;
  std::vector<ValleyCandidate> out;
  const std::size_t n = pts.size();
  for (std::size_t h = 0; h < hull_idx.size(); ++h) {
    const std::size_t i0 = hull_idx[h];
    const std::size_t i1 = hull_idx[(h + 1) % hull_idx.size()];
    const Point2d a = to_d(pts[i0]);
    const Point2d b = to_d(pts[i1]);
    const double len = distance(a, b);
    if (len == 0.0) continue;

    double best_depth = -1.0;
    std::size_t best = i0;
    for (std::size_t i = (i0 + 1) % n; i != i1; i = (i + 1) % n) {
      const Point2d p = to_d(pts[i]);
      const double depth =
          std::abs((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / len;
      if (depth > best_depth) {
        best_depth = depth;
        best = i;
      }
    }
    if (best_depth >= min_depth && best_depth > 0.0) {
      out.push_back({to_d(pts[best]), best_depth, len, a, b});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ValleyCandidate& l, const ValleyCandidate& r) {
    return l.depth > r.depth;
  });
  if (out.size() < 2) {
    Fail(ErrorKind::kValleyDetection,
         "found " + std::to_string(out.size()) + " valley candidates, need 2");
  }
  return out;
}

ValleyPair select_valley_pair(const std::vector<ValleyCandidate>& candidates) {
  if (candidates.size() < 2) {
    Fail(ErrorKind::kValleyDetection, "need at least two valley candidates");
  }
  const double min_span = 0.5 * candidates.front().span;
  std::vector<Point2d> chosen;
  for (const ValleyCandidate& c : candidates) {
    if (c.span > min_span || &c == &candidates.front()) chosen.push_back(c.point);
    if (chosen.size() == 2) break;
  }
  if (chosen.size() < 2) {
    Fail(ErrorKind::kValleyDetection, "no second valley with a comparable span");
  }
  if (chosen[1].x < chosen[0].x) std::swap(chosen[0], chosen[1]);
  return {chosen[0], chosen[1]};
}

RoiResult extract_roi(const GrayImage& img, const BinaryMask& mask, Point2d left,
                      Point2d right, RoiAnchor anchor) {
  auto inside = [&](Point2d p) {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= img.width() - 1 && p.y <= img.height() - 1;
  };
  if (!(left.x < right.x)) Fail(ErrorKind::kGeometry, "left valley must lie left of the right valley");
  if (!inside(left) || !inside(right)) Fail(ErrorKind::kGeometry, "valley point outside the image");
  if (mask.width() != img.width() || mask.height() != img.height()) {
    Fail(ErrorKind::kGeometry, "mask and image dimensions differ");
  }

  RoiGeometry geo;
  const Point2d mid{0.5 * (left.x + right.x), 0.5 * (left.y + right.y)};
  geo.rotation = -std::atan2(right.y - left.y, right.x - left.x);
  geo.left_valley = rotate_point(left, geo.rotation, mid);
  geo.right_valley = rotate_point(right, geo.rotation, mid);
  geo.unit_d = distance(geo.left_valley, geo.right_valley);
  if (geo.unit_d < 16.0) Fail(ErrorKind::kGeometry, "valley distance below 16 px");

  geo.side = 2 * static_cast<int>(std::lround(geo.unit_d));
  geo.crop_x = static_cast<int>(std::lround(mid.x - 0.5 * geo.side));
  geo.crop_y = anchor == RoiAnchor::kTop
                   ? static_cast<int>(std::lround(mid.y))
                   : static_cast<int>(std::lround(mid.y - 0.5 * geo.side));

  const GrayImage rotated = geo.rotation == 0.0 ? img : rotate_about(img, geo.rotation, mid);
  const BinaryMask rotated_mask = geo.rotation == 0.0 ? mask : rotate_about(mask, geo.rotation, mid);

  RoiResult out{GrayImage(geo.side, geo.side), BinaryMask(geo.side, geo.side), geo};
  for (int y = 0; y < geo.side; ++y) {
    const int sy = geo.crop_y + y;
    for (int x = 0; x < geo.side; ++x) {
      const int sx = geo.crop_x + x;
      if (sx < 0 || sy < 0 || sx >= img.width() || sy >= img.height()) continue;
      out.image.at(x, y) = rotated.at(sx, sy);
      out.mask.set(x, y, rotated_mask.at(sx, sy));
    }
  }
  return out;
}

std::optional<ValleyPair> read_valley_annotation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    const auto& l = j.at("left");
    const auto& r = j.at("right");
    return ValleyPair{{l.at(0).get<double>(), l.at(1).get<double>()},
                      {r.at(0).get<double>(), r.at(1).get<double>()}};
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kIo, "malformed valley annotation " + path.string() + ": " + e.what());
  }
}

void write_valley_annotation(const std::filesystem::path& path, const ValleyPair& pair) {
  const nlohmann::json j = {{"left", {pair.left.x, pair.left.y}},
                            {"right", {pair.right.x, pair.right.y}}};
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump() << '\n';
}

}  // namespace veinmatch
