#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "veinmatch/image.hpp"

namespace veinmatch {

// Closed boundary of 8-connected pixel coordinates.
struct Contour {
  std::vector<Point2i> points;
};

// Twice the signed shoelace area of a closed polygon in raw pixel
// coordinates. Contours and hulls produced here are positive, i.e.
// counter-clockwise when the coordinates are read as a y-up Cartesian frame.
double signed_area2(const std::vector<Point2i>& pts);

// Border following on the largest 8-connected component. Throws
// kSegmentation when no component reaches `min_area` pixels.
Contour trace_outer_contour(const BinaryMask& mask, std::size_t min_area = 64);

// Sorted-point convex hull (Sklansky-style scan). Output vertices are a
// subset of the input, collinear edge points dropped.
Contour convex_hull(const Contour& contour);

struct ValleyCandidate {
  Point2d point;
  double depth = 0.0;   // perpendicular distance to the bridging hull edge
  double span = 0.0;    // length of that hull edge
  Point2d hull_start;
  Point2d hull_end;
};

// Convexity-defect analysis: for every hull edge the contour point of
// maximum depth. Defects shallower than `min_depth_fraction` of the hull
// perimeter are discarded; the rest are returned deepest first.
std::vector<ValleyCandidate> detect_valley_points(const Contour& contour,
                                                  const Contour& hull,
                                                  double min_depth_fraction = 0.05);

struct ValleyPair {
  Point2d left;
  Point2d right;
};

// Picks the two deepest candidates whose hull span exceeds half the span of
// the deepest defect; the one with the smaller x is the left valley.
ValleyPair select_valley_pair(const std::vector<ValleyCandidate>& candidates);

enum class RoiAnchor { kTop, kCenter };

struct RoiGeometry {
  Point2d left_valley;
  Point2d right_valley;
  double rotation = 0.0;  // radians applied to bring the valleys level
  double unit_d = 0.0;    // valley distance D after rotation
  int crop_x = 0;         // top-left of the crop in the rotated frame
  int crop_y = 0;
  int side = 0;
};

struct RoiResult {
  GrayImage image;
  BinaryMask mask;
  RoiGeometry geometry;
};

RoiResult extract_roi(const GrayImage& img, const BinaryMask& mask, Point2d left,
                      Point2d right, RoiAnchor anchor = RoiAnchor::kTop);

// Sidecar annotation `{"left": [x, y], "right": [x, y]}`.
std::optional<ValleyPair> read_valley_annotation(const std::filesystem::path& path);
void write_valley_annotation(const std::filesystem::path& path, const ValleyPair& pair);

}  // namespace veinmatch
