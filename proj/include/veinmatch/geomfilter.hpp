#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "veinmatch/image.hpp"
#include "veinmatch/matchers.hpp"
#include "veinmatch/sift.hpp"

namespace veinmatch {

struct MmdParams {
  double t_mu = 25.0;  // maximum mean threshold, pixels
  double t_d = 30.0;   // maximum distance threshold, pixels
  // Per-pair tests use <= instead of < when set.
  bool inclusive_bounds = false;
  // Ablation: keep the sign of X_G - X_P instead of taking |.|.
  bool signed_distances = false;

  void validate() const;
};

struct MmdStats {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double med_x = 0.0;
  double med_y = 0.0;
  std::size_t n_low = 0;   // pairs with d_x <= mu_x and d_y <= mu_y
  std::size_t n_high = 0;  // pairs with d_x > mu_x and d_y > mu_y
  std::vector<double> d_x;
  std::vector<double> d_y;
};

struct MmdDecision {
  bool image_accepted = false;
  std::vector<MatchPair> accepted;
  std::vector<std::size_t> accepted_positions;  // indices into the input pairs
  MmdStats stats;
};

// Point coordinates are looked up by the pair indices: query_points for
// image P, gallery_points for image G.
MmdStats mmd_statistics(const MatchSet& matches, std::span<const Point2d> query_points,
                        std::span<const Point2d> gallery_points, bool signed_distances = false);
MmdStats mmd_statistics(const MatchSet& matches, std::span<const Keypoint> query_kps,
                        std::span<const Keypoint> gallery_kps, bool signed_distances = false);

MmdDecision mmd_filter(const MatchSet& matches, std::span<const Point2d> query_points,
                       std::span<const Point2d> gallery_points, const MmdParams& params);
MmdDecision mmd_filter(const MatchSet& matches, std::span<const Keypoint> query_kps,
                       std::span<const Keypoint> gallery_kps, const MmdParams& params);

nlohmann::json mmd_decision_to_json(const MmdDecision& d);

// x' = a x - b y + tx, y' = b x + a y + ty (rotation + uniform scale +
// translation), mapping query coordinates onto gallery coordinates.
struct SimilarityTransform {
  double a = 1.0;
  double b = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Point2d apply(Point2d p) const { return {a * p.x - b * p.y + tx, b * p.x + a * p.y + ty}; }
};

// Exact similarity through two correspondences; false if the query points
// coincide.
bool similarity_from_two(Point2d q1, Point2d q2, Point2d g1, Point2d g2, SimilarityTransform& out);

struct RansacParams {
  int iterations = 500;
  double inlier_tolerance = 3.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RansacResult {
  MatchSet filtered;
  bool degenerate = false;  // fewer pairs than a minimal sample
  SimilarityTransform model;
};

// When every minimal sample fits in the iteration budget the samples are
// enumerated exhaustively instead of drawn.
RansacResult ransac_filter(const MatchSet& matches, std::span<const Point2d> query_points,
                           std::span<const Point2d> gallery_points, const RansacParams& params);
RansacResult ransac_filter(const MatchSet& matches, std::span<const Keypoint> query_kps,
                           std::span<const Keypoint> gallery_kps, const RansacParams& params);

std::vector<Point2d> keypoint_positions(std::span<const Keypoint> kps);

}  // namespace veinmatch
