#include <cmath>

#include "veinmatch/error.hpp"
#include "veinmatch/geomfilter.hpp"
#include "veinmatch/random.hpp"

namespace veinmatch {

void RansacParams::validate() const {
  if (iterations < 1) Fail(ErrorKind::kParameter, "RANSAC needs at least one iteration");
  if (!(inlier_tolerance > 0.0)) Fail(ErrorKind::kParameter, "inlier tolerance must be positive");
}

bool similarity_from_two(Point2d q1, Point2d q2, Point2d g1, Point2d g2, SimilarityTransform& out) {
  const double dqx = q2.x - q1.x;
  const double dqy = q2.y - q1.y;
  const double den = dqx * dqx + dqy * dqy;
  if (den < 1e-12) return false;
  const double dgx = g2.x - g1.x;
  const double dgy = g2.y - g1.y;
  // Complex division (dg / dq).
  out.a = (dgx * dqx + dgy * dqy) / den;
  out.b = (dgy * dqx - dgx * dqy) / den;
  out.tx = g1.x - (out.a * q1.x - out.b * q1.y);
  out.ty = g1.y - (out.b * q1.x + out.a * q1.y);
  return true;
}

RansacResult ransac_filter(const MatchSet& matches, std::span<const Point2d> query_points,
                           std::span<const Point2d> gallery_points, const RansacParams& params) {
  params.validate();
  RansacResult result;
  result.filtered.query_id = matches.query_id;
  result.filtered.gallery_id = matches.gallery_id;
  const std::size_t n = matches.size();
  if (n < 2) {
    result.filtered = matches;
    result.degenerate = true;
    return result;
  }
  for (const MatchPair& p : matches.pairs) {
    if (p.query_idx >= query_points.size() || p.gallery_idx >= gallery_points.size()) {
      Fail(ErrorKind::kConsistency, "match index outside its feature set");
    }
  }

  auto q_of = [&](std::size_t i) { return query_points[matches.pairs[i].query_idx]; };
  auto g_of = [&](std::size_t i) { return gallery_points[matches.pairs[i].gallery_idx]; };
  const double tol2 = params.inlier_tolerance * params.inlier_tolerance;

  std::size_t best_count = 0;
  SimilarityTransform best_model;
  bool have_model = false;
  auto evaluate = [&](std::size_t i, std::size_t j) {
    SimilarityTransform t;
    if (!similarity_from_two(q_of(i), q_of(j), g_of(i), g_of(j), t)) return;
    std::size_t count = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const Point2d m = t.apply(q_of(k));
      const Point2d g = g_of(k);
      const double dx = m.x - g.x;
      const double dy = m.y - g.y;
      if (dx * dx + dy * dy <= tol2) ++count;
    }
    if (!have_model || count > best_count) {
      best_count = count;
      best_model = t;
      have_model = true;
    }
  };

  const std::size_t combos = n * (n - 1) / 2;
  if (combos <= static_cast<std::size_t>(params.iterations)) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) evaluate(i, j);
    }
  } else {
    SeededRng rng(params.seed);
    for (int it = 0; it < params.iterations; ++it) {
      const std::size_t i = rng.index(n);
      std::size_t j = rng.index(n - 1);
      if (j >= i) ++j;
      evaluate(i, j);
    }
  }

  if (!have_model) {
    // Every sample collapsed onto coincident query points.
    result.filtered = matches;
    result.degenerate = true;
    return result;
  }
  result.model = best_model;
  for (std::size_t k = 0; k < n; ++k) {
    const Point2d m = best_model.apply(q_of(k));
    const Point2d g = g_of(k);
    const double dx = m.x - g.x;
    const double dy = m.y - g.y;
    if (dx * dx + dy * dy <= tol2) result.filtered.pairs.push_back(matches.pairs[k]);
  }
  return result;
}

RansacResult ransac_filter(const MatchSet& matches, std::span<const Keypoint> query_kps,
                           std::span<const Keypoint> gallery_kps, const RansacParams& params) {
  const auto q = keypoint_positions(query_kps);
  const auto g = keypoint_positions(gallery_kps);
  return ransac_filter(matches, q, g, params);
}

}  // namespace veinmatch
