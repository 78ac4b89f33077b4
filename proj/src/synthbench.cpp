#include "veinmatch/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>

#include "veinmatch/error.hpp"
#include "veinmatch/parallel.hpp"

namespace veinmatch {

void SceneSpec::validate() const {
  if (n_inliers < 0 || n_outliers < 0) Fail(ErrorKind::kParameter, "point counts must be non-negative");
  if (!(scale >= 0.5 && scale <= 2.0)) Fail(ErrorKind::kParameter, "scale must lie in [0.5, 2]");
  if (!(noise_sigma >= 0.0)) Fail(ErrorKind::kParameter, "noise sigma must be non-negative");
  if (!(frame > 0.0)) Fail(ErrorKind::kParameter, "frame must be positive");
  if (!(inlier_margin >= 0.0 && 2.0 * inlier_margin < frame)) {
    Fail(ErrorKind::kParameter, "inlier margin must lie in [0, frame / 2)");
  }
  if (!std::isfinite(rotation) || !std::isfinite(tx) || !std::isfinite(ty)) {
    Fail(ErrorKind::kParameter, "transform parameters must be finite");
  }
}

GeneratedScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  SeededRng rng(spec.seed);
  const std::size_t total = static_cast<std::size_t>(spec.n_inliers + spec.n_outliers);
  const double c = 0.5 * spec.frame;
  const double cos_r = std::cos(spec.rotation);
  const double sin_r = std::sin(spec.rotation);

  std::vector<Point2d> gallery(total);
  std::vector<Point2d> query_in_order(total);
  for (std::size_t i = 0; i < static_cast<std::size_t>(spec.n_inliers); ++i) {
    const Point2d g{rng.uniform(spec.inlier_margin, spec.frame - spec.inlier_margin),
                    rng.uniform(spec.inlier_margin, spec.frame - spec.inlier_margin)};
    const double nx = rng.normal() * spec.noise_sigma;
    const double ny = rng.normal() * spec.noise_sigma;
    const double dx = g.x - c;
    const double dy = g.y - c;
    gallery[i] = g;
    query_in_order[i] = {c + spec.scale * (cos_r * dx - sin_r * dy) + spec.tx + nx,
                         c + spec.scale * (sin_r * dx + cos_r * dy) + spec.ty + ny};
  }
  for (std::size_t i = spec.n_inliers; i < total; ++i) {
    gallery[i] = {rng.uniform(0.0, spec.frame), rng.uniform(0.0, spec.frame)};
    query_in_order[i] = {rng.uniform(0.0, spec.frame), rng.uniform(0.0, spec.frame)};
  }

  std::vector<std::size_t> slot(total);
  for (std::size_t i = 0; i < total; ++i) slot[i] = i;
  seeded_shuffle(slot, rng);

  GeneratedScene out;
  out.scene.spec = spec;
  out.scene.gallery_points = gallery;
  out.scene.query_points.resize(total);
  for (std::size_t i = 0; i < total; ++i) out.scene.query_points[slot[i]] = query_in_order[i];
  for (std::size_t i = 0; i < static_cast<std::size_t>(spec.n_inliers); ++i) {
    out.scene.true_correspondence.emplace_back(i, slot[i]);
  }

  out.matches.query_id = "scene-query";
  out.matches.gallery_id = "scene-gallery";
  for (std::size_t i = 0; i < total; ++i) {
    const Point2d g = gallery[i];
    const Point2d q = query_in_order[i];
    out.matches.pairs.push_back({slot[i], i, std::hypot(g.x - q.x, g.y - q.y)});
  }
  seeded_shuffle(out.matches.pairs, rng);
  return out;
}

FilterMetrics match_metrics(const std::vector<MatchPair>& pairs, const SyntheticScene& scene,
                            bool image_accepted) {
  std::set<std::pair<std::size_t, std::size_t>> truth(scene.true_correspondence.begin(),
                                                      scene.true_correspondence.end());
  FilterMetrics m;
  m.image_accepted = image_accepted;
  m.survivors = pairs.size();
  for (const MatchPair& p : pairs) {
    if (p.gallery_idx >= scene.gallery_points.size() || p.query_idx >= scene.query_points.size()) {
      Fail(ErrorKind::kConsistency, "survivor index outside the scene");
    }
    if (truth.count({p.gallery_idx, p.query_idx})) ++m.true_survivors;
  }
  if (m.survivors == 0) {
    m.precision = 1.0;
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(m.true_survivors) / static_cast<double>(m.survivors);
  }
  m.recall = truth.empty() ? 0.0
                           : static_cast<double>(m.true_survivors) / static_cast<double>(truth.size());
  return m;
}

FilterMetrics filter_metrics(const MmdDecision& decision, const SyntheticScene& scene) {
  if (decision.accepted.size() > scene.gallery_points.size()) {
    Fail(ErrorKind::kConsistency, "decision has more survivors than the scene has pairs");
  }
  return match_metrics(decision.accepted, scene, decision.image_accepted);
}

SceneSpec sweep_scene(std::uint64_t seed, double rotation_deg) {
  SceneSpec s;
  s.n_inliers = 40;
  s.n_outliers = 20;
  s.noise_sigma = 1.0;
  s.inlier_margin = 64.0;
  s.rotation = rotation_deg * std::numbers::pi / 180.0;
  s.seed = seed;
  return s;
}

std::vector<SweepRow> run_sweep(std::span<const std::uint64_t> seeds,
                                std::span<const double> angles_deg,
                                std::span<const double> thresholds, unsigned threads) {
  const std::size_t per_seed = angles_deg.size() * thresholds.size();
  std::vector<SweepRow> rows(seeds.size() * per_seed);
  parallel_for(seeds.size(), threads, [&](std::size_t si) {
    std::size_t k = si * per_seed;
    for (double angle : angles_deg) {
      const GeneratedScene g = generate_scene(sweep_scene(seeds[si], angle));
      for (double t : thresholds) {
        MmdParams params;
        params.t_mu = t;
        params.t_d = t;
        const MmdDecision d =
            mmd_filter(g.matches, g.scene.query_points, g.scene.gallery_points, params);
        rows[k++] = {seeds[si], angle, t, filter_metrics(d, g.scene)};
      }
    }
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "seed,angle,threshold,precision,recall,survivors,accepted\n";
  for (const SweepRow& r : rows) {
    out << r.seed << ',' << r.angle_deg << ',' << r.threshold << ',' << r.metrics.precision << ','
        << r.metrics.recall << ',' << r.metrics.survivors << ','
        << (r.metrics.image_accepted ? 1 : 0) << '\n';
  }
}

}  // namespace veinmatch
