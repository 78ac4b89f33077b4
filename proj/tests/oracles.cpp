#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace testing {

using veinmatch::FeatureSet;
using veinmatch::MatchPair;

double oracle_distance(const veinmatch::Descriptor& a, const veinmatch::Descriptor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

std::vector<MatchPair> closest_all(const FeatureSet& q, const FeatureSet& g) {
  std::vector<MatchPair> out;
  if (q.empty() || g.empty()) return out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    MatchPair best{i, 0, oracle_distance(q.descriptors[i], g.descriptors[0])};
    for (std::size_t j = 1; j < g.size(); ++j) {
      const double d = oracle_distance(q.descriptors[i], g.descriptors[j]);
      if (d < best.distance) best = {i, j, d};
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace

std::vector<MatchPair> oracle_closest(const FeatureSet& q, const FeatureSet& g,
                                      std::optional<double> max_distance) {
  std::vector<MatchPair> out;
  for (const MatchPair& p : closest_all(q, g)) {
    if (!max_distance || p.distance <= *max_distance) out.push_back(p);
  }
  return out;
}

std::vector<MatchPair> oracle_knn_ratio(const FeatureSet& q, const FeatureSet& g, double ratio) {
  std::vector<MatchPair> out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < g.size(); ++j) {
      all.emplace_back(oracle_distance(q.descriptors[i], g.descriptors[j]), j);
    }
    std::sort(all.begin(), all.end());
    if (all.size() < 2) continue;
    const double d1 = all[0].first;
    const double d2 = all[1].first;
    if (d2 > 0.0 && d1 / d2 < ratio) out.push_back({i, all[0].second, d1});
  }
  return out;
}

std::vector<MatchPair> oracle_mutual(const FeatureSet& q, const FeatureSet& g,
                                     std::optional<double> max_distance) {
  std::vector<MatchPair> out;
  const std::vector<MatchPair> fwd = closest_all(q, g);
  const std::vector<MatchPair> bwd = closest_all(g, q);
  for (const MatchPair& p : fwd) {
    if (bwd[p.gallery_idx].gallery_idx != p.query_idx) continue;
    if (max_distance && p.distance > *max_distance) continue;
    out.push_back(p);
  }
  return out;
}

OracleEer oracle_eer(const std::vector<double>& genuine, const std::vector<double>& impostor) {
  std::set<double> distinct(genuine.begin(), genuine.end());
  distinct.insert(impostor.begin(), impostor.end());
  std::vector<double> ts(distinct.begin(), distinct.end());
  ts.push_back(ts.back() + 1.0);

  std::vector<double> far, frr;
  for (double t : ts) {
    std::size_t fa = 0, fr = 0;
    for (double s : impostor) fa += s >= t ? 1 : 0;
    for (double s : genuine) fr += s < t ? 1 : 0;
    far.push_back(static_cast<double>(fa) / static_cast<double>(impostor.size()));
    frr.push_back(static_cast<double>(fr) / static_cast<double>(genuine.size()));
  }
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (frr[k] < far[k]) continue;
    if (frr[k] == far[k] || k == 0) return {far[k], ts[k]};
    const double before = far[k - 1] - frr[k - 1];
    const double after = frr[k] - far[k];
    const double w = before / (before + after);
    return {far[k - 1] + w * (far[k] - far[k - 1]), ts[k - 1] + w * (ts[k] - ts[k - 1])};
  }
  return {0.0, ts.back()};
}

std::vector<veinmatch::ScoreRecord> make_records(const std::vector<double>& genuine,
                                                 const std::vector<double>& impostor) {
  std::vector<veinmatch::ScoreRecord> out;
  for (std::size_t i = 0; i < genuine.size(); ++i) {
    out.push_back({"g" + std::to_string(i), "x", genuine[i], true});
  }
  for (std::size_t i = 0; i < impostor.size(); ++i) {
    out.push_back({"i" + std::to_string(i), "y", impostor[i], false});
  }
  return out;
}

std::vector<std::size_t> oracle_ransac_inliers(const veinmatch::MatchSet& m,
                                               std::span<const veinmatch::Point2d> q,
                                               std::span<const veinmatch::Point2d> g,
                                               double tolerance) {
  std::vector<std::size_t> best;
  const auto& p = m.pairs;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      // Similarity as a complex-number ratio: (g2 - g1) / (q2 - q1).
      const double qx = q[p[j].query_idx].x - q[p[i].query_idx].x;
      const double qy = q[p[j].query_idx].y - q[p[i].query_idx].y;
      const double gx = g[p[j].gallery_idx].x - g[p[i].gallery_idx].x;
      const double gy = g[p[j].gallery_idx].y - g[p[i].gallery_idx].y;
      const double den = qx * qx + qy * qy;
      if (den == 0.0) continue;
      const double a = (gx * qx + gy * qy) / den;
      const double b = (gy * qx - gx * qy) / den;
      const veinmatch::Point2d q1 = q[p[i].query_idx];
      const veinmatch::Point2d g1 = g[p[i].gallery_idx];
      std::vector<std::size_t> in;
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double dx = q[p[k].query_idx].x - q1.x;
        const double dy = q[p[k].query_idx].y - q1.y;
        const double px = g1.x + a * dx - b * dy;
        const double py = g1.y + b * dx + a * dy;
        const veinmatch::Point2d t = g[p[k].gallery_idx];
        if (std::hypot(px - t.x, py - t.y) <= tolerance) in.push_back(k);
      }
      if (in.size() > best.size()) best = in;
    }
  }
  return best;
}

PointMatches offsets_fixture(const std::vector<double>& dx, const std::vector<double>& dy) {
  PointMatches f;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const veinmatch::Point2d q{100.0 + 7.0 * static_cast<double>(i), 200.0 - 3.0 * static_cast<double>(i)};
    f.query.push_back(q);
    f.gallery.push_back({q.x + dx[i], q.y + dy[i]});
    f.matches.pairs.push_back({i, i, 0.0});
  }
  return f;
}

PointMatches random_point_matches(veinmatch::SeededRng& rng) {
  PointMatches f;
  const std::size_t n = rng.index(201);
  const std::size_t nq = std::max<std::size_t>(1, n + rng.index(20));
  const std::size_t ng = std::max<std::size_t>(1, n + rng.index(20));
  for (std::size_t i = 0; i < nq; ++i) f.query.push_back({rng.uniform(0, 512), rng.uniform(0, 512)});
  for (std::size_t i = 0; i < ng; ++i) f.gallery.push_back({rng.uniform(0, 512), rng.uniform(0, 512)});
  const int mode = static_cast<int>(rng.index(3));
  const double ox = rng.uniform(-40, 40);
  const double oy = rng.uniform(-40, 40);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t qi = rng.index(nq);
    std::size_t gi = rng.index(ng);
    if (mode > 0 && rng.uniform() < 0.7) {
      // Snap the gallery point near a translated query point; quantize so
      // ties with the mean and median show up.
      gi = qi % ng;
      const double jx = mode == 2 ? std::round(rng.uniform(-4, 4)) : rng.uniform(-4, 4);
      const double jy = mode == 2 ? std::round(rng.uniform(-4, 4)) : rng.uniform(-4, 4);
      f.gallery[gi] = {std::round(f.query[qi].x) + std::round(ox) + jx,
                       std::round(f.query[qi].y) + std::round(oy) + jy};
      f.query[qi] = {std::round(f.query[qi].x), std::round(f.query[qi].y)};
    }
    f.matches.pairs.push_back({qi, gi, rng.uniform()});
  }
  return f;
}

bool same_decision(const veinmatch::MmdDecision& a, const veinmatch::MmdDecision& b) {
  return a.image_accepted == b.image_accepted && a.accepted == b.accepted &&
         a.accepted_positions == b.accepted_positions;
}

}  // namespace testing
