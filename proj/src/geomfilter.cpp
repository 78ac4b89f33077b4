#include "veinmatch/geomfilter.hpp"

#include <algorithm>
#include <cmath>

#include "veinmatch/error.hpp"

namespace veinmatch {
namespace {

double lower_median(std::vector<double> v) {
  const std::size_t mid = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

double mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

void check_indices(const MatchSet& matches, std::size_t nq, std::size_t ng) {
  for (const MatchPair& p : matches.pairs) {
    if (p.query_idx >= nq || p.gallery_idx >= ng) {
      Fail(ErrorKind::kConsistency, "match index outside its feature set");
    }
  }
}

}  // namespace

void MmdParams::validate() const {
  if (!(t_mu > 0.0) || !(t_d > 0.0)) Fail(ErrorKind::kParameter, "MMD thresholds must be positive");
}

std::vector<Point2d> keypoint_positions(std::span<const Keypoint> kps) {
  std::vector<Point2d> out;
  out.reserve(kps.size());
  for (const Keypoint& k : kps) out.push_back({k.x, k.y});
  return out;
}

MmdStats mmd_statistics(const MatchSet& matches, std::span<const Point2d> query_points,
                        std::span<const Point2d> gallery_points, bool signed_distances) {
  if (matches.empty()) Fail(ErrorKind::kEmptyInput, "MMD statistics need at least one match");
  check_indices(matches, query_points.size(), gallery_points.size());

  MmdStats s;
  s.d_x.reserve(matches.size());
  s.d_y.reserve(matches.size());
  for (const MatchPair& p : matches.pairs) {
    const Point2d g = gallery_points[p.gallery_idx];
    const Point2d q = query_points[p.query_idx];
    const double dx = g.x - q.x;
    const double dy = g.y - q.y;
    s.d_x.push_back(signed_distances ? dx : std::abs(dx));
    s.d_y.push_back(signed_distances ? dy : std::abs(dy));
  }
  s.mu_x = mean(s.d_x);
  s.mu_y = mean(s.d_y);
  s.med_x = lower_median(s.d_x);
  s.med_y = lower_median(s.d_y);
  for (std::size_t i = 0; i < s.d_x.size(); ++i) {
    if (s.d_x[i] <= s.mu_x && s.d_y[i] <= s.mu_y) ++s.n_low;
    if (s.d_x[i] > s.mu_x && s.d_y[i] > s.mu_y) ++s.n_high;
  }
  return s;
}

MmdStats mmd_statistics(const MatchSet& matches, std::span<const Keypoint> query_kps,
                        std::span<const Keypoint> gallery_kps, bool signed_distances) {
  const auto q = keypoint_positions(query_kps);
  const auto g = keypoint_positions(gallery_kps);
  return mmd_statistics(matches, q, g, signed_distances);
}

MmdDecision mmd_filter(const MatchSet& matches, std::span<const Point2d> query_points,
                       std::span<const Point2d> gallery_points, const MmdParams& params) {
  params.validate();
  MmdDecision out;
  if (matches.empty()) return out;

  out.stats = mmd_statistics(matches, query_points, gallery_points, params.signed_distances);
  const MmdStats& s = out.stats;
  out.image_accepted = s.n_low >= s.n_high || (s.mu_x <= params.t_mu && s.mu_y <= params.t_mu) ||
                       (s.med_x <= s.mu_x && s.med_y <= s.mu_y);
  if (!out.image_accepted) return out;

  auto below = [&](double d, double bound) {
    return params.inclusive_bounds ? d <= bound : d < bound;
  };
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const double dx = s.d_x[i];
    const double dy = s.d_y[i];
    if (below(dx, s.mu_x) && below(dx, params.t_d) && below(dy, s.mu_y) && below(dy, params.t_d)) {
      out.accepted.push_back(matches.pairs[i]);
      out.accepted_positions.push_back(i);
    }
  }
  return out;
}

MmdDecision mmd_filter(const MatchSet& matches, std::span<const Keypoint> query_kps,
                       std::span<const Keypoint> gallery_kps, const MmdParams& params) {
  const auto q = keypoint_positions(query_kps);
  const auto g = keypoint_positions(gallery_kps);
  return mmd_filter(matches, q, g, params);
}

nlohmann::json mmd_decision_to_json(const MmdDecision& d) {
  nlohmann::json survivors = nlohmann::json::array();
  for (const MatchPair& p : d.accepted) survivors.push_back({p.query_idx, p.gallery_idx});
  return {{"image_accepted", d.image_accepted},
          {"survivor_count", d.accepted.size()},
          {"survivors", survivors},
          {"survivor_positions", d.accepted_positions},
          {"stats",
           {{"mu_x", d.stats.mu_x},
            {"mu_y", d.stats.mu_y},
            {"med_x", d.stats.med_x},
            {"med_y", d.stats.med_y},
            {"n_low", d.stats.n_low},
            {"n_high", d.stats.n_high}}}};
}

}  // namespace veinmatch
