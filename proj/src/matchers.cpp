#include "veinmatch/matchers.hpp"

#include <cmath>
#include <limits>

#include "veinmatch/error.hpp"

namespace veinmatch {
namespace {

struct Neighbours {
  std::size_t best = 0;
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = std::numeric_limits<double>::infinity();
};

Neighbours two_nearest(const Descriptor& d, const FeatureSet& set) {
  Neighbours n;
  for (std::size_t j = 0; j < set.descriptors.size(); ++j) {
    const double dist = descriptor_distance(d, set.descriptors[j]);
    if (dist < n.d1) {
      n.d2 = n.d1;
      n.d1 = dist;
      n.best = j;
    } else if (dist < n.d2) {
      n.d2 = dist;
    }
  }
  return n;
}

MatchSet empty_like(const FeatureSet& query, const FeatureSet& gallery) {
  MatchSet m;
  m.query_id = query.source_id;
  m.gallery_id = gallery.source_id;
  return m;
}

}  // namespace

double descriptor_distance(const Descriptor& a, const Descriptor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < kDescriptorSize; ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

MatchSet match_closest_ed(const FeatureSet& query, const FeatureSet& gallery,
                          std::optional<double> max_distance) {
  MatchSet m = empty_like(query, gallery);
  if (gallery.empty()) return m;
  for (std::size_t i = 0; i < query.descriptors.size(); ++i) {
    const Neighbours n = two_nearest(query.descriptors[i], gallery);
    if (max_distance && n.d1 > *max_distance) continue;
    m.pairs.push_back({i, n.best, n.d1});
  }
  return m;
}

MatchSet match_knn_ratio(const FeatureSet& query, const FeatureSet& gallery, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) Fail(ErrorKind::kParameter, "ratio must lie in (0, 1)");
  if (gallery.size() < 2) Fail(ErrorKind::kParameter, "ratio test needs at least two gallery keypoints");
  MatchSet m = empty_like(query, gallery);
  for (std::size_t i = 0; i < query.descriptors.size(); ++i) {
    const Neighbours n = two_nearest(query.descriptors[i], gallery);
    if (n.d2 > 0.0 && n.d1 / n.d2 < ratio) m.pairs.push_back({i, n.best, n.d1});
  }
  return m;
}

MatchSet match_bidirectional(const FeatureSet& query, const FeatureSet& gallery,
                             std::optional<double> max_distance) {
  MatchSet m = empty_like(query, gallery);
  if (query.empty() || gallery.empty()) return m;
  std::vector<std::size_t> backward(gallery.size());
  for (std::size_t j = 0; j < gallery.size(); ++j) {
    backward[j] = two_nearest(gallery.descriptors[j], query).best;
  }
  for (std::size_t i = 0; i < query.size(); ++i) {
    const Neighbours n = two_nearest(query.descriptors[i], gallery);
    if (backward[n.best] != i) continue;
    if (max_distance && n.d1 > *max_distance) continue;
    m.pairs.push_back({i, n.best, n.d1});
  }
  return m;
}

nlohmann::json match_set_to_json(const MatchSet& m) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const MatchPair& p : m.pairs) {
    pairs.push_back({{"query", p.query_idx}, {"gallery", p.gallery_idx}, {"distance", p.distance}});
  }
  return {{"query_id", m.query_id}, {"gallery_id", m.gallery_id}, {"pairs", pairs}};
}

}  // namespace veinmatch
