#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "veinmatch/sift.hpp"

namespace veinmatch {

// One correspondence; query is image P, gallery is image G.
struct MatchPair {
  std::size_t query_idx = 0;
  std::size_t gallery_idx = 0;
  double distance = 0.0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchSet {
  std::vector<MatchPair> pairs;
  std::string query_id;
  std::string gallery_id;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
};

// Euclidean distance between two descriptors, accumulated in double.
double descriptor_distance(const Descriptor& a, const Descriptor& b);

// Nearest gallery descriptor per query keypoint; ties go to the lowest
// gallery index. Pairs farther than max_distance are dropped.
MatchSet match_closest_ed(const FeatureSet& query, const FeatureSet& gallery,
                          std::optional<double> max_distance = std::nullopt);

// k=2 nearest neighbours with the ratio test d1 / d2 < ratio (strict).
MatchSet match_knn_ratio(const FeatureSet& query, const FeatureSet& gallery, double ratio = 0.7);

// Mutual nearest neighbours: the forward match of q is g and the backward
// match of g is q.
MatchSet match_bidirectional(const FeatureSet& query, const FeatureSet& gallery,
                             std::optional<double> max_distance = std::nullopt);

nlohmann::json match_set_to_json(const MatchSet& m);

}  // namespace veinmatch
