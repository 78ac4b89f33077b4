#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "veinmatch/geomfilter.hpp"
#include "veinmatch/image.hpp"
#include "veinmatch/matchers.hpp"
#include "veinmatch/random.hpp"
#include "veinmatch/roi.hpp"

namespace veinmatch {

struct SceneSpec {
  int n_inliers = 30;
  int n_outliers = 30;
  double rotation = 0.0;  // radians, about the frame centre
  double scale = 1.0;
  double tx = 0.0;
  double ty = 0.0;
  double noise_sigma = 0.0;  // pixels, per axis
  std::uint64_t seed = 0;
  double frame = 512.0;
  // Inlier gallery points are drawn from [margin, frame - margin]^2;
  // outliers always cover the whole frame.
  double inlier_margin = 0.0;

  void validate() const;
};

struct SyntheticScene {
  SceneSpec spec;
  std::vector<Point2d> gallery_points;
  std::vector<Point2d> query_points;
  // (gallery_idx, query_idx) of every inlier pair.
  std::vector<std::pair<std::size_t, std::size_t>> true_correspondence;
};

struct GeneratedScene {
  SyntheticScene scene;
  MatchSet matches;
};

// Inliers: query = c + s R (g - c) + t + noise, c the frame centre.
// Outliers pair independent uniform points. Query storage and pair order
// are both shuffled by the seed.
GeneratedScene generate_scene(const SceneSpec& spec);

struct FilterMetrics {
  double precision = 1.0;
  double recall = 0.0;
  std::size_t survivors = 0;
  std::size_t true_survivors = 0;
  bool image_accepted = false;
  bool precision_undefined = false;  // no survivors; precision reported as 1
};

FilterMetrics filter_metrics(const MmdDecision& decision, const SyntheticScene& scene);
FilterMetrics match_metrics(const std::vector<MatchPair>& pairs, const SyntheticScene& scene,
                            bool image_accepted = true);

// Straight-line transcription of the MMD decision rule used as a differential
// reference for mmd_filter. Shares no helpers with geomfilter.
MmdDecision mmd_oracle(const MatchSet& matches, std::span<const Point2d> query_points,
                       std::span<const Point2d> gallery_points, const MmdParams& params);

// The scene family used by the threshold and rotation sweeps.
SceneSpec sweep_scene(std::uint64_t seed, double rotation_deg);

inline const std::vector<double> kSweepThresholds = {10, 15, 20, 25, 30, 35};
inline const std::vector<double> kSweepAnglesDeg = {0, 2, 4, 6, 8};

struct SweepRow {
  std::uint64_t seed = 0;
  double angle_deg = 0.0;
  double threshold = 0.0;
  FilterMetrics metrics;
};

// Every (seed, angle, threshold) cell with T_D = T_mu = threshold. Rows are
// ordered by seed, then angle, then threshold regardless of threading.
std::vector<SweepRow> run_sweep(std::span<const std::uint64_t> seeds,
                                std::span<const double> angles_deg,
                                std::span<const double> thresholds, unsigned threads = 1);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// ---------------------------------------------------------------------------
// Synthetic palm images for end-to-end runs.

struct PalmRenderOptions {
  int width = 320;
  int height = 400;
  double max_rotation_deg = 4.0;  // per-sample pose jitter
  double max_shift = 6.0;
  double noise_sigma = 0.01;
  int vein_count = 9;
};

struct SyntheticPalm {
  GrayImage image;
  ValleyPair valleys;  // ground-truth valley points in the rendered image
};

// Identity is fixed by identity_seed (vein layout, finger proportions);
// sample_index perturbs pose, illumination and noise.
SyntheticPalm render_palm(std::uint64_t identity_seed, int sample_index, bool mirror = false,
                          const PalmRenderOptions& options = {});

}  // namespace veinmatch
