#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "veinmatch/image.hpp"

namespace veinmatch {

struct SiftParams {
  int n_octaves = 0;  // 0: keep halving while min dimension >= 16
  int scales_per_octave = 3;
  double sigma0 = 1.6;
  double input_sigma = 0.5;  // blur assumed present in the input
  double contrast_threshold = 0.03;
  double edge_ratio = 10.0;
  bool double_input = false;
  bool mask_filtering = true;
  int max_interpolation_steps = 5;
  int orientation_bins = 36;
  double orientation_peak_ratio = 0.8;
  double descriptor_clamp = 0.2;

  void validate() const;
};

struct Keypoint {
  float x = 0.0f;  // original-image pixel coordinates
  float y = 0.0f;
  float scale = 0.0f;        // sigma in original-image pixels
  float orientation = 0.0f;  // radians in [-pi, pi)
  float response = 0.0f;     // interpolated DoG value at the extremum
  // Pyramid provenance; not persisted.
  int octave = 0;
  int layer = 0;
  int cell_x = 0;  // integer sample the refinement converged at
  int cell_y = 0;
  float octave_x = 0.0f;  // sub-pixel location inside the octave
  float octave_y = 0.0f;
  float octave_scale = 0.0f;  // sigma relative to the octave
};

inline constexpr std::size_t kDescriptorSize = 128;
using Descriptor = std::array<float, kDescriptorSize>;

struct FeatureSet {
  std::vector<Keypoint> keypoints;
  std::vector<Descriptor> descriptors;
  std::string source_id;

  std::size_t size() const noexcept { return keypoints.size(); }
  bool empty() const noexcept { return keypoints.empty(); }
};

struct Octave {
  std::vector<GrayImage> gaussians;  // scales_per_octave + 3
  std::vector<Plane> dogs;           // scales_per_octave + 2
  double pixel_scale = 1.0;          // octave pixel size in input pixels
};

struct ScaleSpace {
  std::vector<Octave> octaves;
  SiftParams params;
  int input_width = 0;
  int input_height = 0;
};

ScaleSpace build_dog_scale_space(const GrayImage& img, const SiftParams& params);

// Scale-space extrema that survive sub-pixel refinement plus the contrast
// and edge-response tests. Orientation is left at 0.
std::vector<Keypoint> detect_keypoints(const ScaleSpace& space);

// Assigns orientations (one keypoint per dominant peak) and builds the
// 128-d descriptors. With mask_filtering on, keypoints whose rounded
// position is outside `mask` are dropped.
FeatureSet describe_keypoints(const ScaleSpace& space, const std::vector<Keypoint>& keypoints,
                              const BinaryMask* mask = nullptr);

// Descriptor for a keypoint whose orientation is already fixed.
Descriptor compute_descriptor(const ScaleSpace& space, const Keypoint& kp);

// Dominant orientations of the local gradient histogram.
std::vector<float> keypoint_orientations(const ScaleSpace& space, const Keypoint& kp);

Descriptor root_sift(const Descriptor& d);
void apply_root_sift(FeatureSet& features);

FeatureSet extract_sift(const GrayImage& img, const SiftParams& params,
                        const BinaryMask* mask = nullptr, std::string source_id = {});

// Contrast and edge tests re-evaluated at the keypoint's refined pyramid
// position, for post-hoc verification.
struct KeypointChecks {
  double contrast = 0.0;     // |interpolated DoG|
  double edge_score = 0.0;   // Tr(H)^2 / Det(H)
  double edge_limit = 0.0;   // (r + 1)^2 / r
  bool det_positive = false;
};
KeypointChecks check_keypoint(const ScaleSpace& space, const Keypoint& kp);

}  // namespace veinmatch
