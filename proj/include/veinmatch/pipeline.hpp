#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "veinmatch/evalharness.hpp"
#include "veinmatch/roi.hpp"
#include "veinmatch/sift.hpp"

namespace veinmatch {

enum class ValleyFallback { kError, kFullImage };

struct EnhancementConfig {
  bool enabled = true;
  int tile_size = 16;
  double clip_fraction = 0.98;
};

struct RoiConfig {
  bool enabled = true;
  RoiAnchor anchor = RoiAnchor::kTop;
  int erosion_radius = 8;  // source-resolution pixels; 0 disables
  double resize = 0.6;
  bool erode_before_resize = true;
  double min_defect_depth = 0.05;  // fraction of hull perimeter
  ValleyFallback fallback = ValleyFallback::kFullImage;
};

struct ProtocolConfig {
  int template_size = 1;
  double dev_fraction = 0.2;
  std::uint64_t seed = 0;
};

// Resolved configuration of every stage. JSON layout mirrors the struct:
// sections enhancement, roi, sift, matcher, filter, protocol plus the
// root_sift switch.
struct PipelineConfig {
  EnhancementConfig enhancement;
  RoiConfig roi;
  SiftParams sift;
  bool root_sift = false;
  ScoringPipeline scoring;
  ProtocolConfig protocol;

  void validate() const;
};

nlohmann::json config_to_json(const PipelineConfig& c);
// Overlays `j` onto `base`; unknown sections, keys or kinds are config
// errors.
PipelineConfig config_from_json(const nlohmann::json& j, const PipelineConfig& base = {});
PipelineConfig load_config(const std::filesystem::path& path, const PipelineConfig& base = {});

const char* matcher_name(MatcherKind k);
const char* filter_name(FilterKind k);
MatcherKind parse_matcher(const std::string& s);
FilterKind parse_filter(const std::string& s);

enum class ValleySource { kAnnotation, kDetected, kFallback };
const char* valley_source_name(ValleySource s);

struct Extraction {
  FeatureSet features;
  GrayImage processed;  // image handed to SIFT
  BinaryMask keypoint_mask;
  ValleySource valley_source = ValleySource::kDetected;
  std::optional<RoiGeometry> geometry;
};

// Segmentation, valley detection (or the sidecar annotation), ROI crop,
// mask erosion, resize, contrast enhancement and SIFT.
Extraction extract_features(const GrayImage& img, const PipelineConfig& config,
                            const std::optional<ValleyPair>& annotation = std::nullopt,
                            std::string source_id = {});

// Reads the image and `<stem>.valleys.json` next to it when present.
Extraction extract_features_from_file(const std::filesystem::path& path,
                                      const PipelineConfig& config);

// Annotation sidecar path for an image: `<dir>/<stem>.valleys.json`.
std::filesystem::path annotation_path_for(const std::filesystem::path& image_path);

}  // namespace veinmatch
