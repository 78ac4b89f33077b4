#include "veinmatch/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "veinmatch/error.hpp"
#include "veinmatch/image_io.hpp"

namespace veinmatch {
namespace {

using nlohmann::json;

// Reads known keys out of one config section and rejects the rest.
class Section {
 public:
  Section(const json& root, const std::string& name) : name_(name) {
    if (!root.contains(name)) return;
    node_ = &root.at(name);
    if (!node_->is_object()) Fail(ErrorKind::kConfig, "config section '" + name + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (!node_ || std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : node_->items()) {
      if (!seen_.count(key)) Fail(ErrorKind::kConfig, "unknown config key '" + name_ + "." + key + "'");
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    try {
      out = node_->at(key).get<T>();
    } catch (const json::exception&) {
      Fail(ErrorKind::kConfig, "config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  void get_optional(const std::string& key, std::optional<double>& out) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    const json& v = node_->at(key);
    if (v.is_null()) {
      out.reset();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      Fail(ErrorKind::kConfig, "config key '" + name_ + "." + key + "' must be a number or null");
    }
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> seen_;
};

const char* anchor_name(RoiAnchor a) { return a == RoiAnchor::kTop ? "top" : "center"; }

RoiAnchor parse_anchor(const std::string& s) {
  if (s == "top") return RoiAnchor::kTop;
  if (s == "center") return RoiAnchor::kCenter;
  Fail(ErrorKind::kConfig, "unknown roi anchor '" + s + "'");
}

const char* fallback_name(ValleyFallback f) {
  return f == ValleyFallback::kError ? "error" : "full_image";
}

ValleyFallback parse_fallback(const std::string& s) {
  if (s == "error") return ValleyFallback::kError;
  if (s == "full_image") return ValleyFallback::kFullImage;
  Fail(ErrorKind::kConfig, "unknown valley fallback '" + s + "'");
}

const char* aggregation_name(Aggregation a) {
  switch (a) {
    case Aggregation::kMax: return "max";
    case Aggregation::kSum: return "sum";
    case Aggregation::kMean: return "mean";
  }
  return "max";
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "max") return Aggregation::kMax;
  if (s == "sum") return Aggregation::kSum;
  if (s == "mean") return Aggregation::kMean;
  Fail(ErrorKind::kConfig, "unknown score aggregation '" + s + "'");
}

BinaryMask resize_mask(const BinaryMask& mask, double factor) {
  const GrayImage scaled = resize_bilinear(mask_to_image(mask), factor);
  BinaryMask out(scaled.width(), scaled.height());
  for (int y = 0; y < scaled.height(); ++y) {
    for (int x = 0; x < scaled.width(); ++x) out.set(x, y, scaled.at(x, y) > 0.5);
  }
  return out;
}

BinaryMask erode_if(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  const int limit = std::min(mask.width(), mask.height()) - 1;
  if (limit < 1) return BinaryMask(mask.width(), mask.height());
  return erode(mask, std::min(radius, limit));
}

}  // namespace

const char* matcher_name(MatcherKind k) {
  switch (k) {
    case MatcherKind::kClosestEd: return "ed";
    case MatcherKind::kKnnRatio: return "knn_rt";
    case MatcherKind::kBidirectional: return "bidirectional";
  }
  return "ed";
}

const char* filter_name(FilterKind k) {
  switch (k) {
    case FilterKind::kNone: return "none";
    case FilterKind::kMmd: return "mmd";
    case FilterKind::kRansac: return "ransac";
  }
  return "none";
}

MatcherKind parse_matcher(const std::string& s) {
  if (s == "ed") return MatcherKind::kClosestEd;
  if (s == "knn_rt") return MatcherKind::kKnnRatio;
  if (s == "bidirectional") return MatcherKind::kBidirectional;
  Fail(ErrorKind::kConfig, "unknown matcher kind '" + s + "'");
}

FilterKind parse_filter(const std::string& s) {
  if (s == "none") return FilterKind::kNone;
  if (s == "mmd") return FilterKind::kMmd;
  if (s == "ransac") return FilterKind::kRansac;
  Fail(ErrorKind::kConfig, "unknown filter kind '" + s + "'");
}

const char* valley_source_name(ValleySource s) {
  switch (s) {
    case ValleySource::kAnnotation: return "annotation";
    case ValleySource::kDetected: return "detected";
    case ValleySource::kFallback: return "fallback";
  }
  return "detected";
}

void PipelineConfig::validate() const {
  if (enhancement.tile_size < 4) Fail(ErrorKind::kConfig, "enhancement.tile_size must be >= 4");
  if (!(enhancement.clip_fraction > 0.0 && enhancement.clip_fraction <= 1.0)) {
    Fail(ErrorKind::kConfig, "enhancement.clip_fraction must lie in (0, 1]");
  }
  if (roi.erosion_radius < 0) Fail(ErrorKind::kConfig, "roi.erosion_radius must be >= 0");
  if (!(roi.resize > 0.0 && roi.resize <= 4.0)) Fail(ErrorKind::kConfig, "roi.resize must lie in (0, 4]");
  if (!(roi.min_defect_depth >= 0.0 && roi.min_defect_depth < 1.0)) {
    Fail(ErrorKind::kConfig, "roi.min_defect_depth must lie in [0, 1)");
  }
  try {
    sift.validate();
    scoring.mmd.validate();
    scoring.ransac.validate();
  } catch (const Error& e) {
    Fail(ErrorKind::kConfig, e.what());
  }
  if (scoring.matcher == MatcherKind::kKnnRatio && !(scoring.ratio > 0.0 && scoring.ratio < 1.0)) {
    Fail(ErrorKind::kConfig, "matcher.ratio must lie in (0, 1)");
  }
  if (scoring.max_distance && !(*scoring.max_distance > 0.0)) {
    Fail(ErrorKind::kConfig, "matcher.max_distance must be positive");
  }
  if (protocol.template_size < 1 || protocol.template_size > 5) {
    Fail(ErrorKind::kConfig, "protocol.template_size must lie in [1, 5]");
  }
  if (!(protocol.dev_fraction > 0.0 && protocol.dev_fraction < 1.0)) {
    Fail(ErrorKind::kConfig, "protocol.dev_fraction must lie in (0, 1)");
  }
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["enhancement"] = {{"enabled", c.enhancement.enabled},
                      {"tile_size", c.enhancement.tile_size},
                      {"clip_fraction", c.enhancement.clip_fraction}};
  j["roi"] = {{"enabled", c.roi.enabled},
              {"anchor", anchor_name(c.roi.anchor)},
              {"erosion_radius", c.roi.erosion_radius},
              {"resize", c.roi.resize},
              {"erode_before_resize", c.roi.erode_before_resize},
              {"min_defect_depth", c.roi.min_defect_depth},
              {"fallback", fallback_name(c.roi.fallback)}};
  const SiftParams& s = c.sift;
  j["sift"] = {{"n_octaves", s.n_octaves},
               {"scales_per_octave", s.scales_per_octave},
               {"sigma0", s.sigma0},
               {"input_sigma", s.input_sigma},
               {"contrast_threshold", s.contrast_threshold},
               {"edge_ratio", s.edge_ratio},
               {"double_input", s.double_input},
               {"mask_filtering", s.mask_filtering},
               {"max_interpolation_steps", s.max_interpolation_steps},
               {"orientation_bins", s.orientation_bins},
               {"orientation_peak_ratio", s.orientation_peak_ratio},
               {"descriptor_clamp", s.descriptor_clamp}};
  j["root_sift"] = c.root_sift;
  j["matcher"] = {{"kind", matcher_name(c.scoring.matcher)},
                  {"ratio", c.scoring.ratio},
                  {"max_distance", c.scoring.max_distance ? json(*c.scoring.max_distance) : json()}};
  j["filter"] = {{"kind", filter_name(c.scoring.filter)},
                 {"t_mu", c.scoring.mmd.t_mu},
                 {"t_d", c.scoring.mmd.t_d},
                 {"inclusive_bounds", c.scoring.mmd.inclusive_bounds},
                 {"signed_distances", c.scoring.mmd.signed_distances},
                 {"ransac_iterations", c.scoring.ransac.iterations},
                 {"ransac_tolerance", c.scoring.ransac.inlier_tolerance},
                 {"ransac_seed", c.scoring.ransac.seed}};
  j["protocol"] = {{"template_size", c.protocol.template_size},
                   {"dev_fraction", c.protocol.dev_fraction},
                   {"seed", c.protocol.seed},
                   {"aggregation", aggregation_name(c.scoring.aggregation)}};
  return j;
}

PipelineConfig config_from_json(const json& j, const PipelineConfig& base) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, "config must be a JSON object");
  static const std::set<std::string> kSections = {"enhancement", "roi",    "sift",    "root_sift",
                                                  "matcher",     "filter", "protocol"};
  for (const auto& [key, value] : j.items()) {
    if (!kSections.count(key)) Fail(ErrorKind::kConfig, "unknown config section '" + key + "'");
  }
  PipelineConfig c = base;
  {
    Section s(j, "enhancement");
    s.get("enabled", c.enhancement.enabled);
    s.get("tile_size", c.enhancement.tile_size);
    s.get("clip_fraction", c.enhancement.clip_fraction);
  }
  {
    Section s(j, "roi");
    std::string anchor = anchor_name(c.roi.anchor);
    std::string fallback = fallback_name(c.roi.fallback);
    s.get("enabled", c.roi.enabled);
    s.get("anchor", anchor);
    s.get("erosion_radius", c.roi.erosion_radius);
    s.get("resize", c.roi.resize);
    s.get("erode_before_resize", c.roi.erode_before_resize);
    s.get("min_defect_depth", c.roi.min_defect_depth);
    s.get("fallback", fallback);
    c.roi.anchor = parse_anchor(anchor);
    c.roi.fallback = parse_fallback(fallback);
  }
  {
    Section s(j, "sift");
    SiftParams& p = c.sift;
    s.get("n_octaves", p.n_octaves);
    s.get("scales_per_octave", p.scales_per_octave);
    s.get("sigma0", p.sigma0);
    s.get("input_sigma", p.input_sigma);
    s.get("contrast_threshold", p.contrast_threshold);
    s.get("edge_ratio", p.edge_ratio);
    s.get("double_input", p.double_input);
    s.get("mask_filtering", p.mask_filtering);
    s.get("max_interpolation_steps", p.max_interpolation_steps);
    s.get("orientation_bins", p.orientation_bins);
    s.get("orientation_peak_ratio", p.orientation_peak_ratio);
    s.get("descriptor_clamp", p.descriptor_clamp);
  }
  if (j.contains("root_sift")) {
    if (!j.at("root_sift").is_boolean()) Fail(ErrorKind::kConfig, "root_sift must be a boolean");
    c.root_sift = j.at("root_sift").get<bool>();
  }
  {
    Section s(j, "matcher");
    std::string kind = matcher_name(c.scoring.matcher);
    s.get("kind", kind);
    s.get("ratio", c.scoring.ratio);
    s.get_optional("max_distance", c.scoring.max_distance);
    c.scoring.matcher = parse_matcher(kind);
  }
  {
    Section s(j, "filter");
    std::string kind = filter_name(c.scoring.filter);
    s.get("kind", kind);
    s.get("t_mu", c.scoring.mmd.t_mu);
    s.get("t_d", c.scoring.mmd.t_d);
    s.get("inclusive_bounds", c.scoring.mmd.inclusive_bounds);
    s.get("signed_distances", c.scoring.mmd.signed_distances);
    s.get("ransac_iterations", c.scoring.ransac.iterations);
    s.get("ransac_tolerance", c.scoring.ransac.inlier_tolerance);
    s.get("ransac_seed", c.scoring.ransac.seed);
    c.scoring.filter = parse_filter(kind);
  }
  {
    Section s(j, "protocol");
    std::string aggregation = aggregation_name(c.scoring.aggregation);
    s.get("template_size", c.protocol.template_size);
    s.get("dev_fraction", c.protocol.dev_fraction);
    s.get("seed", c.protocol.seed);
    s.get("aggregation", aggregation);
    c.scoring.aggregation = parse_aggregation(aggregation);
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path, const PipelineConfig& base) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, base);
}

std::filesystem::path annotation_path_for(const std::filesystem::path& image_path) {
  return image_path.parent_path() / (image_path.stem().string() + ".valleys.json");
}

Extraction extract_features(const GrayImage& img, const PipelineConfig& config,
                            const std::optional<ValleyPair>& annotation, std::string source_id) {
  config.validate();
  Extraction out;
  GrayImage work = img;
  BinaryMask mask;

  if (config.roi.enabled) {
    const BinaryMask matte = otsu_threshold(img);
    std::optional<ValleyPair> valleys = annotation;
    if (valleys) {
      out.valley_source = ValleySource::kAnnotation;
    } else {
      try {
        const Contour contour = trace_outer_contour(matte);
        const Contour hull = convex_hull(contour);
        valleys = select_valley_pair(detect_valley_points(contour, hull, config.roi.min_defect_depth));
        out.valley_source = ValleySource::kDetected;
      } catch (const Error& e) {
        if (config.roi.fallback == ValleyFallback::kError) throw;
        if (e.kind() != ErrorKind::kValleyDetection && e.kind() != ErrorKind::kDegenerateGeometry &&
            e.kind() != ErrorKind::kSegmentation) {
          throw;
        }
        out.valley_source = ValleySource::kFallback;
      }
    }
    if (valleys) {
      RoiResult roi = extract_roi(img, matte, valleys->left, valleys->right, config.roi.anchor);
      work = std::move(roi.image);
      mask = std::move(roi.mask);
      out.geometry = roi.geometry;
    } else {
      mask = matte;
    }
  } else {
    mask = BinaryMask(img.width(), img.height(), true);
  }

  const double factor = config.roi.resize;
  if (config.roi.erode_before_resize) {
    mask = erode_if(mask, config.roi.erosion_radius);
  }
  if (factor != 1.0) {
    work = resize_bilinear(work, factor);
    mask = resize_mask(mask, factor);
  }
  if (!config.roi.erode_before_resize) {
    const int r = config.roi.erosion_radius > 0
                      ? std::max(1, static_cast<int>(std::lround(config.roi.erosion_radius * factor)))
                      : 0;
    mask = erode_if(mask, r);
  }
  if (config.enhancement.enabled) {
    work = tile_contrast_enhance(work, config.enhancement.tile_size, config.enhancement.clip_fraction);
  }

  out.features = extract_sift(work, config.sift, &mask, std::move(source_id));
  if (config.root_sift) apply_root_sift(out.features);
  out.processed = std::move(work);
  out.keypoint_mask = std::move(mask);
  return out;
}

Extraction extract_features_from_file(const std::filesystem::path& path,
                                      const PipelineConfig& config) {
  const GrayImage img = read_image(path);
  const std::optional<ValleyPair> annotation = read_valley_annotation(annotation_path_for(path));
  return extract_features(img, config, annotation, path.stem().string());
}

}  // namespace veinmatch
