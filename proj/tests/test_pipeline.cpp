#include <doctest.h>

#include <cmath>
#include <fstream>

#include "support.hpp"
#include "veinmatch/error.hpp"
#include "veinmatch/image_io.hpp"
#include "veinmatch/pipeline.hpp"
#include "veinmatch/synthbench.hpp"

using namespace veinmatch;
using nlohmann::json;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("default configuration") {
  const PipelineConfig c;
  CHECK(c.roi.resize == 0.6);
  CHECK(c.enhancement.tile_size == 16);
  CHECK(c.scoring.ratio == 0.7);
  CHECK(c.scoring.matcher == MatcherKind::kKnnRatio);
  CHECK(c.scoring.filter == FilterKind::kMmd);
  CHECK(c.scoring.mmd.t_mu == 25.0);
  CHECK(c.scoring.mmd.t_d == 30.0);
  CHECK(c.protocol.dev_fraction == 0.2);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("configuration JSON round trip") {
  PipelineConfig c;
  c.enhancement.tile_size = 24;
  c.roi.anchor = RoiAnchor::kCenter;
  c.roi.erode_before_resize = false;
  c.roi.fallback = ValleyFallback::kError;
  c.sift.edge_ratio = 8;
  c.root_sift = true;
  c.scoring.matcher = MatcherKind::kBidirectional;
  c.scoring.max_distance = 0.4;
  c.scoring.filter = FilterKind::kRansac;
  c.scoring.ransac.iterations = 123;
  c.scoring.aggregation = Aggregation::kMean;
  c.protocol.template_size = 4;
  c.protocol.seed = 99;
  const json j = config_to_json(c);
  const PipelineConfig back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(back.roi.anchor == RoiAnchor::kCenter);
  CHECK(back.scoring.max_distance == 0.4);
  CHECK(back.protocol.seed == 99);
  CHECK(config_to_json(config_from_json(json::parse(j.dump()))) == j);
}

TEST_CASE("partial documents overlay the base") {
  PipelineConfig base;
  base.scoring.ratio = 0.8;
  const PipelineConfig c = config_from_json(json::parse(R"({"filter": {"t_mu": 12}})"), base);
  CHECK(c.scoring.mmd.t_mu == 12);
  CHECK(c.scoring.mmd.t_d == 30);
  CHECK(c.scoring.ratio == 0.8);
  const PipelineConfig n = config_from_json(json::parse(R"({"matcher": {"kind": "ed", "max_distance": null}})"));
  CHECK(n.scoring.matcher == MatcherKind::kClosestEd);
  CHECK_FALSE(n.scoring.max_distance.has_value());
}

TEST_CASE("configuration errors") {
  for (const char* doc : {R"({"bogus": {}})", R"({"roi": {"resize_factor": 1}})",
                          R"({"matcher": {"kind": "flann"}})", R"({"filter": {"kind": "sgr"}})",
                          R"({"roi": {"anchor": "middle"}})", R"({"protocol": {"aggregation": "median"}})",
                          R"({"filter": {"t_mu": -1}})", R"({"protocol": {"template_size": 6}})",
                          R"({"matcher": {"ratio": 1.5}})", R"({"sift": {"contrast_threshold": 0}})",
                          R"({"roi": {"resize": "big"}})", R"([1, 2])"}) {
    CAPTURE(doc);
    CHECK(kind_of([&] { config_from_json(json::parse(doc)); }) == ErrorKind::kConfig);
  }
  testing::TempDir dir("config");
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(kind_of([&] { load_config(dir / "broken.json"); }) == ErrorKind::kConfig);
  CHECK(kind_of([&] { load_config(dir / "absent.json"); }) == ErrorKind::kIo);
  std::ofstream(dir / "ok.json") << R"({"root_sift": true})";
  CHECK(load_config(dir / "ok.json").root_sift);
}

TEST_CASE("names of matchers and filters") {
  for (MatcherKind k : {MatcherKind::kClosestEd, MatcherKind::kKnnRatio, MatcherKind::kBidirectional}) {
    CHECK(parse_matcher(matcher_name(k)) == k);
  }
  for (FilterKind k : {FilterKind::kNone, FilterKind::kMmd, FilterKind::kRansac}) {
    CHECK(parse_filter(filter_name(k)) == k);
  }
  CHECK(std::string(matcher_name(MatcherKind::kKnnRatio)) == "knn_rt");
  CHECK(std::string(valley_source_name(ValleySource::kFallback)) == "fallback");
}

TEST_CASE("extraction on a synthetic palm") {
  const SyntheticPalm palm = render_palm(1234, 1);
  const PipelineConfig c;
  const Extraction e = extract_features(palm.image, c, std::nullopt, "palm");
  CHECK(e.valley_source == ValleySource::kDetected);
  REQUIRE(e.geometry.has_value());
  CHECK(e.features.source_id == "palm");
  CHECK(e.features.size() >= 5);
  CHECK(e.processed.width() == e.keypoint_mask.width());
  for (const Keypoint& k : e.features.keypoints) {
    CHECK(k.x >= 0);
    CHECK(k.x < e.processed.width());
    CHECK(e.keypoint_mask.test(static_cast<int>(std::lround(k.x)), static_cast<int>(std::lround(k.y))));
  }
  for (double v : e.processed.pixels()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  const Extraction a = extract_features(palm.image, c, palm.valleys);
  CHECK(a.valley_source == ValleySource::kAnnotation);
  CHECK(std::abs(a.processed.width() - e.processed.width()) <= 0.2 * e.processed.width());

  PipelineConfig root = c;
  root.root_sift = true;
  const Extraction r = extract_features(palm.image, root);
  REQUIRE(r.features.size() == e.features.size());
  for (const Descriptor& d : r.features.descriptors) {
    double s = 0;
    for (float v : d) s += static_cast<double>(v) * v;
    CHECK(std::abs(s - 1.0) < 1e-5);
  }
}

TEST_CASE("the two erosion orders give close masks") {
  const SyntheticPalm palm = render_palm(99, 2);
  PipelineConfig before;
  PipelineConfig after;
  after.roi.erode_before_resize = false;
  const Extraction a = extract_features(palm.image, before);
  const Extraction b = extract_features(palm.image, after);
  REQUIRE(a.keypoint_mask.width() == b.keypoint_mask.width());
  int differ = 0, total = 0;
  for (int y = 0; y < a.keypoint_mask.height(); ++y) {
    for (int x = 0; x < a.keypoint_mask.width(); ++x) {
      differ += a.keypoint_mask.test(x, y) != b.keypoint_mask.test(x, y);
      total += a.keypoint_mask.test(x, y);
    }
  }
  CHECK(differ < 0.1 * total);
}

TEST_CASE("images without valleys fall back to the whole frame") {
  GrayImage disc(120, 100, 0.05);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 120; ++x)
      if (std::hypot(x - 60, y - 50) < 40) disc.at(x, y) = 0.8;
  const GrayImage tex = testing::blob_texture(120, 100, 3);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 120; ++x)
      if (disc.at(x, y) > 0.5) disc.at(x, y) = 0.55 + 0.4 * tex.at(x, y);
  PipelineConfig c;
  const Extraction e = extract_features(disc, c);
  CHECK(e.valley_source == ValleySource::kFallback);
  CHECK_FALSE(e.geometry.has_value());
  c.roi.fallback = ValleyFallback::kError;
  CHECK(kind_of([&] { extract_features(disc, c); }) == ErrorKind::kValleyDetection);
}

TEST_CASE("disabling ROI extraction keeps the whole frame") {
  PipelineConfig c;
  c.roi.enabled = false;
  const GrayImage tex = testing::blob_texture(90, 70, 5);
  const Extraction e = extract_features(tex, c);
  CHECK(e.processed.width() == 54);
  CHECK(e.processed.height() == 42);
  CHECK_FALSE(e.geometry.has_value());
  c.enhancement.enabled = false;
  c.roi.resize = 1.0;
  const Extraction raw = extract_features(tex, c);
  CHECK(raw.processed.at(10, 10) == tex.at(10, 10));
}

TEST_CASE("extraction from files reads annotation sidecars") {
  testing::TempDir dir("extract");
  const SyntheticPalm palm = render_palm(7, 3);
  write_image(dir / "001_l_850_01.png", palm.image);
  CHECK(annotation_path_for(dir / "001_l_850_01.png") == dir / "001_l_850_01.valleys.json");
  const PipelineConfig c;
  CHECK(extract_features_from_file(dir / "001_l_850_01.png", c).valley_source == ValleySource::kDetected);
  write_valley_annotation(annotation_path_for(dir / "001_l_850_01.png"), palm.valleys);
  const Extraction e = extract_features_from_file(dir / "001_l_850_01.png", c);
  CHECK(e.valley_source == ValleySource::kAnnotation);
  CHECK(e.features.source_id == "001_l_850_01");
  CHECK(kind_of([&] { extract_features_from_file(dir / "nope.png", c); }) == ErrorKind::kIo);
}

TEST_CASE("extraction is deterministic") {
  const SyntheticPalm palm = render_palm(55, 4);
  const Extraction a = extract_features(palm.image, PipelineConfig{});
  const Extraction b = extract_features(palm.image, PipelineConfig{});
  REQUIRE(a.features.size() == b.features.size());
  for (std::size_t i = 0; i < a.features.size(); ++i) CHECK(a.features.descriptors[i] == b.features.descriptors[i]);
}
