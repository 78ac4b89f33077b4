#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "support.hpp"
#include "veinmatch/error.hpp"
#include "veinmatch/feature_io.hpp"
#include "veinmatch/matchers.hpp"
#include "veinmatch/sift.hpp"

using namespace veinmatch;

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

double norm(const Descriptor& d) {
  double s = 0;
  for (float v : d) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

GrayImage gaussian_blob(int w, int h, double cx, double cy, double sigma) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.at(x, y) = 0.05 + 0.9 * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * sigma * sigma));
  return img;
}

// Blob texture confined to the centre of a flat canvas, placed at (ox, oy).
GrayImage placed_texture(int canvas, int content, int ox, int oy, std::uint64_t seed) {
  const GrayImage tex = testing::blob_texture(content, content, seed, 70);
  GrayImage img(canvas, canvas, 0.5);
  for (int y = 0; y < content; ++y) {
    for (int x = 0; x < content; ++x) {
      // Fade to the background so the content has no hard border.
      const double fx = std::min({x, content - 1 - x, 12}) / 12.0;
      const double fy = std::min({y, content - 1 - y, 12}) / 12.0;
      img.at(ox + x, oy + y) = 0.5 + fx * fy * (tex.at(x, y) - 0.5);
    }
  }
  return img;
}

}  // namespace

TEST_CASE("scale space structure") {
  const GrayImage img = testing::blob_texture(64, 64, 1);
  const SiftParams p;
  const ScaleSpace s = build_dog_scale_space(img, p);
  REQUIRE(s.octaves.size() == 3);
  const int sizes[3] = {64, 32, 16};
  for (int o = 0; o < 3; ++o) {
    const Octave& oct = s.octaves[o];
    CHECK(oct.gaussians.size() == 6);
    CHECK(oct.dogs.size() == 5);
    CHECK(oct.gaussians[0].width() == sizes[o]);
    CHECK(oct.dogs[0].height() == sizes[o]);
    for (std::size_t i = 0; i < oct.dogs.size(); ++i) {
      for (int y = 0; y < sizes[o]; ++y)
        for (int x = 0; x < sizes[o]; ++x)
          CHECK(oct.dogs[i].at(x, y) == oct.gaussians[i + 1].at(x, y) - oct.gaussians[i].at(x, y));
    }
  }
  // Octave o+1 starts from the image with blur 2 sigma0 of octave o.
  const GrayImage& src = s.octaves[0].gaussians[3];
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) CHECK(s.octaves[1].gaussians[0].at(x, y) == src.at(2 * x, 2 * y));
}

TEST_CASE("octave count can be capped") {
  SiftParams p;
  p.n_octaves = 2;
  CHECK(build_dog_scale_space(GrayImage(128, 128, 0.3), p).octaves.size() == 2);
  p.n_octaves = 0;
  CHECK(build_dog_scale_space(GrayImage(128, 100, 0.3), p).octaves.size() == 3);
}

TEST_CASE("constant images have flat DoG and no keypoints") {
  const ScaleSpace s = build_dog_scale_space(GrayImage(64, 48, 0.42), SiftParams{});
  for (const Octave& o : s.octaves)
    for (const Plane& d : o.dogs)
      for (double v : d.pixels()) CHECK(std::abs(v) < 1e-12);
  CHECK(detect_keypoints(s).empty());
  CHECK(extract_sift(GrayImage(64, 48, 0.42), SiftParams{}).empty());
}

TEST_CASE("SIFT parameter and size errors") {
  CHECK(kind_of([] { build_dog_scale_space(GrayImage(15, 40, 0.1), SiftParams{}); }) == ErrorKind::kParameter);
  SiftParams p;
  p.scales_per_octave = 0;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::kParameter);
  p = {};
  p.edge_ratio = 1.0;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::kParameter);
  p = {};
  p.contrast_threshold = 0.0;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::kParameter);
}

TEST_CASE("a Gaussian blob is found at its centre and scale") {
  const double cx = 40.3, cy = 37.6, sb = 4.0;
  const FeatureSet fs = extract_sift(gaussian_blob(80, 80, cx, cy, sb), SiftParams{});
  bool found = false;
  for (const Keypoint& k : fs.keypoints) {
    if (std::hypot(k.x - cx, k.y - cy) <= 2.0 && k.scale >= sb / 1.5 && k.scale <= sb * 1.5) found = true;
  }
  CHECK(found);
}

TEST_CASE("a step edge produces no keypoints on the edge line") {
  GrayImage img(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 32; x < 64; ++x) img.at(x, y) = 1.0;
  const ScaleSpace s = build_dog_scale_space(img, SiftParams{});
  for (const Keypoint& k : detect_keypoints(s)) CHECK(std::abs(k.x - 31.5) > 4.0);
}

TEST_CASE("descriptors are unit length and keypoints pass their own tests") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const GrayImage img = testing::blob_texture(128, 96, seed);
    const ScaleSpace s = build_dog_scale_space(img, SiftParams{});
    const FeatureSet fs = describe_keypoints(s, detect_keypoints(s));
    REQUIRE(fs.size() > 10);
    CHECK(fs.keypoints.size() == fs.descriptors.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const Keypoint& k = fs.keypoints[i];
      CHECK(std::abs(norm(fs.descriptors[i]) - 1.0) < 1e-5);
      for (float v : fs.descriptors[i]) CHECK(v >= 0.0f);
      CHECK(k.x >= 0.0f);
      CHECK(k.y >= 0.0f);
      CHECK(k.x <= 127.0f);
      CHECK(k.y <= 95.0f);
      CHECK(k.scale > 0.0f);
      CHECK(k.orientation >= -std::numbers::pi_v<float>);
      CHECK(k.orientation < std::numbers::pi_v<float>);
      const KeypointChecks c = check_keypoint(s, k);
      CHECK(c.contrast >= s.params.contrast_threshold);
      CHECK(c.det_positive);
      CHECK(c.edge_score < c.edge_limit);
    }
    for (std::size_t i = 1; i < fs.size(); ++i) {
      const double d = descriptor_distance(fs.descriptors[i - 1], fs.descriptors[i]);
      CHECK(d >= 0.0);
      CHECK(d <= 2.0);
    }
  }
}

TEST_CASE("extraction is deterministic") {
  const GrayImage img = testing::blob_texture(100, 90, 4);
  const FeatureSet a = extract_sift(img, SiftParams{});
  const FeatureSet b = extract_sift(img, SiftParams{});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.keypoints[i].x == b.keypoints[i].x);
    CHECK(a.keypoints[i].y == b.keypoints[i].y);
    CHECK(a.descriptors[i] == b.descriptors[i]);
  }
}

TEST_CASE("a zero-gradient patch gives a zero descriptor") {
  const ScaleSpace s = build_dog_scale_space(GrayImage(64, 64, 0.5), SiftParams{});
  Keypoint k;
  k.x = k.y = 32;
  k.octave_x = k.octave_y = 32;
  k.scale = 2.0f;
  k.octave_scale = 2.0f;
  k.layer = 1;
  const Descriptor d = compute_descriptor(s, k);
  for (float v : d) CHECK(v == 0.0f);
}

TEST_CASE("affine intensity changes leave descriptors unchanged") {
  const GrayImage img = testing::blob_texture(96, 96, 8);
  GrayImage dim(96, 96);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) dim.at(x, y) = 0.5 * img.at(x, y) + 0.25;
  const ScaleSpace a = build_dog_scale_space(img, SiftParams{});
  const ScaleSpace b = build_dog_scale_space(dim, SiftParams{});
  const std::vector<Keypoint> kps = detect_keypoints(a);
  REQUIRE(!kps.empty());
  const FeatureSet fa = describe_keypoints(a, kps);
  const FeatureSet fb = describe_keypoints(b, kps);
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    CHECK(fa.keypoints[i].orientation == doctest::Approx(fb.keypoints[i].orientation).epsilon(1e-4));
    for (std::size_t j = 0; j < kDescriptorSize; ++j) CHECK(std::abs(fa.descriptors[i][j] - fb.descriptors[i][j]) < 1e-3);
  }
}

TEST_CASE("keypoints follow integer translations") {
  const FeatureSet ref = extract_sift(placed_texture(200, 120, 40, 40, 21), SiftParams{});
  REQUIRE(ref.size() > 20);
  for (auto [dx, dy] : {std::pair{8, 8}, std::pair{5, -3}, std::pair{-7, 2}}) {
    const FeatureSet moved = extract_sift(placed_texture(200, 120, 40 + dx, 40 + dy, 21), SiftParams{});
    int safe = 0, good = 0;
    for (const Keypoint& k : ref.keypoints) {
      if (k.x < 16 || k.y < 16 || k.x > 183 || k.y > 183) continue;
      ++safe;
      double best = 1e9;
      for (const Keypoint& m : moved.keypoints) {
        if (std::abs(m.scale / k.scale - 1.0) > 0.2) continue;
        best = std::min(best, static_cast<double>(std::hypot(m.x - (k.x + dx), m.y - (k.y + dy))));
      }
      if (best <= 0.5) ++good;
    }
    REQUIRE(safe > 0);
    CHECK(good >= 0.95 * safe);
    if (dx % 8 == 0 && dy % 8 == 0) CHECK(good == safe);
  }
}

TEST_CASE("descriptors survive a 30 degree rotation") {
  const int n = 221;
  const GrayImage img = placed_texture(n, 160, 30, 30, 33);
  const Point2d c{(n - 1) / 2.0, (n - 1) / 2.0};
  const double a = 30.0 * std::numbers::pi / 180;
  const GrayImage rot = rotate_about(img, a, c);
  const FeatureSet f0 = extract_sift(img, SiftParams{});
  const FeatureSet f1 = extract_sift(rot, SiftParams{});
  // Mutual geometric correspondences: nearest projected position within 2 px.
  auto nearest = [](const FeatureSet& fs, Point2d p, double scale, std::size_t& idx) {
    double best = 1e9;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (std::abs(fs.keypoints[i].scale / scale - 1.0) > 0.25) continue;
      const double d = std::hypot(fs.keypoints[i].x - p.x, fs.keypoints[i].y - p.y);
      if (d < best) { best = d; idx = i; }
    }
    return best;
  };
  int pairs = 0, close = 0;
  for (std::size_t i = 0; i < f0.size(); ++i) {
    const Keypoint& k = f0.keypoints[i];
    const Point2d p = rotate_point({k.x, k.y}, a, c);
    std::size_t j = 0;
    if (nearest(f1, p, k.scale, j) > 2.0) continue;
    const Keypoint& m = f1.keypoints[j];
    std::size_t back = 0;
    nearest(f0, rotate_point({m.x, m.y}, -a, c), m.scale, back);
    if (back != i) continue;
    ++pairs;
    if (descriptor_distance(f0.descriptors[i], f1.descriptors[j]) < 0.6) ++close;
  }
  MESSAGE("rotation pairs " << pairs << ", close " << close);
  REQUIRE(pairs >= 10);
  CHECK(close >= 0.5 * pairs);
}

TEST_CASE("mask filtering drops keypoints outside the mask") {
  const GrayImage img = testing::blob_texture(96, 96, 9);
  const FeatureSet all = extract_sift(img, SiftParams{});
  BinaryMask left(96, 96);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 48; ++x) left.set(x, y, true);
  const FeatureSet masked = extract_sift(img, SiftParams{}, &left);
  CHECK(masked.size() < all.size());
  for (const Keypoint& k : masked.keypoints) CHECK(std::lround(k.x) < 48);
  const BinaryMask none(96, 96);
  CHECK(extract_sift(img, SiftParams{}, &none).empty());
  SiftParams off;
  off.mask_filtering = false;
  CHECK(extract_sift(img, off, &none).size() == all.size());
}

TEST_CASE("RootSIFT examples") {
  Descriptor one{};
  one[17] = 1.0f;
  CHECK(root_sift(one) == one);

  Descriptor uniform;
  uniform.fill(static_cast<float>(1.0 / std::sqrt(128.0)));
  for (float v : root_sift(uniform)) CHECK(v == doctest::Approx(1.0 / std::sqrt(128.0)).epsilon(1e-6));

  Descriptor v{};
  v[0] = 0.8f;
  v[1] = 0.6f;
  const Descriptor r = root_sift(v);
  CHECK(r[0] == doctest::Approx(std::sqrt(0.8 / 1.4)).epsilon(1e-6));
  CHECK(r[1] == doctest::Approx(std::sqrt(0.6 / 1.4)).epsilon(1e-6));
  CHECK(r[0] == doctest::Approx(0.7559).epsilon(1e-4));
  CHECK(r[1] == doctest::Approx(0.6547).epsilon(1e-4));
  CHECK(std::abs(norm(r) - 1.0) < 1e-6);

  const Descriptor zero{};
  CHECK(root_sift(zero) == zero);
}

TEST_CASE("feature files round-trip losslessly") {
  testing::TempDir dir("vmfs");
  const FeatureSet fs = extract_sift(testing::blob_texture(80, 80, 10), SiftParams{}, nullptr, "whatever");
  REQUIRE(!fs.empty());
  write_vmfs(dir / "f.vmfs", fs);
  const FeatureSet back = read_vmfs(dir / "f.vmfs");
  CHECK(back.source_id == "f");
  REQUIRE(back.size() == fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    CHECK(back.keypoints[i].x == fs.keypoints[i].x);
    CHECK(back.keypoints[i].y == fs.keypoints[i].y);
    CHECK(back.keypoints[i].scale == fs.keypoints[i].scale);
    CHECK(back.keypoints[i].orientation == fs.keypoints[i].orientation);
    CHECK(back.descriptors[i] == fs.descriptors[i]);
  }
  const std::string bytes = testing::read_file(dir / "f.vmfs");
  CHECK(bytes.substr(0, 4) == "VMFS");
  CHECK(bytes.size() == 12 + fs.size() * (4 + 128) * 4);

  const FeatureSet j = features_from_json(features_to_json(fs));
  REQUIRE(j.size() == fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    CHECK(j.keypoints[i].x == fs.keypoints[i].x);
    CHECK(j.descriptors[i] == fs.descriptors[i]);
  }

  {
    std::ofstream bad(dir / "bad.vmfs", std::ios::binary);
    bad << "VMFX0000";
  }
  CHECK(kind_of([&] { read_vmfs(dir / "bad.vmfs"); }) == ErrorKind::kIo);
  {
    std::ofstream cut(dir / "cut.vmfs", std::ios::binary);
    cut << bytes.substr(0, bytes.size() - 10);
  }
  CHECK(kind_of([&] { read_vmfs(dir / "cut.vmfs"); }) == ErrorKind::kIo);
}
