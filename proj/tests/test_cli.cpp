#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "support.hpp"
#include "veinmatch/cli.hpp"
#include "veinmatch/feature_io.hpp"
#include "veinmatch/image_io.hpp"
#include "veinmatch/synthbench.hpp"

using namespace veinmatch;
using nlohmann::json;

namespace {

struct Run {
  int status = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "veinmatch");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

const std::filesystem::path kData = VEINMATCH_TEST_DATA;

bool update_golden() { return std::getenv("VEINMATCH_UPDATE_GOLDEN") != nullptr; }

// Probe and gallery features of one texture; the gallery copy is rotated
// by 4 degrees and shifted.
void write_golden_inputs() {
  GrayImage a(200, 200, 0.5);
  const GrayImage tex = testing::blob_texture(160, 160, 2024, 140);
  for (int y = 0; y < 160; ++y)
    for (int x = 0; x < 160; ++x) a.at(x + 20, y + 20) = tex.at(x, y);
  const GrayImage turned = rotate_about(a, 4.0 * std::numbers::pi / 180.0, {100.0, 100.0});
  GrayImage b(200, 200, 0.5);
  for (int y = 0; y < 200; ++y)
    for (int x = 0; x < 200; ++x) {
      const int sx = x - 6, sy = y - 3;
      if (sx >= 0 && sy >= 0 && sx < 200 && sy < 200 && turned.at(sx, sy) > 0.0) b.at(x, y) = turned.at(sx, sy);
    }
  std::filesystem::create_directories(kData);
  write_image(kData / "texture_probe.png", a);
  write_image(kData / "texture_gallery.png", b);
  std::ofstream(kData / "texture_config.json")
      << R"({"roi": {"enabled": false, "resize": 1.0}, "enhancement": {"enabled": false}})" << '\n';
  for (const char* side : {"probe", "gallery"}) {
    const std::string img = (kData / (std::string("texture_") + side + ".png")).string();
    const std::string feat = (kData / (std::string("texture_") + side + ".json")).string();
    REQUIRE(run({"extract", "--in", img, "--out", feat, "--config", (kData / "texture_config.json").string()})
                .status == 0);
  }
}

json without_volatile(json j) {
  j.erase("version");
  j.erase("viz");
  return j;
}

bool has_colour(const RgbImage& img, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* p = img.px(x, y);
      if (p[0] == r && p[1] == g && p[2] == b) return true;
    }
  return false;
}

void write_palm_set(const std::filesystem::path& dir, int subjects, int samples) {
  std::filesystem::create_directories(dir);
  for (int s = 1; s <= subjects; ++s) {
    for (int k = 1; k <= samples; ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "%03d_l_850_%02d.png", s, k);
      write_image(dir / name, render_palm(500 + s, k).image);
    }
  }
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).status == kExitUsage);
  CHECK(run({"frobnicate"}).status == kExitUsage);
  CHECK(run({"sweep", "--no-such-flag"}).status == kExitUsage);
  CHECK(run({"extract", "--out", "x.vmfs"}).status == kExitUsage);
  CHECK(run({"extract", "--in", "/definitely/missing.png", "--out", "x.vmfs"}).status == kExitUsage);
  CHECK(run({"evaluate", "--manifest", "a.csv", "--dir", "."}).status == kExitUsage);
  const Run r = run({"sweep", "--seeds", "many"});
  CHECK(r.status == kExitUsage);
  CHECK(r.out.empty());
  CHECK(!r.err.empty());
}

TEST_CASE("help and version") {
  const Run h = run({"--help"});
  CHECK(h.status == kExitOk);
  CHECK(h.out.find("evaluate") != std::string::npos);
  const Run v = run({"--version"});
  CHECK(v.status == kExitOk);
  CHECK(v.out == std::string(toolkit_version()) + "\n");
}

TEST_CASE("extract writes a feature file") {
  testing::TempDir dir("cli-extract");
  write_image(dir / "palm.png", render_palm(3, 1).image);
  std::ofstream(dir / "cfg.json") << R"({"sift": {"edge_ratio": 10}})";
  const Run r = run({"extract", "--in", (dir / "palm.png").string(), "--config", (dir / "cfg.json").string(),
                     "--out", (dir / "palm.vmfs").string(), "--report", (dir / "palm.report.json").string()});
  REQUIRE(r.status == kExitOk);
  const FeatureSet fs = read_vmfs(dir / "palm.vmfs");
  CHECK(fs.size() > 0);
  const json report = json::parse(r.out);
  CHECK(report.at("keypoints") == fs.size());
  CHECK(report.at("config").at("roi").at("resize") == 0.6);
  CHECK(json::parse(testing::read_file(dir / "palm.report.json")) == report);
}

TEST_CASE("domain errors exit with 1") {
  testing::TempDir dir("cli-errors");
  std::ofstream(dir / "junk.png") << "not an image";
  CHECK(run({"extract", "--in", (dir / "junk.png").string(), "--out", (dir / "o.vmfs").string()}).status ==
        kExitDomainError);

  write_image(dir / "001_l_850_01.png", render_palm(1, 1).image);
  std::ofstream(dir / "m.csv") << "path,subject,hand,sample\n001_l_850_01.png,001,l,1\n";
  const Run e = run({"evaluate", "--manifest", (dir / "m.csv").string(), "--report", (dir / "r.json").string()});
  CHECK(e.status == kExitDomainError);
  CHECK(e.err.find("protocol") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "r.json"));

  std::ofstream(dir / "bad.json") << R"({"matcher": {"kind": "flann"}})";
  CHECK(run({"sweep", "--seeds", "0"}).status == kExitDomainError);
  CHECK(run({"extract", "--in", (dir / "001_l_850_01.png").string(), "--out", (dir / "o.vmfs").string(),
             "--config", (dir / "bad.json").string()})
            .status == kExitDomainError);
}

TEST_CASE("match decision and overlay against golden files") {
  if (update_golden()) write_golden_inputs();
  const std::string probe = (kData / "texture_probe.json").string();
  const std::string gallery = (kData / "texture_gallery.json").string();
  REQUIRE(std::filesystem::exists(probe));
  testing::TempDir dir("cli-match");
  const std::string viz = (dir / "overlay.png").string();
  const Run r = run({"match", "--probe", probe, "--gallery", gallery, "--filter", "mmd", "--viz", viz});
  REQUIRE(r.status == kExitOk);
  const json decision = json::parse(r.out);
  CHECK(decision.at("matches").get<int>() > 0);
  CHECK(decision.at("decision").at("image_accepted") == true);
  const int survivors = decision.at("survivors").get<int>();
  CHECK(survivors > 0);
  CHECK(survivors < decision.at("matches").get<int>());

  const RgbImage overlay = read_png_rgb(viz);
  CHECK(has_colour(overlay, 0, 200, 0));
  CHECK(has_colour(overlay, 220, 0, 0));

  if (update_golden()) {
    std::ofstream(kData / "golden_match.json") << without_volatile(decision).dump(2) << '\n';
    write_png(kData / "golden_overlay.png", overlay);
  }
  const json golden = json::parse(testing::read_file(kData / "golden_match.json"));
  CHECK(without_volatile(decision) == golden);
  const RgbImage expected = read_png_rgb(kData / "golden_overlay.png");
  CHECK(overlay.width == expected.width);
  CHECK(overlay.height == expected.height);
  CHECK(overlay.data == expected.data);

  // Same inputs, same bytes.
  const Run again = run({"match", "--probe", probe, "--gallery", gallery, "--filter", "mmd", "--viz", viz});
  CHECK(again.out == r.out);

  // Without the filter every line is accepted.
  const Run none = run({"match", "--probe", probe, "--gallery", gallery, "--filter", "none", "--viz", viz});
  REQUIRE(none.status == kExitOk);
  CHECK_FALSE(has_colour(read_png_rgb(viz), 220, 0, 0));
}

TEST_CASE("flags override the config file which overrides defaults") {
  testing::TempDir dir("cli-precedence");
  std::ofstream(dir / "cfg.json") << R"({"filter": {"t_mu": 12, "t_d": 14}, "matcher": {"ratio": 0.75}})";
  const Run r = run({"match", "--probe", (kData / "texture_probe.json").string(), "--gallery",
                     (kData / "texture_gallery.json").string(), "--config", (dir / "cfg.json").string(),
                     "--t-mu", "20"});
  REQUIRE(r.status == kExitOk);
  const json cfg = json::parse(r.out).at("config");
  CHECK(cfg.at("filter").at("t_mu") == 20.0);
  CHECK(cfg.at("filter").at("t_d") == 14.0);
  CHECK(cfg.at("matcher").at("ratio") == 0.75);
  CHECK(cfg.at("enhancement").at("tile_size") == 16);
}

TEST_CASE("viz draws over the processed images") {
  testing::TempDir dir("cli-viz");
  write_image(dir / "a.png", render_palm(8, 1).image);
  write_image(dir / "b.png", render_palm(8, 2).image);
  const Run r = run({"viz", "--probe", (dir / "a.png").string(), "--gallery", (dir / "b.png").string(), "--out",
                     (dir / "o.png").string()});
  REQUIRE(r.status == kExitOk);
  const RgbImage img = read_png_rgb(dir / "o.png");
  CHECK(img.width > img.height);
}

TEST_CASE("enroll and evaluate on a small synthetic set") {
  testing::TempDir dir("cli-eval");
  write_palm_set(dir / "imgs", 5, 3);
  const Run en = run({"enroll", "--dir", (dir / "imgs").string(), "--template-size", "2", "--out-dir",
                      (dir / "tpl").string()});
  REQUIRE(en.status == kExitOk);
  CHECK(std::filesystem::exists(dir / "tpl" / "001_l" / "001_l_1.vmfs"));
  CHECK(std::filesystem::exists(dir / "tpl" / "005_l" / "005_l_2.vmfs"));
  CHECK_FALSE(std::filesystem::exists(dir / "tpl" / "001_l" / "001_l_3.vmfs"));
  CHECK(json::parse(testing::read_file(dir / "tpl" / "enrollment.json")).at("templates").size() == 5);
  CHECK(run({"enroll", "--dir", (dir / "imgs").string(), "--identity", "009_r", "--out-dir",
             (dir / "tpl2").string()})
            .status == kExitDomainError);

  const std::vector<std::string> eval_args = {"evaluate", "--dir", (dir / "imgs").string(), "--partition", "all",
                                              "--scores", (dir / "s.csv").string()};
  auto with_report = [&](const std::string& name) {
    auto a = eval_args;
    a.push_back("--report");
    a.push_back((dir / name).string());
    return a;
  };
  const Run a = run(with_report("r1.json"));
  REQUIRE(a.status == kExitOk);
  const json summary = json::parse(a.out);
  CHECK(summary.at("genuine") == 10);
  CHECK(summary.at("impostor") == 40);
  const json report = json::parse(testing::read_file(dir / "r1.json"));
  CHECK(report.at("eer") == summary.at("eer"));
  CHECK(report.at("config").at("filter").at("kind") == "mmd");
  CHECK(report.contains("far_curve"));
  CHECK(testing::read_file(dir / "s.csv").rfind("probe,gallery,genuine,score\n", 0) == 0);

  setenv("VEINMATCH_THREADS", "3", 1);
  const Run b = run(with_report("r2.json"));
  unsetenv("VEINMATCH_THREADS");
  REQUIRE(b.status == kExitOk);
  CHECK(testing::read_file(dir / "r1.json") == testing::read_file(dir / "r2.json"));
}

TEST_CASE("sweep writes CSV and plot") {
  testing::TempDir dir("cli-sweep");
  const Run r = run({"sweep", "--seeds", "4", "--out", (dir / "s.csv").string(), "--plot",
                     (dir / "s.svg").string()});
  REQUIRE(r.status == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j.at("rows") == 4 * 5 * 6);
  CHECK(j.at("survivor_monotonicity_violations") == 0);
  CHECK(j.at("recall_rotation_violations") == 0);
  CHECK(j.at("recall_restore_violations") == 0);
  CHECK(testing::read_file(dir / "s.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("the installed binary reports exit codes") {
  const std::string cli = VEINMATCH_CLI_PATH;
  CHECK(testing::run_command(cli + " --version > /dev/null") == 0);
  CHECK(testing::run_command(cli + " bogus 2> /dev/null") == 2);
  CHECK(testing::run_command(cli + " sweep --seeds 0 2> /dev/null > /dev/null") == 1);
}
