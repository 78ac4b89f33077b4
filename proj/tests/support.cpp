#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace testing {

TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  path_ = std::filesystem::temp_directory_path() /
          ("veinmatch_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

veinmatch::GrayImage random_image(int w, int h, veinmatch::SeededRng& rng) {
  veinmatch::GrayImage img(w, h);
  for (double& v : img.pixels()) v = rng.uniform();
  return img;
}

veinmatch::GrayImage blob_texture(int w, int h, std::uint64_t seed, int blobs) {
  veinmatch::SeededRng rng(seed);
  veinmatch::Plane acc(w, h, 0.0);
  for (int b = 0; b < blobs; ++b) {
    const double cx = rng.uniform(0.0, w);
    const double cy = rng.uniform(0.0, h);
    const double s = rng.uniform(2.0, 6.0);
    const double a = rng.uniform(-0.35, 0.35);
    const int r = static_cast<int>(std::ceil(3 * s));
    for (int y = std::max(0, static_cast<int>(cy) - r); y < std::min(h, static_cast<int>(cy) + r + 1); ++y) {
      for (int x = std::max(0, static_cast<int>(cx) - r); x < std::min(w, static_cast<int>(cx) + r + 1); ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        acc.at(x, y) += a * std::exp(-d2 / (2 * s * s));
      }
    }
  }
  veinmatch::GrayImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img.at(x, y) = std::clamp(0.5 + acc.at(x, y), 0.0, 1.0);
  }
  return img;
}

veinmatch::Descriptor random_descriptor(veinmatch::SeededRng& rng) {
  veinmatch::Descriptor d{};
  double n = 0;
  for (float& v : d) {
    v = static_cast<float>(rng.uniform());
    n += static_cast<double>(v) * v;
  }
  n = std::sqrt(n);
  for (float& v : d) v = static_cast<float>(v / n);
  return d;
}

veinmatch::FeatureSet random_features(std::size_t n, veinmatch::SeededRng& rng, double extent) {
  veinmatch::FeatureSet fs;
  for (std::size_t i = 0; i < n; ++i) {
    veinmatch::Keypoint k;
    k.x = static_cast<float>(rng.uniform(0.0, extent));
    k.y = static_cast<float>(rng.uniform(0.0, extent));
    k.scale = static_cast<float>(rng.uniform(1.0, 8.0));
    k.orientation = static_cast<float>(rng.uniform(-3.14159, 3.14159));
    fs.keypoints.push_back(k);
    fs.descriptors.push_back(random_descriptor(rng));
  }
  return fs;
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testing
