#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "veinmatch/image.hpp"
#include "veinmatch/random.hpp"
#include "veinmatch/sift.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

veinmatch::GrayImage random_image(int w, int h, veinmatch::SeededRng& rng);

// Smooth blob texture on a mid-grey background; deterministic in seed.
veinmatch::GrayImage blob_texture(int w, int h, std::uint64_t seed, int blobs = 60);

// Random unit-norm descriptor.
veinmatch::Descriptor random_descriptor(veinmatch::SeededRng& rng);

// Feature set with random positions inside [0, extent)^2 and random unit
// descriptors.
veinmatch::FeatureSet random_features(std::size_t n, veinmatch::SeededRng& rng,
                                      double extent = 256.0);

// Runs a shell command and returns its exit status; stdout/stderr captured
// into the given files when non-empty.
int run_command(const std::string& cmd);

std::string read_file(const std::filesystem::path& p);

}  // namespace testing
