#include "veinmatch/feature_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "veinmatch/error.hpp"

namespace veinmatch {
namespace {

static_assert(std::endian::native == std::endian::little,
              "VMFS I/O assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f32(std::ostream& out, float v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

float get_f32(std::istream& in) {
  float v = 0.0f;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void write_vmfs(const std::filesystem::path& path, const FeatureSet& fs) {
  if (fs.keypoints.size() != fs.descriptors.size()) {
    Fail(ErrorKind::kConsistency, "keypoint and descriptor counts differ");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out.write("VMFS", 4);
  put_u32(out, kVmfsVersion);
  put_u32(out, static_cast<std::uint32_t>(fs.size()));
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Keypoint& kp = fs.keypoints[i];
    put_f32(out, kp.x);
    put_f32(out, kp.y);
    put_f32(out, kp.scale);
    put_f32(out, kp.orientation);
    out.write(reinterpret_cast<const char*>(fs.descriptors[i].data()),
              static_cast<std::streamsize>(kDescriptorSize * sizeof(float)));
  }
  if (!out) Fail(ErrorKind::kIo, "failed writing " + path.string());
}

FeatureSet read_vmfs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "VMFS", 4) != 0) {
    Fail(ErrorKind::kIo, path.string() + " is not a VMFS feature file");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kVmfsVersion) {
    Fail(ErrorKind::kIo, "unsupported VMFS version " + std::to_string(version));
  }
  const std::uint32_t count = get_u32(in);
  FeatureSet fs;
  fs.source_id = path.stem().string();
  fs.keypoints.resize(count);
  fs.descriptors.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Keypoint& kp = fs.keypoints[i];
    kp.x = get_f32(in);
    kp.y = get_f32(in);
    kp.scale = get_f32(in);
    kp.orientation = get_f32(in);
    in.read(reinterpret_cast<char*>(fs.descriptors[i].data()),
            static_cast<std::streamsize>(kDescriptorSize * sizeof(float)));
  }
  if (!in) Fail(ErrorKind::kIo, "truncated VMFS file " + path.string());
  return fs;
}

nlohmann::json features_to_json(const FeatureSet& fs) {
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Keypoint& kp = fs.keypoints[i];
    points.push_back({{"x", kp.x},
                      {"y", kp.y},
                      {"scale", kp.scale},
                      {"orientation", kp.orientation},
                      {"response", kp.response},
                      {"descriptor", fs.descriptors[i]}});
  }
  return {{"source_id", fs.source_id}, {"count", fs.size()}, {"points", points}};
}

FeatureSet features_from_json(const nlohmann::json& j) {
  FeatureSet fs;
  try {
    fs.source_id = j.value("source_id", std::string{});
    for (const auto& p : j.at("points")) {
      Keypoint kp;
      kp.x = p.at("x").get<float>();
      kp.y = p.at("y").get<float>();
      kp.scale = p.at("scale").get<float>();
      kp.orientation = p.at("orientation").get<float>();
      kp.response = p.value("response", 0.0f);
      fs.keypoints.push_back(kp);
      fs.descriptors.push_back(p.at("descriptor").get<Descriptor>());
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kIo, std::string("malformed feature JSON: ") + e.what());
  }
  return fs;
}

}  // namespace veinmatch
