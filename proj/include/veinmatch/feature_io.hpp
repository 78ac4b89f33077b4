#pragma once

#include <filesystem>

#include <json.hpp>

#include "veinmatch/sift.hpp"

namespace veinmatch {

inline constexpr std::uint32_t kVmfsVersion = 1;

// Binary layout, little-endian: "VMFS", u32 version, u32 count, then per
// point x, y, scale, orientation (f32) followed by 128 f32 descriptor
// components. Pyramid provenance and response are not stored; source_id is
// set to the file stem on read.
void write_vmfs(const std::filesystem::path& path, const FeatureSet& fs);
FeatureSet read_vmfs(const std::filesystem::path& path);

nlohmann::json features_to_json(const FeatureSet& fs);
FeatureSet features_from_json(const nlohmann::json& j);

}  // namespace veinmatch
