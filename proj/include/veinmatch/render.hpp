#pragma once

#include <optional>
#include <vector>

#include "veinmatch/image.hpp"
#include "veinmatch/image_io.hpp"
#include "veinmatch/matchers.hpp"
#include "veinmatch/sift.hpp"

namespace veinmatch {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

inline constexpr Rgb kAcceptedColour{0, 200, 0};
inline constexpr Rgb kRejectedColour{220, 0, 0};

// Anti-aliased line (Xiaolin Wu) blended into the image.
void draw_line(RgbImage& img, Point2d a, Point2d b, Rgb colour);

// Query image on the left, gallery on the right, one line per match pair:
// green when accepted[i], red otherwise. Missing images become black
// canvases large enough for every keypoint.
RgbImage render_matches(const std::optional<GrayImage>& query_image,
                        const std::optional<GrayImage>& gallery_image, const FeatureSet& query,
                        const FeatureSet& gallery, const MatchSet& matches,
                        const std::vector<bool>& accepted);

}  // namespace veinmatch
