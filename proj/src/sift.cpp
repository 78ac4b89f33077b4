#include "veinmatch/sift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "veinmatch/error.hpp"

namespace veinmatch {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kImageBorder = 5;
constexpr int kDescriptorWidth = 4;
constexpr int kDescriptorBins = 8;
constexpr double kOrientationSigmaFactor = 1.5;
constexpr double kDescriptorScaleFactor = 3.0;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

double to_signed_angle(double a) {
  a = wrap_angle(a);
  if (a >= std::numbers::pi) a -= kTwoPi;
  return a;
}

GrayImage halve(const GrayImage& img) {
  GrayImage out(std::max(1, img.width() / 2), std::max(1, img.height() / 2));
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out.at(x, y) = img.at(2 * x, 2 * y);
  }
  return out;
}

Plane subtract(const GrayImage& a, const GrayImage& b) {
  Plane out(a.width(), a.height());
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  auto po = out.pixels();
  for (std::size_t i = 0; i < po.size(); ++i) po[i] = pa[i] - pb[i];
  return out;
}

int auto_octaves(int width, int height) {
  int n = 0;
  while (std::min(width, height) >= 16) {
    ++n;
    width /= 2;
    height /= 2;
  }
  return n;
}

// Solves a * x = b for a symmetric 3x3 system; false when singular.
bool solve3(const double a[3][3], const double b[3], double x[3]) {
  const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                     a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  if (std::abs(det) < 1e-15) return false;
  for (int c = 0; c < 3; ++c) {
    double m[3][3];
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) m[r][k] = (k == c) ? b[r] : a[r][k];
    }
    x[c] = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
            m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
            m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])) /
           det;
  }
  return true;
}

struct Derivatives {
  double value;
  double grad[3];
  double hess[3][3];
};

Derivatives derivatives_at(const Octave& oct, int layer, int x, int y) {
  const Plane& prev = oct.dogs[layer - 1];
  const Plane& cur = oct.dogs[layer];
  const Plane& next = oct.dogs[layer + 1];
  Derivatives d{};
  const double v = cur.at(x, y);
  d.value = v;
  d.grad[0] = 0.5 * (cur.at(x + 1, y) - cur.at(x - 1, y));
  d.grad[1] = 0.5 * (cur.at(x, y + 1) - cur.at(x, y - 1));
  d.grad[2] = 0.5 * (next.at(x, y) - prev.at(x, y));
  const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - 2.0 * v;
  const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - 2.0 * v;
  const double dss = next.at(x, y) + prev.at(x, y) - 2.0 * v;
  const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) -
                             cur.at(x + 1, y - 1) + cur.at(x - 1, y - 1));
  const double dxs = 0.25 * (next.at(x + 1, y) - next.at(x - 1, y) -
                             prev.at(x + 1, y) + prev.at(x - 1, y));
  const double dys = 0.25 * (next.at(x, y + 1) - next.at(x, y - 1) -
                             prev.at(x, y + 1) + prev.at(x, y - 1));
  d.hess[0][0] = dxx; d.hess[0][1] = dxy; d.hess[0][2] = dxs;
  d.hess[1][0] = dxy; d.hess[1][1] = dyy; d.hess[1][2] = dys;
  d.hess[2][0] = dxs; d.hess[2][1] = dys; d.hess[2][2] = dss;
  return d;
}

bool is_extremum(const Octave& oct, int layer, int x, int y) {
  const double v = oct.dogs[layer].at(x, y);
  const bool want_max = v > 0.0;
  for (int l = layer - 1; l <= layer + 1; ++l) {
    const Plane& p = oct.dogs[l];
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (l == layer && dx == 0 && dy == 0) continue;
        const double n = p.at(x + dx, y + dy);
        if (want_max ? n >= v : n <= v) return false;
      }
    }
  }
  return true;
}

// Sub-pixel refinement; fills kp and returns false when the candidate is
// rejected by the convergence, contrast or edge tests.
bool refine(const ScaleSpace& space, int o, int layer, int x, int y, Keypoint& kp) {
  const SiftParams& p = space.params;
  const Octave& oct = space.octaves[o];
  const int w = oct.dogs[0].width();
  const int h = oct.dogs[0].height();
  const int s = p.scales_per_octave;

  double offset[3] = {0.0, 0.0, 0.0};
  Derivatives d{};
  bool converged = false;
  for (int step = 0; step < p.max_interpolation_steps; ++step) {
    d = derivatives_at(oct, layer, x, y);
    double neg_grad[3] = {-d.grad[0], -d.grad[1], -d.grad[2]};
    if (!solve3(d.hess, neg_grad, offset)) return false;
    if (std::abs(offset[0]) <= 0.5 && std::abs(offset[1]) <= 0.5 && std::abs(offset[2]) <= 0.5) {
      converged = true;
      break;
    }
    if (std::abs(offset[0]) > 1e3 || std::abs(offset[1]) > 1e3 || std::abs(offset[2]) > 1e3) {
      return false;
    }
    x += static_cast<int>(std::lround(offset[0]));
    y += static_cast<int>(std::lround(offset[1]));
    layer += static_cast<int>(std::lround(offset[2]));
    if (layer < 1 || layer > s || x < kImageBorder || x >= w - kImageBorder ||
        y < kImageBorder || y >= h - kImageBorder) {
      return false;
    }
  }
  if (!converged) return false;

  const double contrast =
      d.value + 0.5 * (d.grad[0] * offset[0] + d.grad[1] * offset[1] + d.grad[2] * offset[2]);
  if (std::abs(contrast) < p.contrast_threshold) return false;

  const double tr = d.hess[0][0] + d.hess[1][1];
  const double det = d.hess[0][0] * d.hess[1][1] - d.hess[0][1] * d.hess[1][0];
  const double r = p.edge_ratio;
  if (det <= 0.0 || tr * tr * r >= (r + 1.0) * (r + 1.0) * det) return false;

  const double layer_pos = layer + offset[2];
  kp.octave = o;
  kp.layer = layer;
  kp.cell_x = x;
  kp.cell_y = y;
  kp.octave_x = static_cast<float>(x + offset[0]);
  kp.octave_y = static_cast<float>(y + offset[1]);
  kp.octave_scale = static_cast<float>(p.sigma0 * std::pow(2.0, layer_pos / s));
  kp.x = static_cast<float>((x + offset[0]) * oct.pixel_scale);
  kp.y = static_cast<float>((y + offset[1]) * oct.pixel_scale);
  kp.scale = static_cast<float>(kp.octave_scale * oct.pixel_scale);
  kp.response = static_cast<float>(contrast);
  kp.orientation = 0.0f;
  return true;
}

class GradientCache {
 public:
  explicit GradientCache(const ScaleSpace& space) : space_(space) {
    for (const Octave& o : space.octaves) fields_.emplace_back(o.gaussians.size());
  }

  const GradientField& at(int octave, int layer) {
    std::optional<GradientField>& f = fields_[octave][layer];
    if (!f) f = gradients(space_.octaves[octave].gaussians[layer]);
    return *f;
  }

 private:
  const ScaleSpace& space_;
  std::vector<std::vector<std::optional<GradientField>>> fields_;
};

std::vector<float> orientations_from(const GradientField& g, const Keypoint& kp,
                                     const SiftParams& p) {
  const int n = p.orientation_bins;
  const double sigma = kOrientationSigmaFactor * kp.octave_scale;
  const int radius = static_cast<int>(std::lround(3.0 * sigma));
  const double expf_scale = -1.0 / (2.0 * sigma * sigma);
  const int w = g.magnitude.width();
  const int h = g.magnitude.height();

  std::vector<double> raw(n, 0.0);
  for (int dy = -radius; dy <= radius; ++dy) {
    const int y = kp.cell_y + dy;
    if (y <= 0 || y >= h - 1) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int x = kp.cell_x + dx;
      if (x <= 0 || x >= w - 1) continue;
      const double mag = g.magnitude.at(x, y);
      if (mag == 0.0) continue;
      const double weight = std::exp((dx * dx + dy * dy) * expf_scale);
      int bin = static_cast<int>(std::lround(wrap_angle(g.orientation.at(x, y)) * n / kTwoPi));
      if (bin >= n) bin -= n;
      raw[bin] += weight * mag;
    }
  }

  std::vector<double> hist(n);
  for (int i = 0; i < n; ++i) {
    auto r = [&](int k) { return raw[((i + k) % n + n) % n]; };
    hist[i] = (r(-2) + r(2)) * (1.0 / 16.0) + (r(-1) + r(1)) * (4.0 / 16.0) + r(0) * (6.0 / 16.0);
  }
  const double max_val = *std::max_element(hist.begin(), hist.end());
  if (max_val <= 0.0) return {0.0f};

  std::vector<float> out;
  const double threshold = p.orientation_peak_ratio * max_val;
  for (int i = 0; i < n; ++i) {
    const double left = hist[(i + n - 1) % n];
    const double right = hist[(i + 1) % n];
    const double c = hist[i];
    if (c > left && c > right && c >= threshold) {
      double bin = i + 0.5 * (left - right) / (left - 2.0 * c + right);
      if (bin < 0.0) bin += n;
      if (bin >= n) bin -= n;
      out.push_back(static_cast<float>(to_signed_angle(bin * kTwoPi / n)));
    }
  }
  if (out.empty()) out.push_back(0.0f);  // flat plateau: no strict peak
  return out;
}

Descriptor descriptor_from(const GradientField& g, const Keypoint& kp, const SiftParams& p) {
  constexpr int d = kDescriptorWidth;
  constexpr int n = kDescriptorBins;
  const int w = g.magnitude.width();
  const int h = g.magnitude.height();

  const double ori = kp.orientation;
  const double hist_width = kDescriptorScaleFactor * kp.octave_scale;
  int radius = static_cast<int>(std::lround(hist_width * std::numbers::sqrt2 * (d + 1) * 0.5));
  radius = std::min(radius, static_cast<int>(std::sqrt(static_cast<double>(w) * w + static_cast<double>(h) * h)));
  const double cos_t = std::cos(ori) / hist_width;
  const double sin_t = std::sin(ori) / hist_width;
  const double exp_scale = -1.0 / (d * d * 0.5);
  const double bins_per_rad = n / kTwoPi;

  std::vector<double> hist((d + 2) * (d + 2) * (n + 2), 0.0);
  auto cell = [&](int r, int c, int o) -> double& { return hist[((r + 1) * (d + 2) + (c + 1)) * (n + 2) + o]; };

  for (int dy = -radius; dy <= radius; ++dy) {
    const int y = kp.cell_y + dy;
    if (y <= 0 || y >= h - 1) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int x = kp.cell_x + dx;
      if (x <= 0 || x >= w - 1) continue;
      // Offset expressed in the keypoint frame (x along the orientation).
      const double c_rot = dx * cos_t + dy * sin_t;
      const double r_rot = -dx * sin_t + dy * cos_t;
      const double rbin = r_rot + d / 2.0 - 0.5;
      const double cbin = c_rot + d / 2.0 - 0.5;
      if (rbin <= -1.0 || rbin >= d || cbin <= -1.0 || cbin >= d) continue;

      const double mag = g.magnitude.at(x, y);
      if (mag == 0.0) continue;
      const double weight = std::exp((c_rot * c_rot + r_rot * r_rot) * exp_scale);
      const double obin = wrap_angle(g.orientation.at(x, y) - ori) * bins_per_rad;
      const double v = mag * weight;

      const int r0 = static_cast<int>(std::floor(rbin));
      const int c0 = static_cast<int>(std::floor(cbin));
      int o0 = static_cast<int>(std::floor(obin));
      const double fr = rbin - r0;
      const double fc = cbin - c0;
      const double fo = obin - o0;
      if (o0 >= n) o0 -= n;

      for (int ir = 0; ir <= 1; ++ir) {
        const double vr = v * (ir ? fr : 1.0 - fr);
        for (int ic = 0; ic <= 1; ++ic) {
          const double vc = vr * (ic ? fc : 1.0 - fc);
          cell(r0 + ir, c0 + ic, o0) += vc * (1.0 - fo);
          cell(r0 + ir, c0 + ic, o0 + 1) += vc * fo;
        }
      }
    }
  }

  std::array<double, kDescriptorSize> acc{};
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      cell(r, c, 0) += cell(r, c, n);
      for (int o = 0; o < n; ++o) acc[(r * d + c) * n + o] = cell(r, c, o);
    }
  }

  Descriptor out{};
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) return out;
  for (double& v : acc) v = std::min(v / norm, p.descriptor_clamp);
  norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < kDescriptorSize; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return out;
}

}  // namespace

void SiftParams::validate() const {
  if (n_octaves < 0) Fail(ErrorKind::kParameter, "n_octaves must be >= 0");
  if (scales_per_octave < 1) Fail(ErrorKind::kParameter, "scales_per_octave must be >= 1");
  if (!(sigma0 > 0.0) || !(input_sigma >= 0.0)) Fail(ErrorKind::kParameter, "sigma values must be positive");
  if (!(contrast_threshold > 0.0)) Fail(ErrorKind::kParameter, "contrast_threshold must be positive");
  if (!(edge_ratio > 1.0)) Fail(ErrorKind::kParameter, "edge_ratio must exceed 1");
  if (max_interpolation_steps < 1) Fail(ErrorKind::kParameter, "max_interpolation_steps must be >= 1");
  if (orientation_bins < 4) Fail(ErrorKind::kParameter, "orientation_bins must be >= 4");
  if (!(orientation_peak_ratio > 0.0 && orientation_peak_ratio <= 1.0)) {
    Fail(ErrorKind::kParameter, "orientation_peak_ratio must lie in (0, 1]");
  }
  if (!(descriptor_clamp > 0.0)) Fail(ErrorKind::kParameter, "descriptor_clamp must be positive");
}

ScaleSpace build_dog_scale_space(const GrayImage& img, const SiftParams& params) {
  params.validate();
  if (std::min(img.width(), img.height()) < 16) {
    Fail(ErrorKind::kParameter, "SIFT needs an image of at least 16x16");
  }
  ScaleSpace space;
  space.params = params;
  space.input_width = img.width();
  space.input_height = img.height();

  GrayImage base = img;
  double base_scale = 1.0;
  double present_sigma = params.input_sigma;
  if (params.double_input) {
    base = resize_bilinear(img, 2.0);
    base_scale = 0.5;
    present_sigma *= 2.0;
  }
  const double initial = std::sqrt(std::max(params.sigma0 * params.sigma0 - present_sigma * present_sigma, 0.01));
  base = gaussian_blur(base, initial);

  int octaves = auto_octaves(base.width(), base.height());
  if (params.n_octaves > 0) octaves = std::min(octaves, params.n_octaves);

  const int s = params.scales_per_octave;
  const double k = std::pow(2.0, 1.0 / s);
  std::vector<double> increments(s + 3, 0.0);
  for (int i = 1; i < s + 3; ++i) {
    const double prev = params.sigma0 * std::pow(k, i - 1);
    const double cur = prev * k;
    increments[i] = std::sqrt(cur * cur - prev * prev);
  }

  for (int o = 0; o < octaves; ++o) {
    Octave oct;
    oct.pixel_scale = base_scale * std::pow(2.0, o);
    oct.gaussians.reserve(s + 3);
    if (o == 0) {
      oct.gaussians.push_back(base);
    } else {
      oct.gaussians.push_back(halve(space.octaves.back().gaussians[s]));
    }
    for (int i = 1; i < s + 3; ++i) {
      oct.gaussians.push_back(gaussian_blur(oct.gaussians.back(), increments[i]));
    }
    for (int i = 0; i < s + 2; ++i) {
      oct.dogs.push_back(subtract(oct.gaussians[i + 1], oct.gaussians[i]));
    }
    space.octaves.push_back(std::move(oct));
  }
  return space;
}

std::vector<Keypoint> detect_keypoints(const ScaleSpace& space) {
  const SiftParams& p = space.params;
  const int s = p.scales_per_octave;
  const double prefilter = 0.5 * p.contrast_threshold;
  std::vector<Keypoint> out;
  for (int o = 0; o < static_cast<int>(space.octaves.size()); ++o) {
    const Octave& oct = space.octaves[o];
    const int w = oct.dogs[0].width();
    const int h = oct.dogs[0].height();
    for (int layer = 1; layer <= s; ++layer) {
      const Plane& dog = oct.dogs[layer];
      for (int y = kImageBorder; y < h - kImageBorder; ++y) {
        for (int x = kImageBorder; x < w - kImageBorder; ++x) {
          if (std::abs(dog.at(x, y)) <= prefilter) continue;
          if (!is_extremum(oct, layer, x, y)) continue;
          Keypoint kp;
          if (refine(space, o, layer, x, y, kp)) out.push_back(kp);
        }
      }
    }
  }
  return out;
}

std::vector<float> keypoint_orientations(const ScaleSpace& space, const Keypoint& kp) {
  const GradientField g = gradients(space.octaves[kp.octave].gaussians[kp.layer]);
  return orientations_from(g, kp, space.params);
}

Descriptor compute_descriptor(const ScaleSpace& space, const Keypoint& kp) {
  const GradientField g = gradients(space.octaves[kp.octave].gaussians[kp.layer]);
  return descriptor_from(g, kp, space.params);
}

FeatureSet describe_keypoints(const ScaleSpace& space, const std::vector<Keypoint>& keypoints,
                              const BinaryMask* mask) {
  const SiftParams& p = space.params;
  GradientCache cache(space);
  FeatureSet out;
  for (const Keypoint& base : keypoints) {
    if (p.mask_filtering && mask != nullptr) {
      const int mx = static_cast<int>(std::lround(base.x));
      const int my = static_cast<int>(std::lround(base.y));
      if (!mask->test(mx, my)) continue;
    }
    const GradientField& g = cache.at(base.octave, base.layer);
    for (float ori : orientations_from(g, base, p)) {
      Keypoint kp = base;
      kp.orientation = ori;
      out.keypoints.push_back(kp);
      out.descriptors.push_back(descriptor_from(g, kp, p));
    }
  }
  return out;
}

Descriptor root_sift(const Descriptor& d) {
  double l1 = 0.0;
  for (float v : d) l1 += std::abs(v);
  if (l1 == 0.0) return d;
  Descriptor out{};
  for (std::size_t i = 0; i < kDescriptorSize; ++i) {
    out[i] = static_cast<float>(std::sqrt(std::abs(d[i]) / l1));
  }
  return out;
}

void apply_root_sift(FeatureSet& features) {
  for (Descriptor& d : features.descriptors) d = root_sift(d);
}

FeatureSet extract_sift(const GrayImage& img, const SiftParams& params, const BinaryMask* mask,
                        std::string source_id) {
  const ScaleSpace space = build_dog_scale_space(img, params);
  FeatureSet fs = describe_keypoints(space, detect_keypoints(space), mask);
  fs.source_id = std::move(source_id);
  return fs;
}

KeypointChecks check_keypoint(const ScaleSpace& space, const Keypoint& kp) {
  const Octave& oct = space.octaves.at(kp.octave);
  const Derivatives d = derivatives_at(oct, kp.layer, kp.cell_x, kp.cell_y);
  double neg_grad[3] = {-d.grad[0], -d.grad[1], -d.grad[2]};
  double offset[3] = {0.0, 0.0, 0.0};
  solve3(d.hess, neg_grad, offset);
  KeypointChecks c;
  c.contrast = std::abs(d.value + 0.5 * (d.grad[0] * offset[0] + d.grad[1] * offset[1] +
                                         d.grad[2] * offset[2]));
  const double tr = d.hess[0][0] + d.hess[1][1];
  const double det = d.hess[0][0] * d.hess[1][1] - d.hess[0][1] * d.hess[1][0];
  c.det_positive = det > 0.0;
  c.edge_score = det > 0.0 ? tr * tr / det : std::numeric_limits<double>::infinity();
  const double r = space.params.edge_ratio;
  c.edge_limit = (r + 1.0) * (r + 1.0) / r;
  return c;
}

}  // namespace veinmatch
