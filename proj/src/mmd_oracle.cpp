// Reference transcription of the MMD filter, line by line. Kept apart from
// geomfilter.cpp on purpose: differential tests compare the two.

#include <cmath>
#include <vector>

#include "veinmatch/synthbench.hpp"

namespace veinmatch {

MmdDecision mmd_oracle(const MatchSet& matches, std::span<const Point2d> query_points,
                       std::span<const Point2d> gallery_points, const MmdParams& params) {
  MmdDecision decision;
  const std::size_t n = matches.pairs.size();
  if (n == 0) {
    decision.image_accepted = false;
    return decision;
  }

  // 1: for each M_i, D_ix <- X_G - X_P and D_iy <- Y_G - Y_P
  std::vector<double> dx(n);
  std::vector<double> dy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2d G = gallery_points[matches.pairs[i].gallery_idx];
    const Point2d P = query_points[matches.pairs[i].query_idx];
    dx[i] = G.x - P.x;
    dy[i] = G.y - P.y;
    if (!params.signed_distances) {
      if (dx[i] < 0) dx[i] = -dx[i];
      if (dy[i] < 0) dy[i] = -dy[i];
    }
  }

  // 3-4: means
  double sum_x = 0;
  double sum_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_x = sum_x + dx[i];
    sum_y = sum_y + dy[i];
  }
  const double mu_x = sum_x / static_cast<double>(n);
  const double mu_y = sum_y / static_cast<double>(n);

  // 5-6: medians (lower middle element of the sorted list)
  std::vector<double> sx = dx;
  std::vector<double> sy = dy;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j + 1 < n - i; ++j) {
      if (sx[j] > sx[j + 1]) { double t = sx[j]; sx[j] = sx[j + 1]; sx[j + 1] = t; }
      if (sy[j] > sy[j + 1]) { double t = sy[j]; sy[j] = sy[j + 1]; sy[j + 1] = t; }
    }
  }
  const double med_x = sx[(n - 1) / 2];
  const double med_y = sy[(n - 1) / 2];

  // 7-8: N_L and N_H
  std::size_t n_low = 0;
  std::size_t n_high = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (dx[i] <= mu_x && dy[i] <= mu_y) n_low = n_low + 1;
    if (dx[i] > mu_x && dy[i] > mu_y) n_high = n_high + 1;
  }

  decision.stats.mu_x = mu_x;
  decision.stats.mu_y = mu_y;
  decision.stats.med_x = med_x;
  decision.stats.med_y = med_y;
  decision.stats.n_low = n_low;
  decision.stats.n_high = n_high;
  decision.stats.d_x = dx;
  decision.stats.d_y = dy;

  // 9: image-level gate
  const double t_mu = params.t_mu;
  const double t_d = params.t_d;
  if ((n_low >= n_high) || (mu_x <= t_mu && mu_y <= t_mu) || (med_x <= mu_x && med_y <= mu_y)) {
    decision.image_accepted = true;
    // 9.1: per-pair acceptance
    for (std::size_t i = 0; i < n; ++i) {
      bool accept;
      if (params.inclusive_bounds) {
        accept = (dx[i] <= mu_x) && (dx[i] <= t_d) && (dy[i] <= mu_y) && (dy[i] <= t_d);
      } else {
        accept = (dx[i] < mu_x) && (dx[i] < t_d) && (dy[i] < mu_y) && (dy[i] < t_d);
      }
      if (accept) {
        decision.accepted.push_back(matches.pairs[i]);
        decision.accepted_positions.push_back(i);
      }
    }
  } else {
    // 10: reject the entire image
    decision.image_accepted = false;
  }
  return decision;
}

}  // namespace veinmatch
