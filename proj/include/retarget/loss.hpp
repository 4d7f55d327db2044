#pragma once

#include <algorithm>
#include <cmath>

#include "retarget/triplet.hpp"

namespace retarget {

/// Distances are clamped into [eps, 1 - eps] before taking logarithms.
inline constexpr double kDistanceEpsilon = 1e-6;

inline double clamp_distance(double d) { return std::clamp(d, kDistanceEpsilon, 1.0 - kDistanceEpsilon); }

/// -[log(1 - d+) + log(d-)] for one pair.
inline double pair_push_loss(const DistancePair& p) {
  return -(std::log(1.0 - clamp_distance(p.d_plus)) + std::log(clamp_distance(p.d_minus)));
}

/// max(0, d+ - d-) for one pair.
inline double pair_rank_loss(const DistancePair& p) {
  return std::max(0.0, clamp_distance(p.d_plus) - clamp_distance(p.d_minus));
}

}  // namespace retarget
