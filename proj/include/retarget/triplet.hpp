#pragma once

#include "retarget/features.hpp"

namespace retarget {

/// (anchor, positive, negative) training tuple: the positive should be ranked
/// closer to the anchor than the negative.
struct TripletSample {
  FeatureVector anchor{};
  FeatureVector positive{};
  FeatureVector negative{};

  friend bool operator==(const TripletSample&, const TripletSample&) = default;
};

/// Dissimilarities of the positive and negative to the anchor, both in (0, 1).
struct DistancePair {
  double d_plus = 0.5;
  double d_minus = 0.5;
};

}  // namespace retarget
