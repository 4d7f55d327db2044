#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "retarget/scene.hpp"

namespace retarget {

/// Feature extraction constants. Distances in meters, the attention cone in
/// degrees (maximum unsigned deviation from the gaze direction).
struct FeatureConfig {
  double va_max_distance = 4.0;
  double va_max_angle = 40.0;
  double sp_max_distance = 3.0;
  double pose_inner_radius = 0.25;
  double pose_outer_radius = 0.5;
  int pose_sectors = 16;
  double pose_sample_step = 0.05;
  double norm_distance_scale = 5.0;
  double norm_height_scale = 2.0;

  /// Throws RangeError when a constant is non-positive or the pose rings are
  /// inconsistent.
  void validate() const;

  /// Stable hash of every field; models record it so they are never applied
  /// to features computed under different constants.
  std::uint64_t fingerprint() const;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

inline constexpr std::size_t kIpDim = 3;
inline constexpr std::size_t kVaDim = kCategoryCount;
inline constexpr std::size_t kPaDim = 17;
inline constexpr std::size_t kSsDim = 1;
inline constexpr std::size_t kSpDim = kCategoryCount;
inline constexpr std::size_t kFeatureDim = kIpDim + kVaDim + kPaDim + kSsDim + kSpDim;
static_assert(kFeatureDim == 45);

// Offsets of each block inside the concatenated vector [ip, va, pa, ss, sp].
inline constexpr std::size_t kIpOffset = 0;
inline constexpr std::size_t kVaOffset = kIpOffset + kIpDim;
inline constexpr std::size_t kPaOffset = kVaOffset + kVaDim;
inline constexpr std::size_t kSsOffset = kPaOffset + kPaDim;
inline constexpr std::size_t kSpOffset = kSsOffset + kSsDim;

using FeatureVector = std::array<double, kFeatureDim>;
using InterpersonalFeature = std::array<double, kIpDim>;
using AttentionFeature = std::array<double, kVaDim>;
using PoseFeature = std::array<double, kPaDim>;
using SpatialFeature = std::array<double, kSpDim>;

/// Sample lattice for the pose height field, expressed in the placement's
/// local frame (x along the heading). Region 0 is the inner disk, regions
/// 1..16 the annulus sectors counter-clockwise from the heading.
struct PoseStencil {
  std::vector<Vec2> offsets;
  std::vector<std::uint8_t> region;
  std::array<int, kPaDim> counts{};
};

PoseStencil make_pose_stencil(const FeatureConfig& cfg);

/// (normalized distance, self-to-other angle / pi, other-to-self angle / pi).
/// Throws DegenerateGeometry when the two positions coincide.
InterpersonalFeature interpersonal(const Placement& self, const Placement& other, const FeatureConfig& cfg);

AttentionFeature visual_attention(const Placement& p, const Scene& scene, const FeatureConfig& cfg);

PoseFeature pose_accommodation(const Placement& p, const Scene& scene, const FeatureConfig& cfg);
PoseFeature pose_accommodation(const Placement& p, const Scene& scene, const FeatureConfig& cfg,
                               const PoseStencil& stencil);

SpatialFeature spatial(const Placement& p, const Scene& scene, const FeatureConfig& cfg);

inline double stance_value(Stance s) { return s == Stance::sit ? 1.0 : 0.0; }

FeatureVector assemble(const InterpersonalFeature& ip, const AttentionFeature& va, const PoseFeature& pa,
                       double ss, const SpatialFeature& sp);

/// Full 45-dim placement descriptor of `self` given the other party.
FeatureVector extract(const Placement& self, const Placement& other, const Scene& scene, const FeatureConfig& cfg);

}  // namespace retarget
