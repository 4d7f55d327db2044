#pragma once

#include <cstdint>
#include <vector>

#include "retarget/dataset.hpp"
#include "retarget/features.hpp"
#include "retarget/scene.hpp"
#include "retarget/simnet.hpp"

namespace retarget::testing {

/// Axis-aligned w x d room with its corner at the origin.
Scene room(double width, double depth, std::vector<FurnitureObject> objects = {}, std::string id = "room");

/// A 0.2 m square object whose center lies `dist` meters from `from` in
/// direction `deg` (degrees, world frame).
FurnitureObject object_at(const std::string& id, ObjectCategory c, Vec2 from, double dist, double deg);

/// Pose feature by dense rasterization of the 0.5 m disk at `pitch` in the
/// world frame, independent of the production stencil.
PoseFeature pose_oracle(const Placement& p, const Scene& scene, const FeatureConfig& cfg, double pitch = 0.01);

/// Uniform random feature vectors in [0, 1).
FeatureVector random_features(Rng& rng);
std::vector<TripletSample> random_triplets(std::uint64_t seed, std::size_t count);

/// Mean composite loss of `batch` recomputed from forward passes only.
double batch_loss(const SimilarityModel& model, const std::vector<TripletSample>& batch);

struct GradientCheck {
  double worst_relative_error = 0.0;  // max over tensors of |a - n| / max(|a|, |n|)
  std::size_t tensors = 0;
};

/// Analytic gradients against central finite differences with step `h`.
GradientCheck check_gradients(const SimilarityModel& model, const std::vector<TripletSample>& batch, double h = 1e-5);

/// Triplets whose correct ranking flips with the stance element: standing
/// anchors treat a change in va[0] as the smaller difference, sitting anchors a
/// change in sp[0]. Only those two elements ever differ within a triplet.
std::vector<TripletSample> context_dependent_triplets(std::uint64_t seed, std::size_t count);

/// Best triplet accuracy of any metric W = [[a, c], [c, b]] on the (va[0],
/// sp[0]) block over a coarse grid of PSD matrices.
double best_grid_bilinear_accuracy(const std::vector<TripletSample>& data, int steps = 16);

/// Furnished synthetic scene pairs and an oracle survey, as used by the
/// learnability checks.
std::vector<ScenePair> synthetic_pairs(std::uint64_t seed, int count);

}  // namespace retarget::testing
