#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "retarget/dataset.hpp"
#include "retarget/grid.hpp"
#include "retarget/simnet.hpp"

namespace retarget {

/// Inertia-constriction swarm over (x, y, heading). Velocity clamps are per
/// epoch; angles in degrees.
struct PSOConfig {
  double inertia = 0.73;
  double c1 = 1.49;
  double c2 = 1.49;
  int particles = 10;
  int max_epochs = 10;  // 0 returns the start unchanged
  double position_jitter = 0.5;
  double heading_jitter = 30.0;
  double max_speed = 0.5;
  double max_turn = 45.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlacementQuery {
  ScenePtr scene_a;
  ScenePtr scene_b;
  Placement p_x;        // person, scene A
  Placement p_y_prime;  // the other's avatar, scene A
  Placement p_y;        // the other person, scene B
};

struct ScoredPlacement {
  Placement placement;
  double value = 0.0;
};

struct GridHit {
  std::size_t cell = 0;
  int row = 0;
  int col = 0;
  int orientation = 0;
  ScoredPlacement best;
};

/// Exhaustive argmin of d(anchor, .) over every free (cell, orientation)
/// sample of `table`, skipping samples on top of `other`. Ties go to the
/// lowest (row, col, orientation). Throws NoFreeSpace.
GridHit grid_search(const SimilarityModel& model, const FeatureVector& anchor, const SceneFeatureTable& table,
                    const Placement& other, unsigned threads = 1);

/// Generic swarm minimizer. Infeasible positions score `infeasible_value` and
/// never become a personal or global best; particle 0 starts exactly at
/// `start`, so the result is never worse than it.
ScoredPlacement pso_minimize(const std::function<double(const Placement&)>& objective,
                             const std::function<bool(const Placement&)>& feasible, const ScoredPlacement& start,
                             const PSOConfig& cfg, double infeasible_value = 1.0);

/// Swarm refinement of a grid seed against the learned dissimilarity in
/// scene B (feasibility: free at the grid clearance and not on top of p_y).
ScoredPlacement pso_refine(const SimilarityModel& model, const FeatureVector& anchor, const Scene& scene_b,
                           const Placement& p_y, const ScoredPlacement& start, const PSOConfig& pso,
                           const GridSpec& grid, const FeatureConfig& cfg);

struct PlacementTimings {
  double table_ms = 0.0;
  double grid_ms = 0.0;
  double pso_ms = 0.0;
};

struct PlacementResult {
  Placement placement;
  Stance stance = Stance::stand;
  double dissimilarity = 0.0;
  Placement grid_best;
  double grid_dissimilarity = 0.0;
  PlacementTimings timings;
};

/// Anchor features of p_x in scene A, grid search over scene B, then swarm
/// refinement. Throws FingerprintMismatch and NoFreeSpace. Pass `table` to
/// reuse a precomputed scene B table (it must match scene B, grid and cfg).
PlacementResult place_avatar(const SimilarityModel& model, const PlacementQuery& query, const FeatureConfig& cfg,
                             const GridSpec& grid = {}, const PSOConfig& pso = {}, unsigned threads = 1,
                             const SceneFeatureTable* table = nullptr);

}  // namespace retarget
