#include "retarget/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "retarget/errors.hpp"
#include "retarget/parallel.hpp"
#include "retarget/rng.hpp"

namespace retarget {

void PSOConfig::validate() const {
  if (particles < 1) throw RangeError("pso needs at least one particle");
  if (max_epochs < 0) throw RangeError("pso max_epochs must be >= 0");
  if (!(max_speed >= 0.0) || !(max_turn >= 0.0)) throw RangeError("pso velocity clamps must be >= 0");
  if (!(position_jitter >= 0.0) || !(heading_jitter >= 0.0)) throw RangeError("pso jitter must be >= 0");
}

GridHit grid_search(const SimilarityModel& model, const FeatureVector& anchor, const SceneFeatureTable& table,
                    const Placement& other, unsigned threads) {
  const auto& cells = table.cells();
  const int n_orient = table.orientations();
  struct CellBest {
    double value = std::numeric_limits<double>::infinity();
    int orientation = -1;
  };
  std::vector<CellBest> per_cell(cells.size());
  const AnchoredDissimilarity score(model, anchor);
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    if (distance(cells[i].center, other.position) <= kCoincidentTolerance) return;
    CellBest best;
    for (int o = 0; o < n_orient; ++o) {
      const double d = score(table.features(i, o, other));
      if (d < best.value) best = {d, o};
    }
    per_cell[i] = best;
  });
  // cells are in (row, col) order, so a strict < keeps the lexicographic tie rule
  GridHit hit;
  bool found = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (per_cell[i].orientation < 0) continue;
    if (!found || per_cell[i].value < hit.best.value) {
      found = true;
      hit.cell = i;
      hit.row = cells[i].row;
      hit.col = cells[i].col;
      hit.orientation = per_cell[i].orientation;
      hit.best = {table.placement(i, per_cell[i].orientation), per_cell[i].value};
    }
  }
  if (!found) throw NoFreeSpace("scene '" + table.scene().id() + "' has no free grid sample");
  return hit;
}

ScoredPlacement pso_minimize(const std::function<double(const Placement&)>& objective,
                             const std::function<bool(const Placement&)>& feasible, const ScoredPlacement& start,
                             const PSOConfig& cfg, double infeasible_value) {
  cfg.validate();
  if (cfg.max_epochs == 0) return start;

  struct Particle {
    Vec2 pos;
    double heading = 0.0;
    Vec2 vel{};
    double turn = 0.0;
    Vec2 best_pos;
    double best_heading = 0.0;
    double best_value = 0.0;
    bool best_feasible = false;
  };
  Rng rng(cfg.seed);
  const double heading_jitter = deg_to_rad(cfg.heading_jitter);
  const double max_turn = deg_to_rad(cfg.max_turn);

  auto evaluate = [&](const Vec2& pos, double heading, bool& ok) {
    const Placement p(pos, heading);
    ok = feasible(p);
    return ok ? objective(p) : infeasible_value;
  };

  std::vector<Particle> swarm(static_cast<std::size_t>(cfg.particles));
  ScoredPlacement global = start;
  for (std::size_t k = 0; k < swarm.size(); ++k) {
    Particle& q = swarm[k];
    q.pos = start.placement.position;
    q.heading = start.placement.heading;
    if (k == 0) {
      q.best_value = start.value;
      q.best_feasible = true;
    } else {
      q.pos = q.pos + Vec2{rng.uniform(-cfg.position_jitter, cfg.position_jitter),
                           rng.uniform(-cfg.position_jitter, cfg.position_jitter)};
      q.heading = normalize_angle(q.heading + rng.uniform(-heading_jitter, heading_jitter));
      q.best_value = evaluate(q.pos, q.heading, q.best_feasible);
    }
    q.best_pos = q.pos;
    q.best_heading = q.heading;
    if (q.best_feasible && q.best_value < global.value) global = {Placement(q.pos, q.heading), q.best_value};
  }

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const ScoredPlacement leader = global;
    for (Particle& q : swarm) {
      const double r1x = rng.uniform(), r1y = rng.uniform(), r1t = rng.uniform();
      const double r2x = rng.uniform(), r2y = rng.uniform(), r2t = rng.uniform();
      const Vec2 to_best = q.best_pos - q.pos;
      const Vec2 to_leader = leader.placement.position - q.pos;
      q.vel = Vec2{cfg.inertia * q.vel.x + cfg.c1 * r1x * to_best.x + cfg.c2 * r2x * to_leader.x,
                   cfg.inertia * q.vel.y + cfg.c1 * r1y * to_best.y + cfg.c2 * r2y * to_leader.y};
      q.turn = cfg.inertia * q.turn + cfg.c1 * r1t * wrapped_difference(q.best_heading, q.heading) +
               cfg.c2 * r2t * wrapped_difference(leader.placement.heading, q.heading);
      const double speed = norm(q.vel);
      if (speed > cfg.max_speed) q.vel = (cfg.max_speed / speed) * q.vel;
      q.turn = std::clamp(q.turn, -max_turn, max_turn);
      q.pos = q.pos + q.vel;
      q.heading = normalize_angle(q.heading + q.turn);

      bool ok = false;
      const double value = evaluate(q.pos, q.heading, ok);
      if (ok && (!q.best_feasible || value < q.best_value)) {
        q.best_pos = q.pos;
        q.best_heading = q.heading;
        q.best_value = value;
        q.best_feasible = true;
      }
      if (ok && value < global.value) global = {Placement(q.pos, q.heading), value};
    }
  }
  return global;
}

ScoredPlacement pso_refine(const SimilarityModel& model, const FeatureVector& anchor, const Scene& scene_b,
                           const Placement& p_y, const ScoredPlacement& start, const PSOConfig& pso,
                           const GridSpec& grid, const FeatureConfig& cfg) {
  const AnchoredDissimilarity score(model, anchor);
  const auto objective = [&](const Placement& p) { return score(extract(p, p_y, scene_b, cfg)); };
  const auto feasible = [&](const Placement& p) {
    return scene_b.is_free(p.position, grid.clearance) && distance(p.position, p_y.position) > kCoincidentTolerance;
  };
  return pso_minimize(objective, feasible, start, pso, 1.0);
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

PlacementResult place_avatar(const SimilarityModel& model, const PlacementQuery& query, const FeatureConfig& cfg,
                             const GridSpec& grid, const PSOConfig& pso, unsigned threads,
                             const SceneFeatureTable* table) {
  if (!query.scene_a || !query.scene_b) throw UsageError("placement query needs both scenes");
  model.check_feature_config(cfg);
  pso.validate();
  const Scene& scene_b = *query.scene_b;
  const FeatureVector anchor = extract(query.p_x, query.p_y_prime, *query.scene_a, cfg);

  PlacementResult result;
  auto t0 = std::chrono::steady_clock::now();
  std::optional<SceneFeatureTable> own;
  if (table == nullptr) {
    own.emplace(scene_b, grid, cfg, threads);
    table = &*own;
  } else if (&table->scene() != &scene_b && !(table->scene() == scene_b)) {
    throw UsageError("feature table does not belong to scene B");
  }
  result.timings.table_ms = elapsed_ms(t0);

  t0 = std::chrono::steady_clock::now();
  const GridHit hit = grid_search(model, anchor, *table, query.p_y, threads);
  result.timings.grid_ms = elapsed_ms(t0);
  result.grid_best = hit.best.placement;
  result.grid_dissimilarity = hit.best.value;

  t0 = std::chrono::steady_clock::now();
  const ScoredPlacement refined = pso_refine(model, anchor, scene_b, query.p_y, hit.best, pso, table->grid(), cfg);
  result.timings.pso_ms = elapsed_ms(t0);
  result.placement = refined.placement;
  result.dissimilarity = refined.value;
  result.stance = scene_b.derive_stance(refined.placement.position);
  return result;
}

}  // namespace retarget
