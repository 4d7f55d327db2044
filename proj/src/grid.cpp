#include "retarget/grid.hpp"

#include <cmath>

#include "retarget/errors.hpp"
#include "retarget/parallel.hpp"

namespace retarget {

void GridSpec::validate() const {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw RangeError("grid cell_size must be positive");
  if (orientations < 1) throw RangeError("grid needs at least one orientation");
  if (!(clearance >= 0.0)) throw RangeError("grid clearance must be >= 0");
}

double GridSpec::heading(int orientation) const {
  return normalize_angle(kTwoPi * static_cast<double>(orientation) / static_cast<double>(orientations));
}

SceneFeatureTable::SceneFeatureTable(const Scene& scene, const GridSpec& grid, const FeatureConfig& cfg,
                                     unsigned threads)
    : scene_(&scene), grid_(grid), cfg_(cfg) {
  grid.validate();
  cfg.validate();
  const Box& box = scene.bounds();
  origin_ = box.min;
  cols_ = std::max(1, static_cast<int>(std::ceil((box.max.x - box.min.x) / grid.cell_size - 1e-9)));
  rows_ = std::max(1, static_cast<int>(std::ceil((box.max.y - box.min.y) / grid.cell_size - 1e-9)));
  cell_lookup_.assign(static_cast<std::size_t>(rows_) * cols_, -1);
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      const Vec2 center = cell_center(r, c);
      if (!scene.is_free(center, grid.clearance)) continue;
      cell_lookup_[static_cast<std::size_t>(r) * cols_ + c] = static_cast<int>(cells_.size());
      GridCell cell;
      cell.row = r;
      cell.col = c;
      cell.center = center;
      cell.stance = stance_value(scene.derive_stance(center));
      cell.spatial = spatial(Placement(center, 0.0), scene, cfg);
      cells_.push_back(cell);
    }
  }
  const auto n_orient = static_cast<std::size_t>(grid.orientations);
  attention_.resize(cells_.size() * n_orient);
  pose_.resize(cells_.size() * n_orient);
  const PoseStencil stencil = make_pose_stencil(cfg);
  parallel_for(cells_.size(), threads, [&](std::size_t i) {
    for (int o = 0; o < grid.orientations; ++o) {
      const Placement p = placement(i, o);
      attention_[i * n_orient + o] = visual_attention(p, scene, cfg);
      pose_[i * n_orient + o] = pose_accommodation(p, scene, cfg, stencil);
    }
  });
}

Vec2 SceneFeatureTable::cell_center(int row, int col) const {
  return {origin_.x + (col + 0.5) * grid_.cell_size, origin_.y + (row + 0.5) * grid_.cell_size};
}

std::optional<std::size_t> SceneFeatureTable::find_cell(int row, int col) const {
  if (row < 0 || col < 0 || row >= rows_ || col >= cols_) return std::nullopt;
  const int idx = cell_lookup_[static_cast<std::size_t>(row) * cols_ + col];
  if (idx < 0) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

Placement SceneFeatureTable::placement(std::size_t cell, int orientation) const {
  return Placement(cells_[cell].center, grid_.heading(orientation));
}

const AttentionFeature& SceneFeatureTable::attention(std::size_t cell, int orientation) const {
  return attention_[cell * static_cast<std::size_t>(grid_.orientations) + orientation];
}

const PoseFeature& SceneFeatureTable::pose(std::size_t cell, int orientation) const {
  return pose_[cell * static_cast<std::size_t>(grid_.orientations) + orientation];
}

FeatureVector SceneFeatureTable::features(std::size_t cell, int orientation, const Placement& other) const {
  const Placement p = placement(cell, orientation);
  return assemble(interpersonal(p, other, cfg_), attention(cell, orientation), pose(cell, orientation),
                  cells_[cell].stance, cells_[cell].spatial);
}

}  // namespace retarget
