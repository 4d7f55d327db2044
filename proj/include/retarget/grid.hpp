#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "retarget/features.hpp"

namespace retarget {

/// Discretization of a scene into square cells with evenly spaced headings.
struct GridSpec {
  double cell_size = 0.25;
  int orientations = 24;
  double clearance = 0.30;

  void validate() const;
  double heading(int orientation) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct GridCell {
  int row = 0;
  int col = 0;
  Vec2 center{};
  double stance = 0.0;
  SpatialFeature spatial{};
};

/// Scene-dependent features for every free cell center and grid heading. The
/// interpersonal block depends on the other party and is filled in at lookup.
class SceneFeatureTable {
 public:
  SceneFeatureTable(const Scene& scene, const GridSpec& grid, const FeatureConfig& cfg, unsigned threads = 1);

  const Scene& scene() const noexcept { return *scene_; }
  const GridSpec& grid() const noexcept { return grid_; }
  const FeatureConfig& feature_config() const noexcept { return cfg_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int orientations() const noexcept { return grid_.orientations; }

  /// Free cells in (row, col) order.
  const std::vector<GridCell>& cells() const noexcept { return cells_; }
  std::size_t sample_count() const noexcept { return cells_.size() * static_cast<std::size_t>(grid_.orientations); }

  Vec2 cell_center(int row, int col) const;
  std::optional<std::size_t> find_cell(int row, int col) const;

  Placement placement(std::size_t cell, int orientation) const;
  const AttentionFeature& attention(std::size_t cell, int orientation) const;
  const PoseFeature& pose(std::size_t cell, int orientation) const;

  /// Full descriptor of sample (cell, orientation) given the other party.
  FeatureVector features(std::size_t cell, int orientation, const Placement& other) const;

 private:
  const Scene* scene_;
  GridSpec grid_;
  FeatureConfig cfg_;
  Vec2 origin_{};
  int rows_ = 0;
  int cols_ = 0;
  std::vector<GridCell> cells_;
  std::vector<int> cell_lookup_;  // rows*cols, -1 when the cell is blocked
  std::vector<AttentionFeature> attention_;
  std::vector<PoseFeature> pose_;
};

/// Positions closer than this to the other party are not valid samples.
inline constexpr double kCoincidentTolerance = 1e-9;

}  // namespace retarget
