#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "retarget/dataset.hpp"
#include "retarget/grid.hpp"
#include "retarget/simnet.hpp"

namespace retarget {

struct RankRecord {
  std::size_t question_id = 0;
  std::size_t positive_index = 0;
  std::size_t rank = 0;   // 1-based
  std::size_t total = 0;  // candidate count
  int percentile = 0;     // 1..100

  friend bool operator==(const RankRecord&, const RankRecord&) = default;
};

/// ceil(100 * rank / total). Throws RangeError unless 1 <= rank <= total.
int percentile_rank(std::size_t rank, std::size_t total);

using CmcCurve = std::array<double, 100>;

/// Element k-1 is the fraction of records with percentile <= k. Throws
/// EmptyInput.
CmcCurve cmc_curve(std::span<const RankRecord> records);

/// Ranks each positive among all free grid samples of scene B plus the
/// positives themselves, ascending by dissimilarity to the anchor. A positive
/// is placed after grid samples of equal value; positives tie-break among
/// themselves by (value, x, y, heading), so records do not depend on the
/// order of the positives list. Throws NoFreeSpace.
std::vector<RankRecord> rank_positives(const SimilarityModel& model, const SurveyQuestion& question,
                                       const FeatureConfig& cfg, const GridSpec& grid = {},
                                       std::size_t question_id = 0, unsigned threads = 1,
                                       const SceneFeatureTable* table = nullptr);

struct AblationRow {
  std::string variant;
  double mean = 0.0;
  double stddev = 0.0;  // population std over seeds
  std::size_t seeds = 0;
};

/// One row per variant from per-seed accuracies, sorted by descending mean
/// (ties keep input order).
std::vector<AblationRow> ablation_table(const std::vector<std::pair<std::string, std::vector<double>>>& accuracies);

/// Same, measuring triplet accuracy of every trained model on `test`.
std::vector<AblationRow> ablation_table(const std::vector<std::pair<std::string, std::vector<SimilarityModel>>>& models,
                                        std::span<const TripletSample> test, unsigned threads = 1);

struct HeatmapCell {
  int row = 0;
  int col = 0;
  bool feasible = false;
  double best_d = 0.0;
  int best_orientation = 0;
};

struct HeatmapGrid {
  std::string scene_id;
  double cell_size = 0.0;
  int rows = 0;
  int cols = 0;
  int orientations = 0;
  std::vector<HeatmapCell> cells;  // row-major, rows * cols
};

/// Best dissimilarity over all headings for every grid cell of scene B.
/// Throws NoFreeSpace.
HeatmapGrid compute_heatmap(const SimilarityModel& model, const SurveyQuestion& question, const FeatureConfig& cfg,
                            const GridSpec& grid = {}, unsigned threads = 1);

/// Binary PPM (P6), one pixel per cell, grid row 0 at the bottom. Red marks
/// the lowest observed d, blue the highest; blocked cells are black.
std::string heatmap_ppm(const HeatmapGrid& heatmap);

/// "row,col,best_d,best_orientation_deg" for feasible cells in row-major order.
std::string heatmap_csv(const HeatmapGrid& heatmap);

std::string cmc_csv(const CmcCurve& curve);
std::string ranks_csv(std::span<const RankRecord> records);
std::string ablation_csv(std::span<const AblationRow> rows);

/// Shortest round-trip decimal for a double.
std::string format_double(double v);

}  // namespace retarget
