#include "retarget/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "retarget/errors.hpp"
#include "retarget/parallel.hpp"
#include "retarget/trainer.hpp"

namespace retarget {

int percentile_rank(std::size_t rank, std::size_t total) {
  if (total < 1 || rank < 1 || rank > total)
    throw RangeError("rank " + std::to_string(rank) + " out of range for total " + std::to_string(total));
  return static_cast<int>((100 * rank + total - 1) / total);
}

CmcCurve cmc_curve(std::span<const RankRecord> records) {
  if (records.empty()) throw EmptyInput("CMC over no rank records");
  std::array<std::size_t, 101> counts{};
  for (const auto& r : records) {
    if (r.percentile < 1 || r.percentile > 100) throw RangeError("percentile outside 1..100");
    ++counts[static_cast<std::size_t>(r.percentile)];
  }
  CmcCurve curve{};
  std::size_t running = 0;
  for (std::size_t k = 1; k <= 100; ++k) {
    running += counts[k];
    curve[k - 1] = static_cast<double>(running) / static_cast<double>(records.size());
  }
  return curve;
}

std::vector<RankRecord> rank_positives(const SimilarityModel& model, const SurveyQuestion& question,
                                       const FeatureConfig& cfg, const GridSpec& grid, std::size_t question_id,
                                       unsigned threads, const SceneFeatureTable* table) {
  model.check_feature_config(cfg);
  const Scene& scene_b = *question.scene_b;
  std::optional<SceneFeatureTable> own;
  if (table == nullptr) {
    own.emplace(scene_b, grid, cfg, threads);
    table = &*own;
  }
  const FeatureVector anchor = extract(question.p_x, question.p_y_prime, *question.scene_a, cfg);
  const AnchoredDissimilarity score(model, anchor);

  const auto& cells = table->cells();
  const int n_orient = table->orientations();
  std::vector<std::vector<double>> per_cell(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    if (distance(cells[i].center, question.p_y.position) <= kCoincidentTolerance) return;
    per_cell[i].reserve(static_cast<std::size_t>(n_orient));
    for (int o = 0; o < n_orient; ++o) per_cell[i].push_back(score(table->features(i, o, question.p_y)));
  });
  std::vector<double> values;
  values.reserve(table->sample_count());
  for (const auto& v : per_cell) values.insert(values.end(), v.begin(), v.end());
  if (values.empty()) throw NoFreeSpace("scene '" + scene_b.id() + "' has no free grid sample");
  std::sort(values.begin(), values.end());

  const auto& positives = question.positives;
  std::vector<double> pos_values(positives.size());
  for (std::size_t j = 0; j < positives.size(); ++j)
    pos_values[j] = score(extract(positives[j], question.p_y, scene_b, cfg));
  auto key = [&](std::size_t j) {
    const auto& p = positives[j];
    return std::make_tuple(pos_values[j], p.position.x, p.position.y, p.heading);
  };

  const std::size_t total = values.size() + positives.size();
  std::vector<RankRecord> out;
  out.reserve(positives.size());
  for (std::size_t j = 0; j < positives.size(); ++j) {
    const auto grid_ahead = static_cast<std::size_t>(
        std::upper_bound(values.begin(), values.end(), pos_values[j]) - values.begin());
    std::size_t positives_ahead = 0;
    for (std::size_t k = 0; k < positives.size(); ++k)
      if (k != j && (key(k) < key(j) || (key(k) == key(j) && k < j))) ++positives_ahead;
    RankRecord r;
    r.question_id = question_id;
    r.positive_index = j;
    r.rank = 1 + grid_ahead + positives_ahead;
    r.total = total;
    r.percentile = percentile_rank(r.rank, r.total);
    out.push_back(r);
  }
  return out;
}

std::vector<AblationRow> ablation_table(const std::vector<std::pair<std::string, std::vector<double>>>& accuracies) {
  std::vector<AblationRow> rows;
  for (const auto& [name, acc] : accuracies) {
    if (acc.empty()) throw EmptyInput("variant '" + name + "' has no accuracies");
    AblationRow row;
    row.variant = name;
    row.seeds = acc.size();
    const double n = static_cast<double>(acc.size());
    row.mean = std::accumulate(acc.begin(), acc.end(), 0.0) / n;
    double var = 0.0;
    for (double a : acc) var += (a - row.mean) * (a - row.mean);
    row.stddev = std::sqrt(var / n);
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const AblationRow& a, const AblationRow& b) { return a.mean > b.mean; });
  return rows;
}

std::vector<AblationRow> ablation_table(const std::vector<std::pair<std::string, std::vector<SimilarityModel>>>& models,
                                        std::span<const TripletSample> test, unsigned threads) {
  std::vector<std::pair<std::string, std::vector<double>>> acc;
  for (const auto& [name, list] : models) {
    std::vector<double> a;
    for (const auto& m : list) a.push_back(triplet_accuracy(m, test, threads));
    acc.emplace_back(name, std::move(a));
  }
  return ablation_table(acc);
}

HeatmapGrid compute_heatmap(const SimilarityModel& model, const SurveyQuestion& question, const FeatureConfig& cfg,
                            const GridSpec& grid, unsigned threads) {
  model.check_feature_config(cfg);
  const Scene& scene_b = *question.scene_b;
  const SceneFeatureTable table(scene_b, grid, cfg, threads);
  const FeatureVector anchor = extract(question.p_x, question.p_y_prime, *question.scene_a, cfg);
  const AnchoredDissimilarity score(model, anchor);

  HeatmapGrid out;
  out.scene_id = scene_b.id();
  out.cell_size = grid.cell_size;
  out.rows = table.rows();
  out.cols = table.cols();
  out.orientations = table.orientations();
  out.cells.resize(static_cast<std::size_t>(out.rows) * out.cols);
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) {
      auto& cell = out.cells[static_cast<std::size_t>(r) * out.cols + c];
      cell.row = r;
      cell.col = c;
    }
  const auto& cells = table.cells();
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    if (distance(cells[i].center, question.p_y.position) <= kCoincidentTolerance) return;
    auto& cell = out.cells[static_cast<std::size_t>(cells[i].row) * out.cols + cells[i].col];
    double best = std::numeric_limits<double>::infinity();
    for (int o = 0; o < table.orientations(); ++o) {
      const double d = score(table.features(i, o, question.p_y));
      if (d < best) {
        best = d;
        cell.best_orientation = o;
      }
    }
    cell.best_d = best;
    cell.feasible = true;
  });
  if (std::none_of(out.cells.begin(), out.cells.end(), [](const HeatmapCell& c) { return c.feasible; }))
    throw NoFreeSpace("scene '" + scene_b.id() + "' has no free grid sample");
  return out;
}

std::string heatmap_ppm(const HeatmapGrid& heatmap) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : heatmap.cells)
    if (c.feasible) {
      lo = std::min(lo, c.best_d);
      hi = std::max(hi, c.best_d);
    }
  std::string out = "P6\n" + std::to_string(heatmap.cols) + " " + std::to_string(heatmap.rows) + "\n255\n";
  for (int r = heatmap.rows - 1; r >= 0; --r) {
    for (int c = 0; c < heatmap.cols; ++c) {
      const auto& cell = heatmap.cells[static_cast<std::size_t>(r) * heatmap.cols + c];
      unsigned char red = 0, blue = 0;
      if (cell.feasible) {
        const double t = hi > lo ? (cell.best_d - lo) / (hi - lo) : 0.5;
        red = static_cast<unsigned char>(std::lround(255.0 * (1.0 - t)));
        blue = static_cast<unsigned char>(255 - red);
      }
      out.push_back(static_cast<char>(red));
      out.push_back(0);
      out.push_back(static_cast<char>(blue));
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string heatmap_csv(const HeatmapGrid& heatmap) {
  std::string out = "row,col,best_d,best_orientation_deg\n";
  for (const auto& c : heatmap.cells) {
    if (!c.feasible) continue;
    const double deg = 360.0 * c.best_orientation / heatmap.orientations;
    out += std::to_string(c.row) + "," + std::to_string(c.col) + "," + format_double(c.best_d) + "," +
           format_double(deg) + "\n";
  }
  return out;
}

std::string cmc_csv(const CmcCurve& curve) {
  std::string out = "k,fraction\n";
  for (std::size_t k = 0; k < curve.size(); ++k) out += std::to_string(k + 1) + "," + format_double(curve[k]) + "\n";
  return out;
}

std::string ranks_csv(std::span<const RankRecord> records) {
  std::string out = "question,positive,rank,total,percentile\n";
  for (const auto& r : records)
    out += std::to_string(r.question_id) + "," + std::to_string(r.positive_index) + "," + std::to_string(r.rank) +
           "," + std::to_string(r.total) + "," + std::to_string(r.percentile) + "\n";
  return out;
}

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::string out = "variant,mean,std,seeds\n";
  for (const auto& r : rows)
    out += r.variant + "," + format_double(r.mean) + "," + format_double(r.stddev) + "," + std::to_string(r.seeds) +
           "\n";
  return out;
}

}  // namespace retarget
