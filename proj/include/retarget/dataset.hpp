#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "retarget/features.hpp"
#include "retarget/grid.hpp"
#include "retarget/rng.hpp"
#include "retarget/triplet.hpp"

namespace retarget {

using ScenePtr = std::shared_ptr<const Scene>;
using SceneRegistry = std::map<std::string, ScenePtr, std::less<>>;

/// One survey item: Person X and the avatar Y' in scene A, Person Y in scene
/// B, and the avatar placements for X' that respondents chose in B.
struct SurveyQuestion {
  ScenePtr scene_a;
  ScenePtr scene_b;
  Placement p_x;
  Placement p_y_prime;
  Placement p_y;
  std::vector<Placement> positives;

  /// "<scene_a>|<scene_b>"; questions over the same pair share it.
  std::string pair_id() const;
};

struct NegativeSamplingConfig {
  int random_count = 100;
  int hard_count = 10;
  double min_distance = 1.0;   // meters
  double min_angle = 36.0;     // degrees
  double min_pose_delta = 0.10;
  int max_attempts = 100000;
  double clearance = 0.30;
  double hard_radius_min = 1.0;
  double hard_radius_max = 1.5;
  double hard_angle_min = 36.0;  // degrees
  double hard_angle_max = 72.0;

  void validate() const;
};

/// Closeness test used to reject negatives: within min_distance AND within
/// min_angle AND pose feature within min_pose_delta (L-infinity).
bool too_close(const Placement& candidate, const Placement& positive, const Scene& scene,
               const NegativeSamplingConfig& cfg, const FeatureConfig& fcfg = {});
bool too_close(const Placement& candidate, const PoseFeature& candidate_pose, const Placement& positive,
               const PoseFeature& positive_pose, const NegativeSamplingConfig& cfg);

/// random_count uniform placements over the free space of scene B plus
/// hard_count perturbations of the positives; none is too close to any
/// positive. Deterministic per seed. Throws SamplingExhausted.
std::vector<Placement> sample_negatives(const SurveyQuestion& q, const NegativeSamplingConfig& cfg,
                                        std::uint64_t seed, const FeatureConfig& fcfg = {});

/// Cross product positives x negatives sharing one anchor, positive-major.
std::vector<TripletSample> build_triplets(const SurveyQuestion& q, const std::vector<Placement>& negatives,
                                          const FeatureConfig& cfg);

// ---- survey files ------------------------------------------------------------

std::vector<SurveyQuestion> load_survey(std::string_view document, const SceneRegistry& scenes);
std::vector<SurveyQuestion> load_survey_file(const std::filesystem::path& path, const SceneRegistry& scenes);
std::string serialize_survey(const std::vector<SurveyQuestion>& questions);

// ---- synthetic survey --------------------------------------------------------

using ScenePair = std::pair<ScenePtr, ScenePtr>;

struct SynthesisConfig {
  int positives = 10;
  double jitter_radius = 0.15;  // meters
  double jitter_angle = 10.0;   // degrees
  double sit_probability = 0.3;
  GridSpec grid{};
};

/// Per-block weights of the heuristic respondent: the chosen placement
/// minimizes sum_i w_i (x0_i - x_i)^2 over grid samples of scene B.
struct OracleWeights {
  double ip = 3.0;
  double va = 1.0;
  double pa = 2.0;
  double ss = 2.0;
  double sp = 0.5;
};

double oracle_distance(const FeatureVector& a, const FeatureVector& b, const OracleWeights& w = {});

/// Generates per_pair questions for every scene pair. Positives come from the
/// weighted-L2 oracle (exact argmin first, then jittered variants).
/// Deterministic per seed and independent of `threads`.
std::vector<SurveyQuestion> synthesize_survey(const std::vector<ScenePair>& pairs, int per_pair, std::uint64_t seed,
                                              const FeatureConfig& fcfg = {}, const SynthesisConfig& scfg = {},
                                              unsigned threads = 1);

/// A feasible random placement in `scene` (sitting on furniture with
/// probability `sit_probability`). Throws SamplingExhausted.
Placement random_free_placement(const Scene& scene, Rng& rng, double clearance, double sit_probability = 0.0);

/// `count` pairs of random synthetic scenes with ids "pairNN_a" / "pairNN_b".
std::vector<ScenePair> generate_scene_pairs(std::uint64_t seed, int count);

// ---- triplet files -----------------------------------------------------------

struct TripletRecord {
  std::uint32_t pair_index = 0;
  std::uint32_t question_index = 0;
  TripletSample sample;

  friend bool operator==(const TripletRecord&, const TripletRecord&) = default;
};

struct TripletDataset {
  FeatureConfig feature_config;
  std::vector<std::string> pair_ids;  // indexed by TripletRecord::pair_index
  std::vector<TripletRecord> records;
};

/// Negatives and triplets for every question; question i draws its negatives
/// from derive_seed(seed, i). Records keep question order, so the result does
/// not depend on `threads`.
TripletDataset build_dataset(const std::vector<SurveyQuestion>& questions, const NegativeSamplingConfig& ncfg,
                             const FeatureConfig& fcfg, std::uint64_t seed, unsigned threads = 1);

/// Samples of the records whose pair id is in `pairs` (all records when
/// `pairs` is empty).
std::vector<TripletSample> select_samples(const TripletDataset& data, const std::vector<std::string>& pairs = {});

std::string serialize_triplets(const TripletDataset& data);
TripletDataset parse_triplets(std::string_view bytes);
void write_triplet_file(const TripletDataset& data, const std::filesystem::path& path);
TripletDataset read_triplet_file(const std::filesystem::path& path);

}  // namespace retarget
