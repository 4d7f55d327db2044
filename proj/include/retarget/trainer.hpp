#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "retarget/dataset.hpp"
#include "retarget/errors.hpp"
#include "retarget/simnet.hpp"

namespace retarget {

enum class OptimizerKind { sgd_momentum, adaptive_moment };

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 200;
  OptimizerKind optimizer = OptimizerKind::adaptive_moment;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  int early_stop_patience = 20;  // epochs without held-out improvement; 0 disables
  unsigned threads = 1;

  void validate() const;
};

struct SplitSpec {
  std::vector<std::string> train_pairs;
  std::vector<std::string> test_pairs;
};

/// phi = -mean[log(1 - d+) + log(d-)], psi = mean max(0, d+ - d-).
/// Throws EmptyInput on an empty batch and NonFiniteLoss on non-finite input.
LossTerms total_loss(std::span<const DistancePair> batch);

/// Fraction of triplets with d+ < d- (ties are failures).
double triplet_accuracy(const SimilarityModel& model, std::span<const TripletSample> data, unsigned threads = 1);

struct EpochRecord {
  int epoch = 0;
  double phi = 0.0;
  double psi = 0.0;
  double total = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
};

struct TrainResult {
  SimilarityModel model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

/// Thrown when training diverges; carries the last model whose loss was finite.
class TrainingDiverged : public NonFiniteLoss {
 public:
  TrainingDiverged(const std::string& what, SimilarityModel last_good)
      : NonFiniteLoss(what), last_good_(std::make_shared<SimilarityModel>(std::move(last_good))) {}
  const SimilarityModel& last_good() const { return *last_good_; }

 private:
  std::shared_ptr<SimilarityModel> last_good_;
};

/// Mini-batch descent on the composite loss. With a held-out set, the model
/// with the best held-out accuracy is returned and training stops after
/// `early_stop_patience` epochs without improvement. Deterministic per seed and
/// independent of the thread count.
TrainResult train(SimilarityModel model, std::span<const TripletSample> data, const TrainConfig& cfg,
                  std::span<const TripletSample> held_out = {});

/// Random half/half partition of scene-pair ids. Throws InsufficientPairs
/// with fewer than two distinct pairs.
SplitSpec split_by_pairs(const std::vector<std::string>& pair_ids, std::uint64_t seed);
SplitSpec split_by_pairs(const std::vector<SurveyQuestion>& questions, std::uint64_t seed);

/// Uniformly chosen subset of at most `count` items, in original order.
std::vector<std::size_t> subsample_indices(std::size_t size, std::size_t count, std::uint64_t seed);

// ---- linear baseline -----------------------------------------------------

/// d(x0, x) = s^2 (x0 - x)^T W (x0 - x) with W symmetric PSD; s is a fixed
/// input scale taken from the training data so that W is learned on
/// unit-RMS differences.
struct BilinearModel {
  Eigen::MatrixXd weight;
  double input_scale = 1.0;

  double distance(const FeatureVector& a, const FeatureVector& b) const;
  static BilinearModel identity();
};

struct BilinearConfig {
  double margin = 0.1;
  double learning_rate = 0.05;
  int epochs = 200;
  int batch_size = 256;
  std::uint64_t seed = 0;
};

struct BilinearResult {
  BilinearModel model;
  std::vector<double> loss_history;
  double train_accuracy = 0.0;
};

/// Symmetric PSD projection by clipping negative eigenvalues to zero.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m);

BilinearResult train_bilinear_baseline(std::span<const TripletSample> data, const BilinearConfig& cfg);
double bilinear_accuracy(const BilinearModel& model, std::span<const TripletSample> data);

}  // namespace retarget
