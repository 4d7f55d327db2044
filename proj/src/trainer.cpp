#include "retarget/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>

#include <Eigen/Eigenvalues>

#include "retarget/loss.hpp"
#include "retarget/parallel.hpp"
#include "retarget/rng.hpp"

namespace retarget {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw RangeError("learning_rate must be >= 0");
  if (batch_size < 1) throw RangeError("batch_size must be >= 1");
  if (epochs < 0) throw RangeError("epochs must be >= 0");
  if (early_stop_patience < 0) throw RangeError("early_stop_patience must be >= 0");
}

LossTerms total_loss(std::span<const DistancePair> batch) {
  if (batch.empty()) throw EmptyInput("loss over an empty batch");
  double phi = 0.0, psi = 0.0;
  for (const auto& p : batch) {
    if (!std::isfinite(p.d_plus) || !std::isfinite(p.d_minus)) throw NonFiniteLoss("non-finite distance in batch");
    phi += pair_push_loss(p);
    psi += pair_rank_loss(p);
  }
  const double n = static_cast<double>(batch.size());
  LossTerms out{phi / n, psi / n, 0.0};
  out.total = out.phi + out.psi;
  return out;
}

double triplet_accuracy(const SimilarityModel& model, std::span<const TripletSample> data, unsigned threads) {
  if (data.empty()) throw EmptyInput("accuracy over an empty dataset");
  std::vector<unsigned char> correct(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    const auto d = triplet_forward(model, data[i]);
    correct[i] = d.d_plus < d.d_minus;
  });
  const auto hits = std::count(correct.begin(), correct.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

namespace {

class Optimizer {
 public:
  Optimizer(const SimilarityModel& model, const TrainConfig& cfg) : cfg_(cfg) {
    for (const auto* t : model.tensors()) {
      first_.emplace_back(t->size(), 0.0);
      second_.emplace_back(t->size(), 0.0);
    }
  }

  void step(SimilarityModel& model, const SimilarityModel& grad) {
    ++steps_;
    auto params = model.tensors();
    auto grads = grad.tensors();
    const double lr = cfg_.learning_rate;
    if (cfg_.optimizer == OptimizerKind::sgd_momentum) {
      for (std::size_t t = 0; t < params.size(); ++t) {
        auto& w = *params[t];
        const auto& g = *grads[t];
        auto& v = first_[t];
        for (std::size_t i = 0; i < w.size(); ++i) {
          v[i] = cfg_.momentum * v[i] + g[i];
          w[i] -= lr * v[i];
        }
      }
      return;
    }
    const double c1 = 1.0 - std::pow(cfg_.beta1, steps_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, steps_);
    for (std::size_t t = 0; t < params.size(); ++t) {
      auto& w = *params[t];
      const auto& g = *grads[t];
      auto& m = first_[t];
      auto& v = second_[t];
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.adam_epsilon);
      }
    }
  }

 private:
  TrainConfig cfg_;
  int steps_ = 0;
  std::vector<std::vector<double>> first_, second_;
};

}  // namespace

TrainResult train(SimilarityModel model, std::span<const TripletSample> data, const TrainConfig& cfg,
                  std::span<const TripletSample> held_out) {
  cfg.validate();
  if (data.empty()) throw EmptyInput("training set is empty");
  if (!model.all_finite()) throw NonFiniteLoss("initial model has non-finite weights");

  Rng rng(derive_seed(cfg.seed, "shuffle"));
  Optimizer opt(model, cfg);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(data.size()), psi(data.size());
  std::vector<unsigned char> correct(data.size());
  std::vector<TripletSample> batch;
  batch.reserve(static_cast<std::size_t>(cfg.batch_size));

  TrainResult result{model, {}, 0};
  double best_accuracy = -1.0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(data[order[k]]);
      std::optional<GradientResult> step;
      try {
        step.emplace(gradients(model, batch, cfg.threads));
      } catch (const NonFiniteLoss& e) {
        throw TrainingDiverged(e.what(), model);
      }
      const GradientResult& g = *step;
      for (std::size_t k = start; k < end; ++k) {
        const auto& d = g.distances[k - start];
        phi[order[k]] = pair_push_loss(d);
        psi[order[k]] = pair_rank_loss(d);
        correct[order[k]] = d.d_plus < d.d_minus;
      }
      SimilarityModel before = model;
      opt.step(model, g.gradient);
      if (!model.all_finite()) throw TrainingDiverged("weights became non-finite", std::move(before));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t i = 0; i < data.size(); ++i) {
      rec.phi += phi[i];
      rec.psi += psi[i];
    }
    const double n = static_cast<double>(data.size());
    rec.phi /= n;
    rec.psi /= n;
    rec.total = rec.phi + rec.psi;
    rec.train_accuracy = static_cast<double>(std::count(correct.begin(), correct.end(), 1)) / n;
    if (!held_out.empty()) rec.test_accuracy = triplet_accuracy(model, held_out, cfg.threads);
    result.history.push_back(rec);

    if (held_out.empty()) {
      result.model = model;
      result.best_epoch = epoch;
      continue;
    }
    if (*rec.test_accuracy > best_accuracy) {
      best_accuracy = *rec.test_accuracy;
      result.model = model;
      result.best_epoch = epoch;
    } else if (cfg.early_stop_patience > 0 && epoch - result.best_epoch >= cfg.early_stop_patience) {
      break;
    }
  }
  return result;
}

SplitSpec split_by_pairs(const std::vector<std::string>& pair_ids, std::uint64_t seed) {
  const std::set<std::string> unique(pair_ids.begin(), pair_ids.end());
  if (unique.size() < 2) throw InsufficientPairs("need at least two distinct scene pairs to split");
  std::vector<std::string> ids(unique.begin(), unique.end());
  Rng rng(derive_seed(seed, "pair-split"));
  rng.shuffle(ids.begin(), ids.end());
  const std::size_t n_train = (ids.size() + 1) / 2;
  SplitSpec split;
  split.train_pairs.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test_pairs.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  std::sort(split.train_pairs.begin(), split.train_pairs.end());
  std::sort(split.test_pairs.begin(), split.test_pairs.end());
  return split;
}

SplitSpec split_by_pairs(const std::vector<SurveyQuestion>& questions, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& q : questions) ids.push_back(q.pair_id());
  return split_by_pairs(ids, seed);
}

std::vector<std::size_t> subsample_indices(std::size_t size, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  if (count >= size) return idx;
  Rng rng(derive_seed(seed, "subsample"));
  rng.shuffle(idx.begin(), idx.end());
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// ---- bilinear baseline ---------------------------------------------------------

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::VectorXd difference(const FeatureVector& a, const FeatureVector& b, double scale) {
  Eigen::VectorXd d(kFeatureDim);
  for (std::size_t i = 0; i < kFeatureDim; ++i) d[static_cast<Eigen::Index>(i)] = scale * (a[i] - b[i]);
  return d;
}

}  // namespace

double BilinearModel::distance(const FeatureVector& a, const FeatureVector& b) const {
  const Eigen::VectorXd d = difference(a, b, input_scale);
  return d.dot(weight * d);
}

BilinearModel BilinearModel::identity() {
  return {Eigen::MatrixXd::Identity(kFeatureDim, kFeatureDim), 1.0};
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

double bilinear_accuracy(const BilinearModel& model, std::span<const TripletSample> data) {
  if (data.empty()) throw EmptyInput("accuracy over an empty dataset");
  std::size_t hits = 0;
  for (const auto& t : data) hits += model.distance(t.anchor, t.positive) < model.distance(t.anchor, t.negative);
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

BilinearResult train_bilinear_baseline(std::span<const TripletSample> data, const BilinearConfig& cfg) {
  if (data.empty()) throw EmptyInput("baseline training set is empty");
  if (cfg.batch_size < 1) throw RangeError("batch_size must be >= 1");

  double sq = 0.0;
  for (const auto& t : data) {
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
      sq += (t.anchor[i] - t.positive[i]) * (t.anchor[i] - t.positive[i]);
      sq += (t.anchor[i] - t.negative[i]) * (t.anchor[i] - t.negative[i]);
    }
  }
  const double rms = std::sqrt(sq / static_cast<double>(2 * data.size() * kFeatureDim));
  BilinearResult result{BilinearModel::identity(), {}, 0.0};
  result.model.input_scale = rms > 0.0 ? 1.0 / rms : 1.0;
  const double scale = result.model.input_scale;

  const Eigen::Index dim = static_cast<Eigen::Index>(kFeatureDim);
  const auto n = static_cast<Eigen::Index>(data.size());
  RowMatrix plus(n, dim), minus(n, dim);
  for (Eigen::Index r = 0; r < n; ++r) {
    plus.row(r) = difference(data[r].anchor, data[r].positive, scale).transpose();
    minus.row(r) = difference(data[r].anchor, data[r].negative, scale).transpose();
  }

  Rng rng(derive_seed(cfg.seed, "bilinear-shuffle"));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Eigen::MatrixXd& w = result.model.weight;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto m = static_cast<Eigen::Index>(end - start);
      RowMatrix bp(m, dim), bm(m, dim);
      for (Eigen::Index k = 0; k < m; ++k) {
        bp.row(k) = plus.row(order[start + static_cast<std::size_t>(k)]);
        bm.row(k) = minus.row(order[start + static_cast<std::size_t>(k)]);
      }
      const Eigen::VectorXd dp = (bp * w).cwiseProduct(bp).rowwise().sum();
      const Eigen::VectorXd dm = (bm * w).cwiseProduct(bm).rowwise().sum();
      const Eigen::ArrayXd hinge = (cfg.margin + dp.array() - dm.array()).max(0.0);
      epoch_loss += hinge.sum();
      const Eigen::VectorXd active = (hinge > 0.0).cast<double>().matrix();
      const Eigen::MatrixXd grad =
          (bp.transpose() * active.asDiagonal() * bp - bm.transpose() * active.asDiagonal() * bm) /
          static_cast<double>(m);
      w -= cfg.learning_rate * grad;
    }
    w = project_psd(w);
    const double mean_loss = epoch_loss / static_cast<double>(n);
    if (!std::isfinite(mean_loss)) throw NonFiniteLoss("baseline loss is not finite");
    result.loss_history.push_back(mean_loss);
  }
  result.train_accuracy = bilinear_accuracy(result.model, data);
  return result;
}

}  // namespace retarget
