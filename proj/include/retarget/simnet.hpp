#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "retarget/features.hpp"
#include "retarget/triplet.hpp"

namespace retarget {

/// Layer widths of a black-box module: two leaky-rectified hidden layers and
/// a linear output layer.
struct BBMSpec {
  std::size_t in_dim = 1;
  std::size_t h1_dim = 1;
  std::size_t h2_dim = 1;
  std::size_t out_dim = 1;

  friend bool operator==(const BBMSpec&, const BBMSpec&) = default;
};

inline constexpr BBMSpec kBbmPose{17, 14, 10, 6};
inline constexpr BBMSpec kBbmSpatial{12, 10, 8, 6};
inline constexpr BBMSpec kBbmAttention{12, 10, 8, 6};
inline constexpr BBMSpec kBbmFeatureNet{45, 38, 30, 22};
inline constexpr std::size_t kEmbeddingDim = 22;
inline constexpr BBMSpec metric_spec(std::size_t branches) { return {kEmbeddingDim * branches, 44, 44, 1}; }

inline constexpr double kLeakySlope = 0.01;

enum class ModelVariant : std::uint8_t {
  proposed_sfpm_dfn,
  bbm_dfn,
  sfpm_nodfn,
  bbm_nodfn,
  plain_triplet,
};

inline constexpr std::array<ModelVariant, 5> kAllVariants = {
    ModelVariant::proposed_sfpm_dfn, ModelVariant::bbm_dfn, ModelVariant::sfpm_nodfn,
    ModelVariant::bbm_nodfn, ModelVariant::plain_triplet};

std::string_view variant_name(ModelVariant v);
/// Throws UsageError on an unknown name.
ModelVariant parse_variant(std::string_view name);
bool uses_sfpm(ModelVariant v);
bool uses_distance_net(ModelVariant v);

struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weight;  // out_dim x in_dim, row-major
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Intermediate values of one BBM evaluation, kept for backpropagation.
struct BbmTrace {
  std::vector<double> input, z1, a1, z2, a2, z3;
};

class Bbm {
 public:
  Bbm() = default;
  Bbm(BBMSpec spec, bool logistic_output);

  const BBMSpec& spec() const noexcept { return spec_; }
  bool logistic_output() const noexcept { return logistic_output_; }

  /// Throws ShapeMismatch if `input` has the wrong length.
  std::vector<double> forward(std::span<const double> input) const;

  /// Allocation-free evaluation; `output` must have out_dim elements.
  void forward_into(std::span<const double> input, std::span<double> output) const;

  /// Evaluation that records the trace. The returned values are the linear
  /// output (before any logistic squashing).
  void forward_traced(std::span<const double> input, BbmTrace& trace) const;

  /// Accumulates dL/dweights into `grad` given dL/d(linear output). When
  /// `grad_input` is non-empty it receives dL/dinput (overwritten).
  void backward(const BbmTrace& trace, std::span<const double> grad_output, Bbm& grad,
                std::span<double> grad_input = {}) const;

  std::array<DenseLayer, 3>& layers() noexcept { return layers_; }
  const std::array<DenseLayer, 3>& layers() const noexcept { return layers_; }

  friend bool operator==(const Bbm&, const Bbm&) = default;

 private:
  BBMSpec spec_{};
  bool logistic_output_ = false;
  std::array<DenseLayer, 3> layers_{};
};

struct FeatureNetTrace {
  std::vector<BbmTrace> blocks;
};

/// Maps a 45-dim placement descriptor to a 22-dim embedding, either as a
/// subfeature processing module (pose/spatial/attention routed through their
/// own BBMs; interpersonal and stance passed through) or as one plain BBM.
class FeatureNet {
 public:
  enum class Kind : std::uint8_t { sfpm, bbm };

  FeatureNet() = default;
  explicit FeatureNet(Kind kind);

  Kind kind() const noexcept { return kind_; }
  std::vector<Bbm>& blocks() noexcept { return blocks_; }
  const std::vector<Bbm>& blocks() const noexcept { return blocks_; }

  void forward_into(std::span<const double> x, std::span<double> out) const;
  void forward_traced(std::span<const double> x, std::span<double> out, FeatureNetTrace& trace) const;
  void backward(const FeatureNetTrace& trace, std::span<const double> grad_output, FeatureNet& grad) const;

  friend bool operator==(const FeatureNet&, const FeatureNet&) = default;

 private:
  Kind kind_ = Kind::sfpm;
  std::vector<Bbm> blocks_;
};

/// All weights of the similarity predictor. The feature net is shared by the
/// anchor, positive, and negative branches; the distance net (when present)
/// by both difference branches; one metric net scores every pair.
class SimilarityModel {
 public:
  SimilarityModel() = default;

  /// All weights and biases zero.
  static SimilarityModel zeros(ModelVariant variant, std::uint64_t feature_fingerprint = 0);
  /// Uniform Glorot weights, zero biases.
  static SimilarityModel initialized(ModelVariant variant, std::uint64_t seed, std::uint64_t feature_fingerprint);

  ModelVariant variant() const noexcept { return variant_; }
  std::uint64_t feature_fingerprint() const noexcept { return fingerprint_; }
  std::uint64_t seed() const noexcept { return seed_; }

  FeatureNet& feature_net() noexcept { return feature_; }
  const FeatureNet& feature_net() const noexcept { return feature_; }
  FeatureNet* distance_net() noexcept { return distance_ ? &*distance_ : nullptr; }
  const FeatureNet* distance_net() const noexcept { return distance_ ? &*distance_ : nullptr; }
  Bbm& metric_net() noexcept { return metric_; }
  const Bbm& metric_net() const noexcept { return metric_; }

  /// Every BBM in declaration order: feature net blocks, distance net blocks,
  /// metric net.
  std::vector<const Bbm*> modules() const;
  std::vector<Bbm*> modules();

  /// Visits every weight and bias tensor in declaration order.
  template <typename F>
  void for_each_tensor(F&& f) {
    for (Bbm* m : modules())
      for (auto& layer : m->layers()) {
        f(layer.weight);
        f(layer.bias);
      }
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    for (const Bbm* m : modules())
      for (const auto& layer : m->layers()) {
        f(layer.weight);
        f(layer.bias);
      }
  }

  /// Flat view of every tensor in declaration order; pairs element-wise with
  /// the tensors() of any model of the same variant.
  std::vector<std::vector<double>*> tensors();
  std::vector<const std::vector<double>*> tensors() const;

  std::size_t parameter_count() const;
  bool all_finite() const;

  /// Throws FingerprintMismatch unless the model was trained under `cfg`.
  void check_feature_config(const FeatureConfig& cfg) const;

  friend bool operator==(const SimilarityModel&, const SimilarityModel&) = default;

 private:
  ModelVariant variant_ = ModelVariant::proposed_sfpm_dfn;
  std::uint64_t fingerprint_ = 0;
  std::uint64_t seed_ = 0;
  FeatureNet feature_;
  std::optional<FeatureNet> distance_;
  Bbm metric_;
};

/// Scores candidates against one fixed anchor, reusing the anchor embedding.
/// Produces bit-identical values to dissimilarity().
class AnchoredDissimilarity {
 public:
  AnchoredDissimilarity(const SimilarityModel& model, const FeatureVector& anchor);
  double operator()(const FeatureVector& candidate) const;

 private:
  const SimilarityModel* model_;
  FeatureVector anchor_;
  std::array<double, kEmbeddingDim> anchor_embedding_{};
};

/// d(a, b) in (0, 1); anchor-first, not symmetrized.
double dissimilarity(const SimilarityModel& model, const FeatureVector& a, const FeatureVector& b);

DistancePair triplet_forward(const SimilarityModel& model, const TripletSample& t);

struct LossTerms {
  double phi = 0.0;
  double psi = 0.0;
  double total = 0.0;
};

struct GradientResult {
  SimilarityModel gradient;  // same shapes as the model
  LossTerms loss;
  std::vector<DistancePair> distances;  // per sample, batch order
};

/// Analytic gradient of the mean composite loss over `batch`. Samples are
/// reduced in fixed-size chunks in index order, so the result does not
/// depend on `threads`. Throws NonFiniteLoss on NaN distances.
GradientResult gradients(const SimilarityModel& model, std::span<const TripletSample> batch, unsigned threads = 1);

// ---- model file ------------------------------------------------------------

std::string save_model(const SimilarityModel& model);
/// Throws ParseError on malformed/truncated input and VariantMismatch when the
/// stored shapes do not match the declared variant.
SimilarityModel load_model(std::string_view bytes);
void save_model_file(const SimilarityModel& model, const std::filesystem::path& path);
SimilarityModel load_model_file(const std::filesystem::path& path);

}  // namespace retarget
