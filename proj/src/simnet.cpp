#include "retarget/simnet.hpp"

#include <algorithm>
#include <cmath>

#include "retarget/errors.hpp"
#include "retarget/loss.hpp"
#include "retarget/parallel.hpp"
#include "retarget/rng.hpp"

namespace retarget {

namespace {

constexpr std::size_t kMaxHidden = 256;
constexpr std::size_t kGradientChunk = 8;

inline double leaky(double z) { return z > 0.0 ? z : kLeakySlope * z; }
inline double leaky_slope(double z) { return z > 0.0 ? 1.0 : kLeakySlope; }
inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline void dense(const DenseLayer& layer, const double* in, double* out) {
  const double* w = layer.weight.data();
  for (std::size_t o = 0; o < layer.out_dim; ++o, w += layer.in_dim) {
    double acc = layer.bias[o];
    for (std::size_t i = 0; i < layer.in_dim; ++i) acc += w[i] * in[i];
    out[o] = acc;
  }
}

DenseLayer make_layer(std::size_t in, std::size_t out) {
  return {in, out, std::vector<double>(in * out, 0.0), std::vector<double>(out, 0.0)};
}

// grad_in = W^T g
void dense_backward(const DenseLayer& layer, const double* input, const double* g, DenseLayer& grad,
                    double* grad_in) {
  for (std::size_t o = 0; o < layer.out_dim; ++o) {
    const double go = g[o];
    grad.bias[o] += go;
    if (go == 0.0) continue;
    double* gw = grad.weight.data() + o * layer.in_dim;
    for (std::size_t i = 0; i < layer.in_dim; ++i) gw[i] += go * input[i];
  }
  if (grad_in == nullptr) return;
  std::fill(grad_in, grad_in + layer.in_dim, 0.0);
  const double* w = layer.weight.data();
  for (std::size_t o = 0; o < layer.out_dim; ++o, w += layer.in_dim) {
    const double go = g[o];
    if (go == 0.0) continue;
    for (std::size_t i = 0; i < layer.in_dim; ++i) grad_in[i] += w[i] * go;
  }
}

}  // namespace

// ---- variants ----------------------------------------------------------------

std::string_view variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::proposed_sfpm_dfn:
      return "proposed";
    case ModelVariant::bbm_dfn:
      return "bbm_dfn";
    case ModelVariant::sfpm_nodfn:
      return "sfpm_nodfn";
    case ModelVariant::bbm_nodfn:
      return "bbm_nodfn";
    case ModelVariant::plain_triplet:
      return "plain_triplet";
  }
  return "unknown";
}

ModelVariant parse_variant(std::string_view name) {
  if (name == "proposed_sfpm_dfn" || name == "sfpm_dfn") return ModelVariant::proposed_sfpm_dfn;
  for (auto v : kAllVariants) {
    if (variant_name(v) == name) return v;
  }
  throw UsageError("unknown model variant \"" + std::string(name) +
                   "\" (expected proposed, bbm_dfn, sfpm_nodfn, bbm_nodfn, plain_triplet)");
}

bool uses_sfpm(ModelVariant v) {
  return v == ModelVariant::proposed_sfpm_dfn || v == ModelVariant::sfpm_nodfn;
}

bool uses_distance_net(ModelVariant v) {
  return v == ModelVariant::proposed_sfpm_dfn || v == ModelVariant::bbm_dfn;
}

// ---- BBM ---------------------------------------------------------------------

Bbm::Bbm(BBMSpec spec, bool logistic_output) : spec_(spec), logistic_output_(logistic_output) {
  if (spec.in_dim == 0 || spec.h1_dim == 0 || spec.h2_dim == 0 || spec.out_dim == 0)
    throw ShapeMismatch("BBM dimensions must be >= 1");
  if (spec.h1_dim > kMaxHidden || spec.h2_dim > kMaxHidden || spec.out_dim > kMaxHidden)
    throw ShapeMismatch("BBM layer wider than supported");
  layers_ = {make_layer(spec.in_dim, spec.h1_dim), make_layer(spec.h1_dim, spec.h2_dim),
             make_layer(spec.h2_dim, spec.out_dim)};
}

void Bbm::forward_into(std::span<const double> input, std::span<double> output) const {
  if (input.size() != spec_.in_dim || output.size() != spec_.out_dim)
    throw ShapeMismatch("BBM expects " + std::to_string(spec_.in_dim) + " inputs, got " +
                        std::to_string(input.size()));
  std::array<double, kMaxHidden> h1, h2;
  dense(layers_[0], input.data(), h1.data());
  for (std::size_t i = 0; i < spec_.h1_dim; ++i) h1[i] = leaky(h1[i]);
  dense(layers_[1], h1.data(), h2.data());
  for (std::size_t i = 0; i < spec_.h2_dim; ++i) h2[i] = leaky(h2[i]);
  dense(layers_[2], h2.data(), output.data());
  if (logistic_output_)
    for (auto& v : output) v = logistic(v);
}

std::vector<double> Bbm::forward(std::span<const double> input) const {
  std::vector<double> out(spec_.out_dim);
  forward_into(input, out);
  return out;
}

void Bbm::forward_traced(std::span<const double> input, BbmTrace& t) const {
  if (input.size() != spec_.in_dim)
    throw ShapeMismatch("BBM expects " + std::to_string(spec_.in_dim) + " inputs, got " +
                        std::to_string(input.size()));
  t.input.assign(input.begin(), input.end());
  t.z1.resize(spec_.h1_dim);
  t.a1.resize(spec_.h1_dim);
  t.z2.resize(spec_.h2_dim);
  t.a2.resize(spec_.h2_dim);
  t.z3.resize(spec_.out_dim);
  dense(layers_[0], t.input.data(), t.z1.data());
  for (std::size_t i = 0; i < spec_.h1_dim; ++i) t.a1[i] = leaky(t.z1[i]);
  dense(layers_[1], t.a1.data(), t.z2.data());
  for (std::size_t i = 0; i < spec_.h2_dim; ++i) t.a2[i] = leaky(t.z2[i]);
  dense(layers_[2], t.a2.data(), t.z3.data());
}

void Bbm::backward(const BbmTrace& t, std::span<const double> grad_output, Bbm& grad,
                   std::span<double> grad_input) const {
  std::array<double, kMaxHidden> g2, g1;
  dense_backward(layers_[2], t.a2.data(), grad_output.data(), grad.layers_[2], g2.data());
  for (std::size_t i = 0; i < spec_.h2_dim; ++i) g2[i] *= leaky_slope(t.z2[i]);
  dense_backward(layers_[1], t.a1.data(), g2.data(), grad.layers_[1], g1.data());
  for (std::size_t i = 0; i < spec_.h1_dim; ++i) g1[i] *= leaky_slope(t.z1[i]);
  dense_backward(layers_[0], t.input.data(), g1.data(), grad.layers_[0],
                 grad_input.empty() ? nullptr : grad_input.data());
}

// ---- FeatureNet --------------------------------------------------------------

namespace {

// SFPM output layout: [pose(6), spatial(6), attention(6), interpersonal(3), stance(1)]
struct Route {
  std::size_t offset;
  std::size_t dim;
};
constexpr std::array<Route, 3> kSfpmRoutes = {{{kPaOffset, kPaDim}, {kSpOffset, kSpDim}, {kVaOffset, kVaDim}}};
constexpr std::size_t kBlockOut = 6;
constexpr std::size_t kPassOffset = 3 * kBlockOut;

}  // namespace

FeatureNet::FeatureNet(Kind kind) : kind_(kind) {
  if (kind == Kind::sfpm) {
    blocks_ = {Bbm(kBbmPose, false), Bbm(kBbmSpatial, false), Bbm(kBbmAttention, false)};
  } else {
    blocks_ = {Bbm(kBbmFeatureNet, false)};
  }
}

void FeatureNet::forward_into(std::span<const double> x, std::span<double> out) const {
  if (x.size() != kFeatureDim || out.size() != kEmbeddingDim)
    throw ShapeMismatch("FeatureNet maps " + std::to_string(kFeatureDim) + " -> " + std::to_string(kEmbeddingDim));
  if (kind_ == Kind::bbm) {
    blocks_[0].forward_into(x, out);
    return;
  }
  for (std::size_t b = 0; b < 3; ++b)
    blocks_[b].forward_into(x.subspan(kSfpmRoutes[b].offset, kSfpmRoutes[b].dim), out.subspan(b * kBlockOut, kBlockOut));
  std::copy_n(x.begin() + kIpOffset, kIpDim, out.begin() + kPassOffset);
  out[kPassOffset + kIpDim] = x[kSsOffset];
}

void FeatureNet::forward_traced(std::span<const double> x, std::span<double> out, FeatureNetTrace& trace) const {
  if (x.size() != kFeatureDim || out.size() != kEmbeddingDim)
    throw ShapeMismatch("FeatureNet maps " + std::to_string(kFeatureDim) + " -> " + std::to_string(kEmbeddingDim));
  trace.blocks.resize(blocks_.size());
  if (kind_ == Kind::bbm) {
    blocks_[0].forward_traced(x, trace.blocks[0]);
    std::copy(trace.blocks[0].z3.begin(), trace.blocks[0].z3.end(), out.begin());
    return;
  }
  for (std::size_t b = 0; b < 3; ++b) {
    blocks_[b].forward_traced(x.subspan(kSfpmRoutes[b].offset, kSfpmRoutes[b].dim), trace.blocks[b]);
    std::copy(trace.blocks[b].z3.begin(), trace.blocks[b].z3.end(), out.begin() + b * kBlockOut);
  }
  std::copy_n(x.begin() + kIpOffset, kIpDim, out.begin() + kPassOffset);
  out[kPassOffset + kIpDim] = x[kSsOffset];
}

void FeatureNet::backward(const FeatureNetTrace& trace, std::span<const double> grad_output, FeatureNet& grad) const {
  if (kind_ == Kind::bbm) {
    blocks_[0].backward(trace.blocks[0], grad_output, grad.blocks_[0]);
    return;
  }
  for (std::size_t b = 0; b < 3; ++b)
    blocks_[b].backward(trace.blocks[b], grad_output.subspan(b * kBlockOut, kBlockOut), grad.blocks_[b]);
}

// ---- SimilarityModel ---------------------------------------------------------

SimilarityModel SimilarityModel::zeros(ModelVariant variant, std::uint64_t feature_fingerprint) {
  SimilarityModel m;
  m.variant_ = variant;
  m.fingerprint_ = feature_fingerprint;
  const auto kind = uses_sfpm(variant) ? FeatureNet::Kind::sfpm : FeatureNet::Kind::bbm;
  m.feature_ = FeatureNet(kind);
  if (uses_distance_net(variant)) m.distance_ = FeatureNet(kind);
  m.metric_ = Bbm(metric_spec(uses_distance_net(variant) ? 3 : 2), true);
  return m;
}

SimilarityModel SimilarityModel::initialized(ModelVariant variant, std::uint64_t seed,
                                             std::uint64_t feature_fingerprint) {
  SimilarityModel m = zeros(variant, feature_fingerprint);
  m.seed_ = seed;
  Rng rng(derive_seed(seed, "weight-init"));
  for (Bbm* module : m.modules()) {
    for (auto& layer : module->layers()) {
      const double limit = std::sqrt(6.0 / static_cast<double>(layer.in_dim + layer.out_dim));
      for (auto& w : layer.weight) w = rng.uniform(-limit, limit);
    }
  }
  return m;
}

std::vector<const Bbm*> SimilarityModel::modules() const {
  std::vector<const Bbm*> out;
  for (const auto& b : feature_.blocks()) out.push_back(&b);
  if (distance_)
    for (const auto& b : distance_->blocks()) out.push_back(&b);
  out.push_back(&metric_);
  return out;
}

std::vector<Bbm*> SimilarityModel::modules() {
  std::vector<Bbm*> out;
  for (auto& b : feature_.blocks()) out.push_back(&b);
  if (distance_)
    for (auto& b : distance_->blocks()) out.push_back(&b);
  out.push_back(&metric_);
  return out;
}

std::vector<std::vector<double>*> SimilarityModel::tensors() {
  std::vector<std::vector<double>*> out;
  for_each_tensor([&](std::vector<double>& t) { out.push_back(&t); });
  return out;
}

std::vector<const std::vector<double>*> SimilarityModel::tensors() const {
  std::vector<const std::vector<double>*> out;
  for_each_tensor([&](const std::vector<double>& t) { out.push_back(&t); });
  return out;
}

std::size_t SimilarityModel::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const std::vector<double>& t) { n += t.size(); });
  return n;
}

bool SimilarityModel::all_finite() const {
  bool ok = true;
  for_each_tensor([&](const std::vector<double>& t) {
    for (double v : t) ok = ok && std::isfinite(v);
  });
  return ok;
}

void SimilarityModel::check_feature_config(const FeatureConfig& cfg) const {
  if (cfg.fingerprint() != fingerprint_)
    throw FingerprintMismatch("model was trained under a different feature configuration");
}

// ---- inference ---------------------------------------------------------------

AnchoredDissimilarity::AnchoredDissimilarity(const SimilarityModel& model, const FeatureVector& anchor)
    : model_(&model), anchor_(anchor) {
  model.feature_net().forward_into(anchor_, anchor_embedding_);
}

double AnchoredDissimilarity::operator()(const FeatureVector& candidate) const {
  std::array<double, 3 * kEmbeddingDim> joint;
  std::copy(anchor_embedding_.begin(), anchor_embedding_.end(), joint.begin());
  model_->feature_net().forward_into(candidate, std::span(joint).subspan(kEmbeddingDim, kEmbeddingDim));
  std::size_t width = 2 * kEmbeddingDim;
  if (const FeatureNet* dn = model_->distance_net()) {
    FeatureVector diff;
    for (std::size_t i = 0; i < kFeatureDim; ++i) diff[i] = std::abs(anchor_[i] - candidate[i]);
    dn->forward_into(diff, std::span(joint).subspan(2 * kEmbeddingDim, kEmbeddingDim));
    width = 3 * kEmbeddingDim;
  }
  double d;
  model_->metric_net().forward_into(std::span(joint).first(width), std::span(&d, 1));
  return d;
}

double dissimilarity(const SimilarityModel& model, const FeatureVector& a, const FeatureVector& b) {
  return AnchoredDissimilarity(model, a)(b);
}

DistancePair triplet_forward(const SimilarityModel& model, const TripletSample& t) {
  const AnchoredDissimilarity score(model, t.anchor);
  return {score(t.positive), score(t.negative)};
}

// ---- gradients ---------------------------------------------------------------

namespace {

struct BranchTrace {
  FeatureNetTrace candidate;
  FeatureNetTrace difference;
  BbmTrace metric;
  std::array<double, 3 * kEmbeddingDim> joint{};
};

// Forward through one (anchor, candidate) branch; returns the metric logit.
double branch_forward(const SimilarityModel& model, const FeatureVector& anchor,
                      std::span<const double> anchor_embedding, const FeatureVector& candidate,
                      BranchTrace& bt) {
  std::copy(anchor_embedding.begin(), anchor_embedding.end(), bt.joint.begin());
  model.feature_net().forward_traced(candidate, std::span(bt.joint).subspan(kEmbeddingDim, kEmbeddingDim),
                                     bt.candidate);
  std::size_t width = 2 * kEmbeddingDim;
  if (const FeatureNet* dn = model.distance_net()) {
    FeatureVector diff;
    for (std::size_t i = 0; i < kFeatureDim; ++i) diff[i] = std::abs(anchor[i] - candidate[i]);
    dn->forward_traced(diff, std::span(bt.joint).subspan(2 * kEmbeddingDim, kEmbeddingDim), bt.difference);
    width = 3 * kEmbeddingDim;
  }
  model.metric_net().forward_traced(std::span<const double>(bt.joint).first(width), bt.metric);
  return bt.metric.z3[0];
}

void add_into(SimilarityModel& dst, const SimilarityModel& src) {
  auto d = dst.tensors();
  auto s = src.tensors();
  for (std::size_t t = 0; t < d.size(); ++t) {
    auto& dv = *d[t];
    const auto& sv = *s[t];
    for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += sv[i];
  }
}

}  // namespace

GradientResult gradients(const SimilarityModel& model, std::span<const TripletSample> batch, unsigned threads) {
  if (batch.empty()) throw EmptyInput("gradient batch is empty");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const SimilarityModel zero = SimilarityModel::zeros(model.variant(), model.feature_fingerprint());

  const std::size_t chunks = (batch.size() + kGradientChunk - 1) / kGradientChunk;
  std::vector<SimilarityModel> partial(chunks, zero);
  std::vector<DistancePair> distances(batch.size());
  std::vector<double> phi(batch.size()), psi(batch.size());

  parallel_for(chunks, threads, [&](std::size_t c) {
    SimilarityModel& grad = partial[c];
    FeatureNetTrace anchor_trace;
    BranchTrace plus, minus;
    std::array<double, kEmbeddingDim> anchor_emb;
    std::array<double, 3 * kEmbeddingDim> g_plus, g_minus;
    std::array<double, kEmbeddingDim> g_anchor;
    const std::size_t end = std::min(batch.size(), (c + 1) * kGradientChunk);
    for (std::size_t s = c * kGradientChunk; s < end; ++s) {
      const TripletSample& t = batch[s];
      model.feature_net().forward_traced(t.anchor, anchor_emb, anchor_trace);
      const double z_plus = branch_forward(model, t.anchor, anchor_emb, t.positive, plus);
      const double z_minus = branch_forward(model, t.anchor, anchor_emb, t.negative, minus);
      const double dp = logistic(z_plus);
      const double dm = logistic(z_minus);
      if (!std::isfinite(dp) || !std::isfinite(dm)) throw NonFiniteLoss("non-finite dissimilarity in batch");
      const DistancePair pair{dp, dm};
      distances[s] = pair;
      phi[s] = pair_push_loss(pair);
      psi[s] = pair_rank_loss(pair);

      // d/dz of -log(1 - sigmoid(z)) is sigmoid(z); of -log(sigmoid(z)) is -(1 - sigmoid(z)).
      const bool plus_live = dp > kDistanceEpsilon && dp < 1.0 - kDistanceEpsilon;
      const bool minus_live = dm > kDistanceEpsilon && dm < 1.0 - kDistanceEpsilon;
      double gz_plus = plus_live ? dp : 0.0;
      double gz_minus = minus_live ? -(1.0 - dm) : 0.0;
      if (clamp_distance(dp) > clamp_distance(dm)) {
        if (plus_live) gz_plus += dp * (1.0 - dp);
        if (minus_live) gz_minus -= dm * (1.0 - dm);
      }
      gz_plus *= inv_n;
      gz_minus *= inv_n;

      const std::size_t width = model.distance_net() ? 3 * kEmbeddingDim : 2 * kEmbeddingDim;
      model.metric_net().backward(plus.metric, std::span(&gz_plus, 1), grad.metric_net(),
                                  std::span(g_plus).first(width));
      model.metric_net().backward(minus.metric, std::span(&gz_minus, 1), grad.metric_net(),
                                  std::span(g_minus).first(width));
      for (std::size_t i = 0; i < kEmbeddingDim; ++i) g_anchor[i] = g_plus[i] + g_minus[i];
      model.feature_net().backward(anchor_trace, g_anchor, grad.feature_net());
      model.feature_net().backward(plus.candidate, std::span(g_plus).subspan(kEmbeddingDim, kEmbeddingDim),
                                   grad.feature_net());
      model.feature_net().backward(minus.candidate, std::span(g_minus).subspan(kEmbeddingDim, kEmbeddingDim),
                                   grad.feature_net());
      if (const FeatureNet* dn = model.distance_net()) {
        dn->backward(plus.difference, std::span(g_plus).subspan(2 * kEmbeddingDim, kEmbeddingDim),
                     *grad.distance_net());
        dn->backward(minus.difference, std::span(g_minus).subspan(2 * kEmbeddingDim, kEmbeddingDim),
                     *grad.distance_net());
      }
    }
  });

  GradientResult result{zero, {}, std::move(distances)};
  for (const auto& p : partial) add_into(result.gradient, p);
  double phi_sum = 0.0, psi_sum = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    phi_sum += phi[s];
    psi_sum += psi[s];
  }
  result.loss.phi = phi_sum * inv_n;
  result.loss.psi = psi_sum * inv_n;
  result.loss.total = result.loss.phi + result.loss.psi;
  if (!std::isfinite(result.loss.total)) throw NonFiniteLoss("composite loss is not finite");
  return result;
}

}  // namespace retarget
