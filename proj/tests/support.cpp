#include "support.hpp"

#include <algorithm>
#include <cmath>

#include "retarget/trainer.hpp"

namespace retarget::testing {

Scene room(double width, double depth, std::vector<FurnitureObject> objects, std::string id) {
  return Scene(std::move(id), {{0, 0}, {width, 0}, {width, depth}, {0, depth}}, std::move(objects));
}

FurnitureObject object_at(const std::string& id, ObjectCategory c, Vec2 from, double dist, double deg) {
  const Vec2 at = from + dist * Vec2{std::cos(deg_to_rad(deg)), std::sin(deg_to_rad(deg))};
  return make_object(id, c, rectangle(at, 0.2, 0.2), 1.0);
}

PoseFeature pose_oracle(const Placement& p, const Scene& scene, const FeatureConfig& cfg, double pitch) {
  std::array<double, kPaDim> sum{};
  std::array<double, kPaDim> count{};
  const int n = static_cast<int>(std::ceil(cfg.pose_outer_radius / pitch));
  const double sector = kTwoPi / cfg.pose_sectors;
  for (int i = -n; i <= n; ++i) {
    for (int j = -n; j <= n; ++j) {
      const Vec2 off{(i + 0.5) * pitch, (j + 0.5) * pitch};
      const double r = norm(off);
      if (r > cfg.pose_outer_radius) continue;
      std::size_t region = 0;
      if (r > cfg.pose_inner_radius) {
        // angle relative to the heading, shifted so sector 1 is centered on it
        double rel = std::atan2(off.y, off.x) - p.heading + sector / 2;
        rel = std::fmod(std::fmod(rel, kTwoPi) + kTwoPi, kTwoPi);
        region = 1 + static_cast<std::size_t>(std::floor(rel / sector)) % cfg.pose_sectors;
      }
      sum[region] += scene.height_at(p.position + off);
      count[region] += 1;
    }
  }
  PoseFeature out{};
  for (std::size_t k = 0; k < kPaDim; ++k) out[k] = std::clamp(sum[k] / count[k] / cfg.norm_height_scale, 0.0, 1.0);
  return out;
}

FeatureVector random_features(Rng& rng) {
  FeatureVector v{};
  for (auto& x : v) x = rng.uniform();
  return v;
}

std::vector<TripletSample> random_triplets(std::uint64_t seed, std::size_t count) {
  Rng rng(seed);
  std::vector<TripletSample> out(count);
  for (auto& t : out) {
    t.anchor = random_features(rng);
    t.positive = random_features(rng);
    t.negative = random_features(rng);
  }
  return out;
}

double batch_loss(const SimilarityModel& model, const std::vector<TripletSample>& batch) {
  std::vector<DistancePair> d;
  for (const auto& t : batch) d.push_back(triplet_forward(model, t));
  return total_loss(d).total;
}

GradientCheck check_gradients(const SimilarityModel& model, const std::vector<TripletSample>& batch, double h) {
  const GradientResult g = gradients(model, batch, 1);
  SimilarityModel probe = model;
  auto params = probe.tensors();
  auto analytic = g.gradient.tensors();
  GradientCheck out;
  out.tensors = params.size();
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& w = *params[t];
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + h;
      const double up = batch_loss(probe, batch);
      w[i] = saved - h;
      const double down = batch_loss(probe, batch);
      w[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = (*analytic[t])[i];
      diff += (a - numeric) * (a - numeric);
      na += a * a;
      nn += numeric * numeric;
    }
    const double scale = std::max(std::sqrt(na), std::sqrt(nn));
    if (scale > 1e-12) out.worst_relative_error = std::max(out.worst_relative_error, std::sqrt(diff) / scale);
  }
  return out;
}

std::vector<TripletSample> context_dependent_triplets(std::uint64_t seed, std::size_t count) {
  Rng rng(seed);
  std::vector<TripletSample> out(count);
  for (std::size_t n = 0; n < count; ++n) {
    auto& t = out[n];
    t.anchor = random_features(rng);
    for (std::size_t i = kPaOffset; i < kPaOffset + kPaDim; ++i) t.anchor[i] *= 0.5;
    const bool sitting = n % 2 == 1;
    t.anchor[kSsOffset] = sitting ? 1.0 : 0.0;
    t.positive = t.anchor;
    t.negative = t.anchor;
    const double u = rng.uniform(0.3, 0.5);
    const std::size_t near = sitting ? kSpOffset : kVaOffset;
    const std::size_t far = sitting ? kVaOffset : kSpOffset;
    // the positive moves twice as far as the negative, along the element this context ignores
    const double sign_p = t.anchor[near] > 0.5 ? -1.0 : 1.0;
    const double sign_n = t.anchor[far] > 0.5 ? -1.0 : 1.0;
    t.positive[near] += sign_p * u;
    t.negative[far] += sign_n * u / 2;
  }
  return out;
}

double best_grid_bilinear_accuracy(const std::vector<TripletSample>& data, int steps) {
  double best = 0.0;
  for (int ia = 0; ia <= steps; ++ia)
    for (int ib = 0; ib <= steps; ++ib)
      for (int ic = -steps; ic <= steps; ++ic) {
        const double a = static_cast<double>(ia) / steps, b = static_cast<double>(ib) / steps;
        const double c = static_cast<double>(ic) / steps;
        if (c * c > a * b) continue;
        auto q = [&](const FeatureVector& x, const FeatureVector& y) {
          const double u = x[kVaOffset] - y[kVaOffset], v = x[kSpOffset] - y[kSpOffset];
          return a * u * u + 2 * c * u * v + b * v * v;
        };
        std::size_t ok = 0;
        for (const auto& t : data) ok += q(t.anchor, t.positive) < q(t.anchor, t.negative) ? 1 : 0;
        best = std::max(best, static_cast<double>(ok) / static_cast<double>(data.size()));
      }
  return best;
}

std::vector<ScenePair> synthetic_pairs(std::uint64_t seed, int count) { return generate_scene_pairs(seed, count); }

}  // namespace retarget::testing
