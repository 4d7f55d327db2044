#include "retarget/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "retarget/errors.hpp"
#include "retarget/rng.hpp"

namespace retarget {

void FeatureConfig::validate() const {
  const double positives[] = {va_max_distance,   va_max_angle,        sp_max_distance,
                              pose_inner_radius, pose_outer_radius,   pose_sample_step,
                              norm_distance_scale, norm_height_scale};
  for (double v : positives) {
    if (!(v > 0.0) || !std::isfinite(v)) throw RangeError("feature constants must be finite and positive");
  }
  if (pose_inner_radius >= pose_outer_radius) throw RangeError("pose_inner_radius must be < pose_outer_radius");
  if (pose_sectors != static_cast<int>(kPaDim) - 1)
    throw RangeError("pose_sectors must be " + std::to_string(kPaDim - 1) + " for the 17-element pose feature");
}

std::uint64_t FeatureConfig::fingerprint() const {
  std::string bytes;
  auto put = [&](double v) {
    char raw[sizeof(double)];
    std::memcpy(raw, &v, sizeof v);
    bytes.append(raw, sizeof raw);
  };
  put(va_max_distance);
  put(va_max_angle);
  put(sp_max_distance);
  put(pose_inner_radius);
  put(pose_outer_radius);
  put(static_cast<double>(pose_sectors));
  put(pose_sample_step);
  put(norm_distance_scale);
  put(norm_height_scale);
  return fnv1a(bytes);
}

PoseStencil make_pose_stencil(const FeatureConfig& cfg) {
  cfg.validate();
  PoseStencil stencil;
  const double step = cfg.pose_sample_step;
  // cell-centered lattice: no sample sits on the axes through the person
  const int reach = static_cast<int>(std::ceil(cfg.pose_outer_radius / step));
  const double sector_width = kTwoPi / cfg.pose_sectors;
  constexpr double kEdge = 1e-9;
  for (int j = -reach; j < reach; ++j) {
    for (int i = -reach; i < reach; ++i) {
      const Vec2 local{(i + 0.5) * step, (j + 0.5) * step};
      const double r = norm(local);
      std::uint8_t region;
      if (r <= cfg.pose_inner_radius + kEdge) {
        region = 0;
      } else if (r <= cfg.pose_outer_radius + kEdge) {
        const double a = std::atan2(local.y, local.x);
        int sector = static_cast<int>(std::floor((a + 0.5 * sector_width) / sector_width));
        sector = ((sector % cfg.pose_sectors) + cfg.pose_sectors) % cfg.pose_sectors;
        region = static_cast<std::uint8_t>(1 + sector);
      } else {
        continue;
      }
      stencil.offsets.push_back(local);
      stencil.region.push_back(region);
      ++stencil.counts[region];
    }
  }
  return stencil;
}

InterpersonalFeature interpersonal(const Placement& self, const Placement& other, const FeatureConfig& cfg) {
  const Vec2 v = other.position - self.position;
  const double d = norm(v);
  if (!(d > 1e-12)) throw DegenerateGeometry("interpersonal feature undefined for coincident positions");
  const double toward_other = std::atan2(v.y, v.x);
  const double toward_self = toward_other + kPi;
  return {std::min(1.0, d / cfg.norm_distance_scale), angle_between(self.heading, toward_other) / kPi,
          angle_between(other.heading, toward_self) / kPi};
}

AttentionFeature visual_attention(const Placement& p, const Scene& scene, const FeatureConfig& cfg) {
  AttentionFeature va{};
  const double dmax = cfg.va_max_distance;
  const double amax = cfg.va_max_angle;
  for (const auto& obj : scene.objects()) {
    const Vec2 v = obj.attention_point - p.position;
    const double d = norm(v);
    if (d >= dmax) continue;
    // an object at the viewer's own position is dead ahead by convention
    const double dev = d > 1e-12 ? rad_to_deg(angle_between(std::atan2(v.y, v.x), p.heading)) : 0.0;
    if (dev >= amax) continue;
    va[category_index(obj.category)] += (dmax - d) * (amax - dev);
  }
  for (auto& v : va) v /= dmax * amax;
  return va;
}

PoseFeature pose_accommodation(const Placement& p, const Scene& scene, const FeatureConfig& cfg,
                               const PoseStencil& stencil) {
  std::array<double, kPaDim> sums{};
  const double c = std::cos(p.heading);
  const double s = std::sin(p.heading);
  for (std::size_t k = 0; k < stencil.offsets.size(); ++k) {
    const Vec2 o = stencil.offsets[k];
    const Vec2 w{p.position.x + c * o.x - s * o.y, p.position.y + s * o.x + c * o.y};
    sums[stencil.region[k]] += scene.height_at(w);
  }
  PoseFeature pa{};
  for (std::size_t r = 0; r < kPaDim; ++r) {
    if (stencil.counts[r] == 0) continue;
    const double mean = sums[r] / stencil.counts[r];
    pa[r] = std::clamp(mean / cfg.norm_height_scale, 0.0, 1.0);
  }
  return pa;
}

PoseFeature pose_accommodation(const Placement& p, const Scene& scene, const FeatureConfig& cfg) {
  return pose_accommodation(p, scene, cfg, make_pose_stencil(cfg));
}

SpatialFeature spatial(const Placement& p, const Scene& scene, const FeatureConfig& cfg) {
  SpatialFeature sp{};
  const double dmax = cfg.sp_max_distance;
  for (const auto& obj : scene.objects()) {
    const double d = distance(obj.attention_point, p.position);
    if (d < dmax) sp[category_index(obj.category)] += dmax - d;
  }
  for (auto& v : sp) v /= dmax;
  return sp;
}

FeatureVector assemble(const InterpersonalFeature& ip, const AttentionFeature& va, const PoseFeature& pa,
                       double ss, const SpatialFeature& sp) {
  FeatureVector x{};
  std::copy(ip.begin(), ip.end(), x.begin() + kIpOffset);
  std::copy(va.begin(), va.end(), x.begin() + kVaOffset);
  std::copy(pa.begin(), pa.end(), x.begin() + kPaOffset);
  x[kSsOffset] = ss;
  std::copy(sp.begin(), sp.end(), x.begin() + kSpOffset);
  return x;
}

FeatureVector extract(const Placement& self, const Placement& other, const Scene& scene, const FeatureConfig& cfg) {
  return assemble(interpersonal(self, other, cfg), visual_attention(self, scene, cfg),
                  pose_accommodation(self, scene, cfg), stance_value(scene.derive_stance(self.position)),
                  spatial(self, scene, cfg));
}

}  // namespace retarget
