#include <cmath>

#include "doctest.h"
#include "retarget/errors.hpp"
#include "retarget/features.hpp"
#include "retarget/rng.hpp"
#include "support.hpp"

using namespace retarget;
using retarget::testing::object_at;
using retarget::testing::pose_oracle;
using retarget::testing::room;

namespace {

// A small object whose attention point sits at `dist` meters and `deg`
// degrees off the heading of a person at `from` facing +x.
Placement random_placement(const Scene& s, Rng& rng) { return random_free_placement(s, rng, 0.3, 0.3); }

}  // namespace

TEST_CASE("feature layout") {
  CHECK(kFeatureDim == 45);
  CHECK(kVaOffset == 3);
  CHECK(kPaOffset == 15);
  CHECK(kSsOffset == 32);
  CHECK(kSpOffset == 33);
}

TEST_CASE("config validation and fingerprint") {
  FeatureConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  FeatureConfig other = cfg;
  CHECK(other.fingerprint() == cfg.fingerprint());
  other.va_max_distance = 4.5;
  CHECK(other.fingerprint() != cfg.fingerprint());
  FeatureConfig bad = cfg;
  bad.pose_inner_radius = 0.6;
  CHECK_THROWS_AS(bad.validate(), RangeError);
  bad = cfg;
  bad.sp_max_distance = 0;
  CHECK_THROWS_AS(bad.validate(), RangeError);
}

TEST_CASE("interpersonal hand cases") {
  const FeatureConfig cfg;
  auto ip = interpersonal(Placement({0, 0}, 0), Placement({2, 0}, kPi), cfg);
  CHECK(ip[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(ip[1] == doctest::Approx(0.0));
  CHECK(ip[2] == doctest::Approx(0.0));
  ip = interpersonal(Placement({0, 0}, 0), Placement({0, 1}, 0), cfg);
  CHECK(ip[0] == doctest::Approx(0.2));
  CHECK(ip[1] == doctest::Approx(0.5));
  CHECK(ip[2] == doctest::Approx(0.5));
  ip = interpersonal(Placement({0, 0}, 0), Placement({-3, 0}, 0), cfg);
  CHECK(ip[0] == doctest::Approx(0.6));
  CHECK(ip[1] == doctest::Approx(1.0));
  CHECK(ip[2] == doctest::Approx(0.0));
  ip = interpersonal(Placement({0, 0}, 0), Placement({9, 0}, 0), cfg);
  CHECK(ip[0] == 1.0);
  CHECK_THROWS_AS(interpersonal(Placement({1, 1}, 0), Placement({1, 1}, 2), cfg), DegenerateGeometry);
}

TEST_CASE("interpersonal swaps its angles under party exchange") {
  const FeatureConfig cfg;
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Placement a({rng.uniform(-3, 3), rng.uniform(-3, 3)}, rng.uniform(0, kTwoPi));
    const Placement b({rng.uniform(-3, 3), rng.uniform(-3, 3)}, rng.uniform(0, kTwoPi));
    const auto ab = interpersonal(a, b, cfg);
    const auto ba = interpersonal(b, a, cfg);
    CHECK(ab[0] == ba[0]);
    CHECK(ab[1] == doctest::Approx(ba[2]).epsilon(1e-12));
    CHECK(ab[2] == doctest::Approx(ba[1]).epsilon(1e-12));
    for (double v : ab) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("visual attention hand cases") {
  const FeatureConfig cfg;
  const Vec2 me{1, 3};
  const Placement p(me, 0);
  const Scene tv = room(7, 6, {object_at("tv", ObjectCategory::tv, me, 2.0, 10.0)});
  const auto va = visual_attention(p, tv, cfg);
  CHECK(va[category_index(ObjectCategory::tv)] == doctest::Approx(0.375).epsilon(1e-9));
  for (std::size_t i = 0; i < kVaDim; ++i)
    if (i != category_index(ObjectCategory::tv)) CHECK(va[i] == 0.0);

  const Scene far = room(7, 6, {object_at("tv", ObjectCategory::tv, {0.5, 3}, 5.0, 0.0)});
  CHECK(visual_attention(Placement({0.5, 3}, 0), far, cfg)[category_index(ObjectCategory::tv)] == 0.0);

  const Scene edge = room(7, 6, {object_at("lamp", ObjectCategory::lamp, me, 2.0, 40.0)});
  CHECK(visual_attention(p, edge, cfg)[category_index(ObjectCategory::lamp)] == doctest::Approx(0.0).epsilon(1e-9));

  const Scene behind = room(7, 6, {object_at("lamp", ObjectCategory::lamp, {4, 3}, 2.0, 180.0)});
  CHECK(visual_attention(Placement({4, 3}, 0), behind, cfg)[category_index(ObjectCategory::lamp)] == 0.0);
}

TEST_CASE("spatial hand cases") {
  const FeatureConfig cfg;
  const Vec2 me{3, 3};
  const Scene chair = room(7, 6, {object_at("c", ObjectCategory::chair, me, 1.0, 0.0)});
  CHECK(spatial(Placement(me, 0), chair, cfg)[category_index(ObjectCategory::chair)] ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  const Scene tables = room(7, 6,
                            {object_at("t1", ObjectCategory::table, me, 1.0, 90.0),
                             object_at("t2", ObjectCategory::table, me, 2.0, 200.0)});
  CHECK(spatial(Placement(me, 1.0), tables, cfg)[category_index(ObjectCategory::table)] ==
        doctest::Approx(1.0).epsilon(1e-9));
  const Scene distant = room(9, 6, {object_at("t", ObjectCategory::table, {1, 3}, 4.0, 0.0)});
  for (double v : spatial(Placement({1, 3}, 0), distant, cfg)) CHECK(v == 0.0);
}

TEST_CASE("attention and spatial grow as an object approaches") {
  const FeatureConfig cfg;
  const Vec2 me{1, 3};
  double last_va = -1, last_sp = -1;
  for (double d = 3.5; d >= 0.5; d -= 0.25) {
    const Scene s = room(7, 6, {object_at("tv", ObjectCategory::tv, me, d, 15.0)});
    const double va = visual_attention(Placement(me, 0), s, cfg)[category_index(ObjectCategory::tv)];
    const double sp = spatial(Placement(me, 0), s, cfg)[category_index(ObjectCategory::tv)];
    CHECK(va >= last_va);
    CHECK(sp >= last_sp);
    last_va = va;
    last_sp = sp;
  }
}

TEST_CASE("pose stencil covers the disk") {
  const FeatureConfig cfg;
  const PoseStencil st = make_pose_stencil(cfg);
  CHECK(st.offsets.size() == st.region.size());
  for (std::size_t k = 0; k < kPaDim; ++k) CHECK(st.counts[k] > 0);
  for (std::size_t i = 0; i < st.offsets.size(); ++i) CHECK(norm(st.offsets[i]) <= cfg.pose_outer_radius + 1e-9);
}

TEST_CASE("pose accommodation hand cases") {
  const FeatureConfig cfg;
  const Placement p({2, 2}, 0);
  for (double v : pose_accommodation(p, room(4, 4), cfg)) CHECK(v == 0.0);

  const Scene platform = room(4, 4, {make_object("sofa", ObjectCategory::sofa, rectangle({2, 2}, 1.2, 1.2), 0.45)});
  for (double v : pose_accommodation(p, platform, cfg)) CHECK(v == doctest::Approx(0.225).epsilon(1e-12));

  // chair covering the half-plane in front of the person
  const Scene front = room(4, 4, {make_object("chair", ObjectCategory::chair, {{2, 1.3}, {2.7, 1.3}, {2.7, 2.7}, {2, 2.7}}, 0.45)});
  const auto pa = pose_accommodation(p, front, cfg);
  const auto oracle = pose_oracle(p, front, cfg);
  CHECK(pa[0] == doctest::Approx(0.1125).epsilon(0.02 / 0.1125));
  for (int k : {1, 2, 3, 4, 14, 15, 16}) CHECK(pa[k] == doctest::Approx(0.225));
  for (int k : {6, 7, 8, 9, 10, 11, 12}) CHECK(pa[k] == 0.0);
  for (std::size_t k = 0; k < kPaDim; ++k) CHECK(std::abs(pa[k] - oracle[k]) <= 0.02);

  // sector 5 is centered 90 degrees counter-clockwise from the heading
  const Scene left = room(4, 4, {make_object("box", ObjectCategory::cabinet, rectangle({2, 2.4}, 0.08, 0.15), 1.0)});
  const auto pl = pose_accommodation(p, left, cfg);
  CHECK(pl[5] > 0.0);
  CHECK(pl[13] == 0.0);
}

TEST_CASE("pose accommodation tracks the fine rasterization oracle on average") {
  // Per-element agreement is limited by the 0.05 m pitch: one sample is about
  // 7% of a sector, so a tall footprint edge can move a sector by > 0.02.
  const FeatureConfig cfg;
  double abs_sum = 0.0;
  std::size_t n = 0, over = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Scene s = generate_synthetic_scene(seed, random_scene_spec(seed), "pose");
    Rng rng(seed);
    const Placement p = random_placement(s, rng);
    const auto pa = pose_accommodation(p, s, cfg);
    const auto oracle = pose_oracle(p, s, cfg);
    for (std::size_t k = 0; k < kPaDim; ++k) {
      const double e = std::abs(pa[k] - oracle[k]);
      abs_sum += e;
      over += e > 0.02;
      ++n;
    }
  }
  MESSAGE("mean |error| " << abs_sum / n << ", elements over 0.02: " << over << "/" << n);
  CHECK(abs_sum / n < 0.005);
  CHECK(static_cast<double>(over) / n < 0.05);
}

TEST_CASE("extract composition") {
  const FeatureConfig cfg;
  const Scene empty = room(4, 4);
  const auto x = extract(Placement({1, 1}, 0), Placement({3, 3}, 1), empty, cfg);
  CHECK(x.size() == 45);
  const auto ip = interpersonal(Placement({1, 1}, 0), Placement({3, 3}, 1), cfg);
  for (std::size_t i = 0; i < kIpDim; ++i) CHECK(x[i] == ip[i]);
  for (std::size_t i = kVaOffset; i < kFeatureDim; ++i) CHECK(x[i] == 0.0);

  const Scene sofa = room(5, 5, {make_object("sofa", ObjectCategory::sofa, rectangle({2.5, 1}, 2.0, 0.9), 0.45)});
  CHECK(extract(Placement({2.5, 1}, 0), Placement({2.5, 4}, 0), sofa, cfg)[kSsOffset] == 1.0);
  CHECK(extract(Placement({2.5, 3}, 0), Placement({2.5, 4}, 0), sofa, cfg)[kSsOffset] == 0.0);
}

TEST_CASE("extract is invariant under rigid transforms") {
  const FeatureConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scene s = generate_synthetic_scene(seed, random_scene_spec(seed), "eq");
    Rng rng(seed + 100);
    const double rot = rng.uniform(0, kTwoPi);
    const Vec2 shift{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const Scene t = transform_scene(s, rot, shift);
    for (int i = 0; i < 5; ++i) {
      const Placement a = random_placement(s, rng);
      const Placement b = random_placement(s, rng);
      if (distance(a.position, b.position) < 1e-6) continue;
      const auto x = extract(a, b, s, cfg);
      const auto y = extract(transform_placement(a, rot, shift), transform_placement(b, rot, shift), t, cfg);
      for (std::size_t k = 0; k < kFeatureDim; ++k) CHECK(std::abs(x[k] - y[k]) <= 1e-9);
    }
  }
}

TEST_CASE("features stay finite and in range on random scenes") {
  const FeatureConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scene s = generate_synthetic_scene(seed, random_scene_spec(seed), "r");
    std::array<int, kCategoryCount> counts{};
    for (const auto& o : s.objects()) ++counts[category_index(o.category)];
    Rng rng(seed);
    for (int i = 0; i < 10; ++i) {
      const Placement a = random_placement(s, rng), b = random_placement(s, rng);
      if (distance(a.position, b.position) < 1e-6) continue;
      const auto x = extract(a, b, s, cfg);
      for (double v : x) CHECK(std::isfinite(v));
      for (std::size_t k = 0; k < kPaDim; ++k) {
        CHECK(x[kPaOffset + k] >= 0.0);
        CHECK(x[kPaOffset + k] <= 1.0);
      }
      for (std::size_t k = 0; k < kSpDim; ++k) {
        CHECK(x[kSpOffset + k] >= 0.0);
        CHECK(x[kSpOffset + k] <= counts[k]);
        CHECK(x[kVaOffset + k] >= 0.0);
      }
    }
  }
}
