// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli_pipeline.hpp"
#include "retarget/dataset.hpp"
#include "retarget/eval.hpp"
#include "retarget/solver.hpp"
#include "retarget/trainer.hpp"
#include "support.hpp"

using namespace retarget;
namespace rt = retarget::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double ms_since(Clock::time_point t0) { return 1000.0 * seconds_since(t0); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed sub-checks so one line can report all of them.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      failures_ += (failures_.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  Outcome outcome() const {
    std::string d = notes_;
    if (!pass_) d += (d.empty() ? "" : " | ") + std::string("failed: ") + failures_;
    return {pass_, d};
  }

 private:
  bool pass_ = true;
  std::string failures_;
  std::string notes_;
};

std::string num(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

// ---- shared synthetic corpus: 4 scene pairs x 8 questions ----------------------

struct Corpus {
  std::vector<ScenePair> pairs;
  std::vector<SurveyQuestion> survey;
  TripletDataset data;
  std::vector<TripletSample> train;
  std::vector<TripletSample> test;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    Corpus out;
    out.pairs = generate_scene_pairs(2024, 4);
    out.survey = synthesize_survey(out.pairs, 8, 7);
    out.data = build_dataset(out.survey, {}, {}, 9);
    const SplitSpec split = split_by_pairs(out.data.pair_ids, 3);
    out.train = select_samples(out.data, split.train_pairs);
    out.test = select_samples(out.data, split.test_pairs);
    return out;
  }();
  return c;
}

TrainConfig corpus_train_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.seed = seed;
  return cfg;
}

// ---- criteria -----------------------------------------------------------------

Outcome gradient_correctness() {
  Verdict v;
  const auto t0 = Clock::now();
  double worst = 0.0;
  int models = 0;
  for (auto variant : kAllVariants) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto m = SimilarityModel::initialized(variant, seed, 0);
      const auto check = rt::check_gradients(m, rt::random_triplets(1000 + seed, 2));
      worst = std::max(worst, check.worst_relative_error);
      v.check(check.tensors == m.modules().size() * 6, "tensor count");
      ++models;
    }
  }
  const double secs = seconds_since(t0);
  v.note("worst relative error " + num(worst) + " over " + std::to_string(models) + " models, " + num(secs, 3) + " s");
  v.check(worst < 1e-4, "relative error >= 1e-4");
  v.check(secs < 60.0, "runtime >= 1 min");
  return v.outcome();
}

Outcome architecture_audit() {
  Verdict v;
  auto spec_of = [](const Bbm& b) { return b.spec(); };
  const auto proposed = SimilarityModel::initialized(ModelVariant::proposed_sfpm_dfn, 1, 0);
  const auto& sfpm = proposed.feature_net().blocks();
  v.check(sfpm.size() == 3, "SFPM block count");
  if (sfpm.size() == 3) {
    v.check(spec_of(sfpm[0]) == BBMSpec{17, 14, 10, 6}, "pose BBM");
    v.check(spec_of(sfpm[1]) == BBMSpec{12, 10, 8, 6}, "spatial BBM");
    v.check(spec_of(sfpm[2]) == BBMSpec{12, 10, 8, 6}, "attention BBM");
  }
  v.check(proposed.distance_net() && proposed.distance_net()->blocks().size() == 3, "distance SFPM");
  v.check(spec_of(proposed.metric_net()) == BBMSpec{66, 44, 44, 1}, "proposed MetricNet");
  const auto plain = SimilarityModel::initialized(ModelVariant::plain_triplet, 1, 0);
  v.check(spec_of(plain.metric_net()) == BBMSpec{44, 44, 44, 1}, "plain MetricNet");
  const auto bbm = SimilarityModel::initialized(ModelVariant::bbm_nodfn, 1, 0);
  v.check(bbm.feature_net().blocks().size() == 1 && spec_of(bbm.feature_net().blocks()[0]) == BBMSpec{45, 38, 30, 22},
          "BBM FeatureNet");
  std::size_t checked = 0;
  for (auto variant : kAllVariants) {
    const auto m = SimilarityModel::initialized(variant, 1, 0);
    for (const Bbm* b : m.modules()) {
      const BBMSpec s = b->spec();
      const std::size_t dims[4] = {s.in_dim, s.h1_dim, s.h2_dim, s.out_dim};
      for (std::size_t l = 0; l < 3; ++l) {
        const auto& layer = b->layers()[l];
        v.check(layer.in_dim == dims[l] && layer.out_dim == dims[l + 1] &&
                    layer.weight.size() == dims[l] * dims[l + 1] && layer.bias.size() == dims[l + 1],
                "instantiated layer shape of " + std::string(variant_name(variant)));
        ++checked;
      }
    }
  }
  v.note(std::to_string(checked) + " instantiated layers match their specs");
  return v.outcome();
}

Outcome dataset_arithmetic() {
  Verdict v;
  const auto& c = corpus();
  NegativeSamplingConfig ncfg;
  FeatureConfig fcfg;
  std::size_t pairs_checked = 0;
  for (std::size_t i = 0; i < c.survey.size(); ++i) {
    const auto& q = c.survey[i];
    const auto neg = sample_negatives(q, ncfg, derive_seed(derive_seed(9, "negatives"), i), fcfg);
    v.check(neg.size() == 110, "question " + std::to_string(i) + " has " + std::to_string(neg.size()) + " negatives");
    v.check(build_triplets(q, neg, fcfg).size() == 1100, "question " + std::to_string(i) + " triplet count");
    for (const auto& n : neg)
      for (const auto& p : q.positives) {
        v.check(!too_close(n, p, *q.scene_b, ncfg, fcfg), "too_close negative in question " + std::to_string(i));
        ++pairs_checked;
      }
  }
  v.check(c.data.records.size() == c.survey.size() * 1100, "dataset record count");
  v.note(std::to_string(c.survey.size()) + " questions, " + std::to_string(c.data.records.size()) + " triplets, " +
         std::to_string(pairs_checked) + " negative/positive pairs checked");
  return v.outcome();
}

Outcome loss_values() {
  Verdict v;
  const DistancePair a{0.5, 0.5}, b{0.9, 0.1};
  const double la = total_loss(std::span(&a, 1)).total;
  const double lb = total_loss(std::span(&b, 1)).total;
  v.note("(0.5,0.5) -> " + num(la, 8) + ", (0.9,0.1) -> " + num(lb, 8));
  v.check(std::abs(la - 1.38629) <= 1e-5, "(0.5,0.5)");
  v.check(std::abs(lb - 5.40517) <= 1e-5, "(0.9,0.1)");
  return v.outcome();
}

Outcome synthetic_learnability() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto& c = corpus();
  const auto init = SimilarityModel::initialized(ModelVariant::proposed_sfpm_dfn, 1, FeatureConfig{}.fingerprint());
  const auto r = train(init, c.train, corpus_train_config(11));
  const double test_acc = triplet_accuracy(r.model, c.test);
  v.note("proposed test accuracy " + num(test_acc) + " on " + std::to_string(c.test.size()) + " held-out triplets");
  v.check(test_acc >= 0.90, "test accuracy < 0.90");

  const auto ctx_train = rt::context_dependent_triplets(31, 1000);
  const auto ctx_test = rt::context_dependent_triplets(32, 1000);
  const double oracle = rt::best_grid_bilinear_accuracy(ctx_train);
  BilinearConfig bcfg;
  bcfg.epochs = 100;
  const auto baseline = train_bilinear_baseline(ctx_train, bcfg);
  const double base_acc = bilinear_accuracy(baseline.model, ctx_test);
  TrainConfig ncfg;
  ncfg.epochs = 40;
  ncfg.batch_size = 16;
  ncfg.learning_rate = 3e-3;
  ncfg.seed = 12;
  const auto net = train(SimilarityModel::initialized(ModelVariant::proposed_sfpm_dfn, 2, 0), ctx_train, ncfg);
  const double net_acc = triplet_accuracy(net.model, ctx_test);
  v.note("context-dependent set: network " + num(net_acc) + " vs bilinear " + num(base_acc) +
         " (best PSD grid metric " + num(oracle) + ")");
  v.check(oracle <= 0.5 + 1e-12, "a linear metric separates the context-dependent set");
  v.check(net_acc > base_acc, "network does not beat the bilinear baseline");
  const double secs = seconds_since(t0);
  v.note(num(secs, 3) + " s");
  v.check(secs < 600.0, "runtime >= 10 min");
  return v.outcome();
}

Outcome ablation_ordering() {
  Verdict v;
  const auto& c = corpus();
  const ModelVariant variants[] = {ModelVariant::proposed_sfpm_dfn, ModelVariant::sfpm_nodfn,
                                   ModelVariant::bbm_nodfn};
  std::vector<std::pair<std::string, std::vector<double>>> acc;
  for (auto variant : variants) {
    std::vector<double> per_seed;
    for (std::uint64_t s = 0; s < 5; ++s) {
      TrainConfig cfg = corpus_train_config(derive_seed(s, "train"));
      cfg.epochs = 4;
      const auto init = SimilarityModel::initialized(variant, derive_seed(s, "init"), FeatureConfig{}.fingerprint());
      per_seed.push_back(triplet_accuracy(train(init, c.train, cfg).model, c.test));
    }
    acc.emplace_back(std::string(variant_name(variant)), per_seed);
  }
  const auto rows = ablation_table(acc);
  auto row = [&](ModelVariant m) {
    return *std::find_if(rows.begin(), rows.end(), [&](const AblationRow& r) { return r.variant == variant_name(m); });
  };
  const AblationRow full = row(ModelVariant::proposed_sfpm_dfn);
  for (auto other : {ModelVariant::sfpm_nodfn, ModelVariant::bbm_nodfn}) {
    const AblationRow r = row(other);
    v.note(r.variant + " " + num(r.mean) + "+-" + num(r.stddev));
    if (full.mean >= r.mean) continue;
    const double spread = std::max(full.stddev, r.stddev);
    if (r.mean - full.mean <= spread)
      v.note("reported: " + r.variant + " ahead by " + num(r.mean - full.mean) + ", within 1 std");
    else
      v.check(false, r.variant + " ahead by more than 1 std");
  }
  v.note(full.variant + " " + num(full.mean) + "+-" + num(full.stddev) + " over 5 seeds");
  return v.outcome();
}

Outcome solver_oracle() {
  Verdict v;
  FeatureConfig cfg;
  int matched = 0, monotone = 0;
  for (int q = 0; q < 20; ++q) {
    const auto seed = static_cast<std::uint64_t>(500 + q);
    const Scene scene = generate_synthetic_scene(seed, random_scene_spec(seed), "s");
    const SceneFeatureTable table(scene, {}, cfg);
    const auto model = SimilarityModel::initialized(ModelVariant::proposed_sfpm_dfn, seed, cfg.fingerprint());
    Rng rng(seed);
    const FeatureVector anchor = rt::random_features(rng);
    const Placement other = random_free_placement(scene, rng, 0.3);
    double best = 2.0;
    Placement arg;
    for (int i = 0; i < table.rows(); ++i)
      for (int j = 0; j < table.cols(); ++j) {
        const Vec2 center = table.cell_center(i, j);
        if (!scene.is_free(center, 0.30) || distance(center, other.position) <= kCoincidentTolerance) continue;
        for (int o = 0; o < 24; ++o) {
          const Placement p(center, kTwoPi * o / 24);
          const double d = dissimilarity(model, anchor, extract(p, other, scene, cfg));
          if (d < best) best = d, arg = p;
        }
      }
    const auto hit = grid_search(model, anchor, table, other, 1 + q % 8);
    if (hit.best.value == best && hit.best.placement == arg) ++matched;
    PSOConfig pso;
    pso.seed = seed;
    const auto refined = pso_refine(model, anchor, scene, other, hit.best, pso, {}, cfg);
    if (refined.value <= hit.best.value) ++monotone;
  }
  v.check(matched == 20, "grid search differs from the exhaustive scan");
  v.check(monotone == 20, "swarm worsened a grid result");

  double worst_miss = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(s);
    const Vec2 grid_point{0.25 * (4 + static_cast<int>(rng.index(12))), 0.25 * (4 + static_cast<int>(rng.index(12)))};
    const double dir = rng.uniform(0.0, kTwoPi);
    const Vec2 target = grid_point + 0.05 * Vec2{std::cos(dir), std::sin(dir)};
    auto objective = [&](const Placement& p) { return norm(p.position - target) * norm(p.position - target); };
    PSOConfig pso;
    pso.seed = s;
    const Placement start(grid_point, 0.0);
    const auto r = pso_minimize(objective, [](const Placement&) { return true; }, {start, objective(start)}, pso);
    worst_miss = std::max(worst_miss, distance(r.placement.position, target));
  }
  v.check(worst_miss <= 0.05, "planted minimum missed by " + num(worst_miss));
  v.note("exhaustive-scan matches " + std::to_string(matched) + "/20, non-worsening refinements " +
         std::to_string(monotone) + "/20, planted quadratic worst miss " + num(worst_miss) + " m");
  return v.outcome();
}

// Questions whose answer is the person's own placement: scene B is scene A and
// Y stands where the avatar Y' stands.
std::vector<SurveyQuestion> self_questions(const std::vector<ScenePtr>& scenes, int per_scene, std::uint64_t seed) {
  const SynthesisConfig scfg;
  std::vector<SurveyQuestion> out;
  Rng rng(seed);
  for (const auto& s : scenes)
    for (int k = 0; k < per_scene; ++k) {
      SurveyQuestion q;
      q.scene_a = q.scene_b = s;
      q.p_x = random_free_placement(*s, rng, 0.3, scfg.sit_probability);
      do q.p_y_prime = random_free_placement(*s, rng, 0.3);
      while (distance(q.p_y_prime.position, q.p_x.position) < 0.5);
      q.p_y = q.p_y_prime;
      q.positives.push_back(q.p_x);
      while (static_cast<int>(q.positives.size()) < scfg.positives) {
        const double r = scfg.jitter_radius * std::sqrt(rng.uniform());
        const double dir = rng.uniform(0.0, kTwoPi);
        const Vec2 pos = q.p_x.position + r * Vec2{std::cos(dir), std::sin(dir)};
        const double turn = deg_to_rad(rng.uniform(-scfg.jitter_angle, scfg.jitter_angle));
        if (s->is_free(pos, 0.3)) q.positives.emplace_back(pos, q.p_x.heading + turn);
      }
      out.push_back(std::move(q));
    }
  return out;
}

Outcome self_retargeting() {
  Verdict v;
  const auto t0 = Clock::now();
  std::vector<ScenePtr> scenes;
  for (const auto& [a, b] : generate_scene_pairs(77, 3)) scenes.push_back(a), scenes.push_back(b);
  const auto questions = self_questions(scenes, 12, 5);
  const TripletDataset data = build_dataset(questions, {}, {}, 13);
  const auto samples = select_samples(data);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.seed = 21;
  const auto model =
      train(SimilarityModel::initialized(ModelVariant::proposed_sfpm_dfn, 3, FeatureConfig{}.fingerprint()), samples,
            cfg)
          .model;

  const auto queries = self_questions(scenes, 9, 999);
  int hits = 0, total = 0, lookalikes = 0;
  const FeatureConfig fcfg;
  for (std::size_t i = 0; i < 50 && i < queries.size(); ++i) {
    const auto& q = queries[i * queries.size() / 50];
    PSOConfig pso;
    pso.seed = i;
    const auto r = place_avatar(model, {q.scene_a, q.scene_b, q.p_x, q.p_y_prime, q.p_y}, {}, {}, pso);
    const bool near = distance(r.placement.position, q.p_x.position) <= 0.25 &&
                      rad_to_deg(angle_between(r.placement.heading, q.p_x.heading)) <= 15.0;
    hits += near ? 1 : 0;
    ++total;
    if (!near) {
      // a miss whose descriptor is within 0.05 of the person's in every element cannot be told apart by any model
      const auto want = extract(q.p_x, q.p_y, *q.scene_b, fcfg);
      const auto got = extract(r.placement, q.p_y, *q.scene_b, fcfg);
      double gap = 0.0;
      for (std::size_t e = 0; e < kFeatureDim; ++e) gap = std::max(gap, std::abs(want[e] - got[e]));
      lookalikes += gap < 0.05 ? 1 : 0;
    }
  }
  v.note(std::to_string(hits) + "/" + std::to_string(total) + " placements within 0.25 m and 15 deg (" +
         std::to_string(lookalikes) + " misses have a descriptor within 0.05 of the person's), " +
         std::to_string(samples.size()) + " training triplets from self-pairs, " + num(seconds_since(t0), 3) + " s");
  v.check(total == 50 && hits >= 45, "fewer than 90% recovered");
  return v.outcome();
}

Outcome latency() {
  Verdict v;
  FeatureConfig fcfg;
  SceneSpec spec = random_scene_spec(42);
  spec.width = spec.depth = 6.0;
  const auto scene = std::make_shared<const Scene>(generate_synthetic_scene(42, spec, "six"));
  const auto model = SimilarityModel::initialized(ModelVariant::proposed_sfpm_dfn, 4, fcfg.fingerprint());
  Rng rng(4);
  const PlacementQuery q{scene, scene, random_free_placement(*scene, rng, 0.3), random_free_placement(*scene, rng, 0.3),
                         random_free_placement(*scene, rng, 0.3)};
  place_avatar(model, q, fcfg, {}, {}, 1);  // warm-up
  auto timed = [&](unsigned threads, PlacementResult& out) {
    double best = 1e9;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = Clock::now();
      out = place_avatar(model, q, fcfg, {}, {}, threads);
      best = std::min(best, ms_since(t0));
    }
    return best;
  };
  PlacementResult r1, r8;
  const double ms1 = timed(1, r1);
  const double ms8 = timed(8, r8);
  const SceneFeatureTable table(*scene, {}, fcfg);
  v.note(std::to_string(table.rows() * table.cols()) + " cells (" + std::to_string(table.cells().size()) +
         " free) x 24 headings; 1 thread " + num(ms1) + " ms, 8 threads " +
         num(ms8) + " ms (" + std::to_string(std::thread::hardware_concurrency()) + " hardware threads)");
  v.check(ms1 <= 1000.0, "single-threaded > 1.0 s");
  v.check(ms8 <= 400.0, "8 workers > 0.4 s");
  v.check(r1.placement == r8.placement && r1.dissimilarity == r8.dissimilarity, "thread count changed the result");
  return v.outcome();
}

Outcome rank_and_cmc() {
  Verdict v;
  v.check(percentile_rank(10, 2000) == 1, "percentile_rank(10, 2000) != 1");
  std::vector<RankRecord> uniform;
  for (std::size_t p = 1; p <= 100; ++p) uniform.push_back({0, p, p, 100, percentile_rank(p, 100)});
  const auto diag = cmc_curve(uniform);
  for (int k = 1; k <= 100; ++k) v.check(diag[k - 1] == k / 100.0, "diagonal at k=" + std::to_string(k));
  Rng rng(10);
  int monotone = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<RankRecord> recs(1 + rng.index(50));
    for (auto& r : recs) {
      r.total = 1 + rng.index(3000);
      r.rank = 1 + rng.index(r.total);
      r.percentile = percentile_rank(r.rank, r.total);
    }
    const auto c = cmc_curve(recs);
    monotone += std::is_sorted(c.begin(), c.end()) ? 1 : 0;
  }
  v.check(monotone == 1000, "non-monotone CMC");
  v.note("percentile_rank(10, 2000) = " + std::to_string(percentile_rank(10, 2000)) + ", diagonal exact, " +
         std::to_string(monotone) + "/1000 random curves monotone");
  return v.outcome();
}

Outcome feature_oracles() {
  Verdict v;
  FeatureConfig cfg;

  // pose: hand-built scenes and furnished random scenes against the 0.01 m raster
  double hand_worst = 0.0, random_worst = 0.0, random_mean = 0.0;
  std::size_t random_over = 0, random_elems = 0;
  {
    const Scene chair = rt::room(4, 4, {make_object("c", ObjectCategory::chair, rectangle({2.0, 2.25}, 2.0, 0.5), 0.45)});
    const Scene platform = rt::room(4, 4, {make_object("p", ObjectCategory::table, rectangle({2, 2}, 3.0, 3.0), 0.45)});
    for (const Scene* s : {&chair, &platform})
      for (double h : {0.0, kPi / 2, kPi, 1.5 * kPi}) {
        const Placement p({2, 2}, h);
        const auto got = pose_accommodation(p, *s, cfg);
        const auto want = rt::pose_oracle(p, *s, cfg);
        for (std::size_t k = 0; k < kPaDim; ++k) hand_worst = std::max(hand_worst, std::abs(got[k] - want[k]));
      }
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scene s = generate_synthetic_scene(seed, random_scene_spec(seed), "r");
    Rng rng(seed);
    for (int k = 0; k < 10; ++k) {
      const Placement p = random_free_placement(s, rng, 0.3, 0.5);
      const auto got = pose_accommodation(p, s, cfg);
      const auto want = rt::pose_oracle(p, s, cfg);
      for (std::size_t e = 0; e < kPaDim; ++e) {
        const double err = std::abs(got[e] - want[e]);
        random_worst = std::max(random_worst, err);
        random_mean += err;
        random_over += err > 0.02 ? 1 : 0;
        ++random_elems;
      }
    }
  }
  random_mean /= static_cast<double>(random_elems);
  v.check(hand_worst <= 0.02, "pose hand scenes off by " + num(hand_worst));
  v.check(random_worst <= 0.02, "pose on furnished scenes off by up to " + num(random_worst) + " (" +
                                    std::to_string(random_over) + "/" + std::to_string(random_elems) +
                                    " elements over 0.02, mean " + num(random_mean) + ")");

  // single-object attention and spatial hand cases
  using rt::object_at;
  const Vec2 me{1, 3}, mid{3, 3};
  const double va = visual_attention(Placement(me, 0), rt::room(7, 6, {object_at("tv", ObjectCategory::tv, me, 2.0, 10.0)}),
                                     cfg)[category_index(ObjectCategory::tv)];
  const double sp1 = spatial(Placement(mid, 0), rt::room(7, 6, {object_at("c", ObjectCategory::chair, mid, 1.0, 0.0)}),
                             cfg)[category_index(ObjectCategory::chair)];
  const double sp0 = spatial(Placement(mid, 1.0),
                             rt::room(7, 6,
                                      {object_at("t1", ObjectCategory::table, mid, 1.0, 90.0),
                                       object_at("t2", ObjectCategory::table, mid, 2.0, 200.0)}),
                             cfg)[category_index(ObjectCategory::table)];
  v.check(std::abs(va - 0.375) <= 1e-9, "va hand case " + num(va, 12));
  v.check(std::abs(sp1 - 2.0 / 3.0) <= 1e-9, "sp hand case " + num(sp1, 12));
  v.check(std::abs(sp0 - 1.0) <= 1e-9, "sp two-object case " + num(sp0, 12));

  // rigid motions of the whole scene leave extract() unchanged
  double rigid_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Scene s = generate_synthetic_scene(seed + 20, random_scene_spec(seed + 20), "r");
    Rng rng(seed);
    const double rot = rng.uniform(0.0, kTwoPi);
    const Vec2 shift{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const Scene moved = transform_scene(s, rot, shift);
    for (int k = 0; k < 10; ++k) {
      const Placement p = random_free_placement(s, rng, 0.3);
      const Placement o = random_free_placement(s, rng, 0.3);
      const auto a = extract(p, o, s, cfg);
      const auto b = extract(transform_placement(p, rot, shift), transform_placement(o, rot, shift), moved, cfg);
      for (std::size_t e = 0; e < kFeatureDim; ++e) rigid_worst = std::max(rigid_worst, std::abs(a[e] - b[e]));
    }
  }
  v.check(rigid_worst <= 1e-9, "rigid motion changed extract() by " + num(rigid_worst));
  v.note("pose hand scenes worst " + num(hand_worst) + ", furnished scenes worst " + num(random_worst) +
         "; va " + num(va, 10) + ", sp " + num(sp1, 10) + "/" + num(sp0, 10) + "; rigid worst " + num(rigid_worst));
  return v.outcome();
}

Outcome cli_determinism() {
  Verdict v;
  const auto dir = std::filesystem::temp_directory_path() / "retarget_acceptance_cli";
  const auto a = rt::run_pipeline(dir, 1, 2025);
  const auto b = rt::run_pipeline(dir, 1, 2025);
  const auto c = rt::run_pipeline(dir, 8, 2025);
  std::filesystem::remove_all(dir);
  v.check(a.count("failed") == 0, a.count("failed") ? a.at("failed") : "");
  std::size_t compared = 0;
  for (const auto& [name, bytes] : a) {
    v.check(b.count(name) && b.at(name) == bytes, name + " differs between runs");
    v.check(c.count(name) && c.at(name) == bytes, name + " differs with 8 threads");
    ++compared;
  }
  v.check(a.size() == b.size() && a.size() == c.size(), "different file sets");
  v.note(std::to_string(compared) + " artifacts from 7 commands compared across 2 runs and --threads 1/8");
  return v.outcome();
}

}  // namespace

// Optional arguments pick criteria by number; the default runs all of them.
int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"architecture audit", architecture_audit},
      {"dataset arithmetic", dataset_arithmetic},
      {"loss values", loss_values},
      {"synthetic learnability", synthetic_learnability},
      {"ablation ordering", ablation_ordering},
      {"solver oracle", solver_oracle},
      {"self-retargeting", self_retargeting},
      {"latency", latency},
      {"rank and CMC", rank_and_cmc},
      {"feature oracles", feature_oracles},
      {"CLI determinism", cli_determinism},
  };
  int failures = 0;
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[static_cast<std::size_t>(k - 1)] = true;
  }
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures,
              static_cast<std::size_t>(std::count(selected.begin(), selected.end(), true)));
  return failures == 0 ? 0 : 1;
}
