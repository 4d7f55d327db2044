#include "retarget/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "retarget/errors.hpp"
#include "retarget/parallel.hpp"
#include "retarget/rng.hpp"

namespace retarget {

std::string SurveyQuestion::pair_id() const { return scene_a->id() + "|" + scene_b->id(); }

void NegativeSamplingConfig::validate() const {
  if (random_count < 0 || hard_count < 0) throw RangeError("negative counts must be >= 0");
  const double positives[] = {min_distance, min_angle, min_pose_delta, hard_radius_min, hard_radius_max,
                              hard_angle_min, hard_angle_max};
  for (double v : positives) {
    if (!(v > 0.0)) throw RangeError("negative sampling thresholds must be positive");
  }
  if (max_attempts < 1) throw RangeError("max_attempts must be >= 1");
  if (hard_radius_min > hard_radius_max || hard_angle_min > hard_angle_max)
    throw RangeError("hard-negative ranges are inverted");
}

bool too_close(const Placement& candidate, const PoseFeature& candidate_pose, const Placement& positive,
               const PoseFeature& positive_pose, const NegativeSamplingConfig& cfg) {
  if (!(distance(candidate.position, positive.position) < cfg.min_distance)) return false;
  if (!(rad_to_deg(angle_between(candidate.heading, positive.heading)) < cfg.min_angle)) return false;
  double delta = 0.0;
  for (std::size_t i = 0; i < kPaDim; ++i) delta = std::max(delta, std::abs(candidate_pose[i] - positive_pose[i]));
  return delta < cfg.min_pose_delta;
}

bool too_close(const Placement& candidate, const Placement& positive, const Scene& scene,
               const NegativeSamplingConfig& cfg, const FeatureConfig& fcfg) {
  return too_close(candidate, pose_accommodation(candidate, scene, fcfg), positive,
                   pose_accommodation(positive, scene, fcfg), cfg);
}

std::vector<Placement> sample_negatives(const SurveyQuestion& q, const NegativeSamplingConfig& cfg,
                                        std::uint64_t seed, const FeatureConfig& fcfg) {
  cfg.validate();
  if (q.positives.empty()) throw EmptyInput("question has no positives");
  const Scene& scene = *q.scene_b;
  const PoseStencil stencil = make_pose_stencil(fcfg);
  std::vector<PoseFeature> positive_pose;
  for (const auto& p : q.positives) positive_pose.push_back(pose_accommodation(p, scene, fcfg, stencil));

  Rng rng(derive_seed(seed, "negatives"));
  int attempts = 0;
  auto spend = [&] {
    if (++attempts > cfg.max_attempts) throw SamplingExhausted("negative sampling ran out of attempts");
  };
  auto admissible = [&](const Placement& c) {
    const PoseFeature pose = pose_accommodation(c, scene, fcfg, stencil);
    for (std::size_t k = 0; k < q.positives.size(); ++k) {
      if (too_close(c, pose, q.positives[k], positive_pose[k], cfg)) return false;
    }
    return true;
  };
  auto usable_position = [&](Vec2 p) {
    return scene.is_free(p, cfg.clearance) && distance(p, q.p_y.position) > kCoincidentTolerance;
  };

  std::vector<Placement> out;
  out.reserve(static_cast<std::size_t>(cfg.random_count + cfg.hard_count));
  const Box& box = scene.bounds();
  while (static_cast<int>(out.size()) < cfg.random_count) {
    spend();
    const Vec2 pos{rng.uniform(box.min.x, box.max.x), rng.uniform(box.min.y, box.max.y)};
    const double heading = rng.uniform(0.0, kTwoPi);
    if (!usable_position(pos)) continue;
    const Placement c(pos, heading);
    if (admissible(c)) out.push_back(c);
  }
  for (int h = 0; h < cfg.hard_count; ++h) {
    while (true) {
      spend();
      const Placement& anchor = q.positives[rng.index(q.positives.size())];
      const double r = rng.uniform(cfg.hard_radius_min, cfg.hard_radius_max);
      const double dir = rng.uniform(0.0, kTwoPi);
      const Vec2 pos = anchor.position + r * Vec2{std::cos(dir), std::sin(dir)};
      const double turn = deg_to_rad(rng.uniform(cfg.hard_angle_min, cfg.hard_angle_max));
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      if (!usable_position(pos)) continue;
      const Placement c(pos, anchor.heading + sign * turn);
      if (!admissible(c)) continue;
      out.push_back(c);
      break;
    }
  }
  return out;
}

std::vector<TripletSample> build_triplets(const SurveyQuestion& q, const std::vector<Placement>& negatives,
                                          const FeatureConfig& cfg) {
  if (negatives.empty()) throw EmptyInput("no negatives to pair with");
  const FeatureVector anchor = extract(q.p_x, q.p_y_prime, *q.scene_a, cfg);
  std::vector<FeatureVector> pos, neg;
  for (const auto& p : q.positives) pos.push_back(extract(p, q.p_y, *q.scene_b, cfg));
  for (const auto& n : negatives) neg.push_back(extract(n, q.p_y, *q.scene_b, cfg));
  std::vector<TripletSample> out;
  out.reserve(pos.size() * neg.size());
  for (const auto& p : pos) {
    for (const auto& n : neg) out.push_back({anchor, p, n});
  }
  return out;
}

// ---- synthetic survey --------------------------------------------------------

double oracle_distance(const FeatureVector& a, const FeatureVector& b, const OracleWeights& w) {
  auto block = [&](std::size_t offset, std::size_t dim, double weight) {
    double acc = 0.0;
    for (std::size_t i = offset; i < offset + dim; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return weight * acc;
  };
  return block(kIpOffset, kIpDim, w.ip) + block(kVaOffset, kVaDim, w.va) + block(kPaOffset, kPaDim, w.pa) +
         block(kSsOffset, kSsDim, w.ss) + block(kSpOffset, kSpDim, w.sp);
}

Placement random_free_placement(const Scene& scene, Rng& rng, double clearance, double sit_probability) {
  if (sit_probability > 0.0 && rng.uniform() < sit_probability) {
    std::vector<const FurnitureObject*> seats;
    for (const auto& obj : scene.objects()) {
      if (is_sittable(obj.category)) seats.push_back(&obj);
    }
    if (!seats.empty()) {
      const auto* seat = seats[rng.index(seats.size())];
      const double heading = rng.uniform(0.0, kTwoPi);
      if (scene.is_free(seat->attention_point, clearance)) return Placement(seat->attention_point, heading);
    }
  }
  const Box& box = scene.bounds();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const Vec2 pos{rng.uniform(box.min.x, box.max.x), rng.uniform(box.min.y, box.max.y)};
    const double heading = rng.uniform(0.0, kTwoPi);
    if (scene.is_free(pos, clearance)) return Placement(pos, heading);
  }
  throw SamplingExhausted("scene " + scene.id() + " has no free space");
}

std::vector<SurveyQuestion> synthesize_survey(const std::vector<ScenePair>& pairs, int per_pair, std::uint64_t seed,
                                              const FeatureConfig& fcfg, const SynthesisConfig& scfg,
                                              unsigned threads) {
  if (per_pair < 1) throw RangeError("questions per pair must be >= 1");
  if (scfg.positives < 1) throw RangeError("need at least one positive per question");

  // one feature table per distinct scene B
  std::map<const Scene*, std::unique_ptr<SceneFeatureTable>> tables;
  for (const auto& [a, b] : pairs) {
    if (!a || !b) throw GenerationError("scene pair has a null scene");
    if (!tables.contains(b.get()))
      tables.emplace(b.get(), std::make_unique<SceneFeatureTable>(*b, scfg.grid, fcfg, threads));
  }

  const std::uint64_t survey_seed = derive_seed(seed, "survey");
  const std::size_t total = pairs.size() * static_cast<std::size_t>(per_pair);
  std::vector<SurveyQuestion> out(total);
  parallel_for(total, threads, [&](std::size_t idx) {
    const auto& [scene_a, scene_b] = pairs[idx / static_cast<std::size_t>(per_pair)];
    const SceneFeatureTable& table = *tables.at(scene_b.get());
    Rng rng(derive_seed(survey_seed, static_cast<std::uint64_t>(idx)));
    const double clearance = scfg.grid.clearance;

    SurveyQuestion q;
    q.scene_a = scene_a;
    q.scene_b = scene_b;
    q.p_x = random_free_placement(*scene_a, rng, clearance, scfg.sit_probability);
    for (int tries = 0;; ++tries) {
      if (tries > 1000) throw GenerationError("could not separate X and Y' in scene " + scene_a->id());
      q.p_y_prime = random_free_placement(*scene_a, rng, clearance);
      if (distance(q.p_y_prime.position, q.p_x.position) >= 0.5) break;
    }
    q.p_y = random_free_placement(*scene_b, rng, clearance);

    const FeatureVector anchor = extract(q.p_x, q.p_y_prime, *scene_a, fcfg);
    double best = std::numeric_limits<double>::infinity();
    std::optional<Placement> best_placement;
    for (std::size_t c = 0; c < table.cells().size(); ++c) {
      if (distance(table.cells()[c].center, q.p_y.position) <= kCoincidentTolerance) continue;
      for (int o = 0; o < table.orientations(); ++o) {
        const double d = oracle_distance(anchor, table.features(c, o, q.p_y));
        if (d < best) {
          best = d;
          best_placement = table.placement(c, o);
        }
      }
    }
    if (!best_placement) throw GenerationError("scene " + scene_b->id() + " has no free grid cell");

    q.positives.push_back(*best_placement);
    while (static_cast<int>(q.positives.size()) < scfg.positives) {
      Placement jittered = *best_placement;
      for (int tries = 0; tries < 1000; ++tries) {
        const double r = scfg.jitter_radius * std::sqrt(rng.uniform());
        const double dir = rng.uniform(0.0, kTwoPi);
        const Vec2 pos = best_placement->position + r * Vec2{std::cos(dir), std::sin(dir)};
        const double turn = deg_to_rad(rng.uniform(-scfg.jitter_angle, scfg.jitter_angle));
        if (scene_b->is_free(pos, clearance) && distance(pos, q.p_y.position) > kCoincidentTolerance) {
          jittered = Placement(pos, best_placement->heading + turn);
          break;
        }
      }
      q.positives.push_back(jittered);
    }
    out[idx] = std::move(q);
  });
  return out;
}

std::vector<ScenePair> generate_scene_pairs(std::uint64_t seed, int count) {
  if (count < 1) throw RangeError("need at least one scene pair");
  std::vector<ScenePair> out;
  for (int i = 0; i < count; ++i) {
    char prefix[32];
    std::snprintf(prefix, sizeof prefix, "pair%02d", i);
    const std::uint64_t sa = derive_seed(seed, static_cast<std::uint64_t>(2 * i));
    const std::uint64_t sb = derive_seed(seed, static_cast<std::uint64_t>(2 * i + 1));
    auto a = std::make_shared<const Scene>(generate_synthetic_scene(sa, random_scene_spec(sa), std::string(prefix) + "_a"));
    auto b = std::make_shared<const Scene>(generate_synthetic_scene(sb, random_scene_spec(sb), std::string(prefix) + "_b"));
    out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

TripletDataset build_dataset(const std::vector<SurveyQuestion>& questions, const NegativeSamplingConfig& ncfg,
                             const FeatureConfig& fcfg, std::uint64_t seed, unsigned threads) {
  ncfg.validate();
  fcfg.validate();
  TripletDataset data;
  data.feature_config = fcfg;
  std::map<std::string, std::uint32_t> pair_index;
  std::vector<std::uint32_t> question_pair(questions.size());
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto id = questions[i].pair_id();
    auto [it, inserted] = pair_index.emplace(id, static_cast<std::uint32_t>(data.pair_ids.size()));
    if (inserted) data.pair_ids.push_back(id);
    question_pair[i] = it->second;
  }
  const std::uint64_t neg_seed = derive_seed(seed, "negatives");
  std::vector<std::vector<TripletSample>> per_question(questions.size());
  parallel_for(questions.size(), threads, [&](std::size_t i) {
    const auto negatives = sample_negatives(questions[i], ncfg, derive_seed(neg_seed, static_cast<std::uint64_t>(i)), fcfg);
    per_question[i] = build_triplets(questions[i], negatives, fcfg);
  });
  for (std::size_t i = 0; i < questions.size(); ++i) {
    for (auto& t : per_question[i])
      data.records.push_back({question_pair[i], static_cast<std::uint32_t>(i), std::move(t)});
  }
  return data;
}

std::vector<TripletSample> select_samples(const TripletDataset& data, const std::vector<std::string>& pairs) {
  std::vector<bool> keep(data.pair_ids.size(), pairs.empty());
  for (std::size_t i = 0; i < data.pair_ids.size(); ++i)
    if (std::find(pairs.begin(), pairs.end(), data.pair_ids[i]) != pairs.end()) keep[i] = true;
  std::vector<TripletSample> out;
  for (const auto& r : data.records)
    if (r.pair_index < keep.size() && keep[r.pair_index]) out.push_back(r.sample);
  return out;
}

}  // namespace retarget
