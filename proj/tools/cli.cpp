#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "retarget/config_io.hpp"
#include "retarget/dataset.hpp"
#include "retarget/eval.hpp"
#include "retarget/rng.hpp"
#include "retarget/scene.hpp"
#include "retarget/simnet.hpp"
#include "retarget/solver.hpp"
#include "retarget/trainer.hpp"

namespace retarget {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kArtifactVersion = "1";

struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string config;
  std::string manifest;
};

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {}
  void operator()(const std::string& line) const { err_ << "[retarget] " << line << "\n"; }

 private:
  std::ostream& err_;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ParseError("write failed for '" + path.string() + "'");
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Records what a run read and wrote; written once at the end of the command.
class Manifest {
 public:
  Manifest(std::string command, const Common& common) : common_(common) {
    doc_["command"] = std::move(command);
    doc_["artifact_version"] = kArtifactVersion;
    doc_["seed"] = common.seed;
    doc_["config"] = json::object();
    doc_["inputs"] = json::object();
    doc_["outputs"] = json::array();
  }

  void config(const std::string& section, json value) { doc_["config"][section] = std::move(value); }
  void input(const fs::path& path) { doc_["inputs"][path.generic_string()] = hex(fnv1a(read_file(path))); }
  void input_bytes(const std::string& name, const std::string& bytes) { doc_["inputs"][name] = hex(fnv1a(bytes)); }
  void output(const fs::path& path) { doc_["outputs"].push_back(path.generic_string()); }

  const json& doc() const { return doc_; }

  /// Writes to --manifest, else to `fallback`; returns the path used.
  fs::path write(const fs::path& fallback) const {
    const fs::path path = common_.manifest.empty() ? fallback : fs::path(common_.manifest);
    write_file(path, doc_.dump(2) + "\n");
    return path;
  }

 private:
  const Common& common_;
  json doc_;
};

RunConfig run_config(const Common& c) { return c.config.empty() ? RunConfig{} : load_run_config(c.config); }

Placement parse_placement_flag(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("placement '" + text + "' must be X,Y,HEADING");
    }
  }
  if (v.size() != 3) throw UsageError("placement '" + text + "' must be X,Y,HEADING");
  return Placement({v[0], v[1]}, v[2]);
}

json placement_json(const Placement& p) {
  return {{"pos", json::array({p.position.x, p.position.y})}, {"heading", p.heading}};
}

struct SceneSet {
  SceneRegistry registry;
  std::vector<ScenePair> pairs;
};

/// Scenes of a directory written by gen-scenes: every *.json file except the
/// pair list and manifests; pairs come from pairs.json when present.
SceneSet load_scene_dir(const fs::path& dir, Manifest* manifest) {
  if (!fs::is_directory(dir)) throw UnknownScene("scene directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (p.extension() != ".json" || p.filename() == "pairs.json" || p.filename() == "manifest.json") continue;
    files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  SceneSet set;
  for (const auto& f : files) {
    auto scene = std::make_shared<const Scene>(load_scene_file(f));
    if (manifest) manifest->input(f);
    const std::string id = scene->id();
    if (!set.registry.emplace(id, std::move(scene)).second) throw ParseError("duplicate scene id '" + id + "'");
  }
  if (set.registry.empty()) throw UnknownScene("no scene files in '" + dir.string() + "'");
  const fs::path pairs_file = dir / "pairs.json";
  if (fs::exists(pairs_file)) {
    if (manifest) manifest->input(pairs_file);
    json doc;
    try {
      doc = json::parse(read_file(pairs_file));
      for (const auto& p : doc.at("pairs")) {
        const auto a = p.at("a").get<std::string>();
        const auto b = p.at("b").get<std::string>();
        const auto ia = set.registry.find(a);
        const auto ib = set.registry.find(b);
        if (ia == set.registry.end()) throw UnknownScene("pair references unknown scene '" + a + "'");
        if (ib == set.registry.end()) throw UnknownScene("pair references unknown scene '" + b + "'");
        set.pairs.emplace_back(ia->second, ib->second);
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("pairs.json: ") + e.what());
    }
  }
  return set;
}

// ---- commands ----------------------------------------------------------------

struct GenScenesArgs {
  int pairs = 1;
  std::string out;
};

json cmd_gen_scenes(const GenScenesArgs& a, const Common& c, const Log& log) {
  if (a.pairs < 1) throw UsageError("--pairs must be >= 1");
  Manifest manifest("gen-scenes", c);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  const auto pairs = generate_scene_pairs(derive_seed(c.seed, "scenes"), a.pairs);
  json list = json::array();
  for (const auto& [sa, sb] : pairs) {
    for (const auto* s : {sa.get(), sb.get()}) {
      const fs::path path = dir / (s->id() + ".json");
      write_file(path, serialize_scene(*s));
      manifest.output(path);
    }
    list.push_back({{"a", sa->id()}, {"b", sb->id()}});
  }
  const fs::path pairs_path = dir / "pairs.json";
  write_file(pairs_path, json{{"pairs", list}}.dump(2) + "\n");
  manifest.output(pairs_path);
  manifest.config("pairs", a.pairs);
  const auto mpath = manifest.write(dir / "manifest.json");
  log("wrote " + std::to_string(2 * pairs.size()) + " scenes to " + dir.string());
  return {{"scenes", 2 * pairs.size()}, {"pairs", pairs.size()}, {"out", dir.generic_string()},
          {"manifest", mpath.generic_string()}};
}

struct GenDatasetArgs {
  std::string scenes;
  std::string survey;
  int questions_per_pair = 36;
  std::string out;
  std::string survey_out;
};

json cmd_gen_dataset(const GenDatasetArgs& a, const Common& c, const Log& log) {
  const RunConfig cfg = run_config(c);
  Manifest manifest("gen-dataset", c);
  if (!c.config.empty()) manifest.input(c.config);
  const SceneSet scenes = load_scene_dir(a.scenes, &manifest);

  std::vector<SurveyQuestion> questions;
  if (!a.survey.empty()) {
    questions = load_survey_file(a.survey, scenes.registry);
    manifest.input(a.survey);
    log("loaded " + std::to_string(questions.size()) + " survey questions");
  } else {
    if (a.questions_per_pair < 1) throw UsageError("--questions-per-pair must be >= 1");
    if (scenes.pairs.empty()) throw UnknownScene("no pairs.json in '" + a.scenes + "'");
    questions = synthesize_survey(scenes.pairs, a.questions_per_pair, derive_seed(c.seed, "survey"), cfg.features,
                                  cfg.synthesis, c.threads);
    log("synthesized " + std::to_string(questions.size()) + " questions");
  }
  if (questions.empty()) throw EmptyInput("survey has no questions");

  const TripletDataset data = build_dataset(questions, cfg.sampling, cfg.features, derive_seed(c.seed, "dataset"),
                                            c.threads);
  const fs::path out(a.out);
  write_triplet_file(data, out);
  manifest.output(out);
  const fs::path survey_out = a.survey_out.empty() ? fs::path(a.out + ".survey.json") : fs::path(a.survey_out);
  write_file(survey_out, serialize_survey(questions));
  manifest.output(survey_out);
  manifest.config("features", cfg.features);
  manifest.config("sampling", cfg.sampling);
  manifest.config("synthesis", cfg.synthesis);
  manifest.config("questions_per_pair", a.questions_per_pair);
  const auto mpath = manifest.write(a.out + ".manifest.json");
  log("wrote " + std::to_string(data.records.size()) + " triplets to " + out.string());
  return {{"questions", questions.size()},
          {"triplets", data.records.size()},
          {"pairs", data.pair_ids.size()},
          {"out", out.generic_string()},
          {"survey", survey_out.generic_string()},
          {"manifest", mpath.generic_string()}};
}

struct TrainArgs {
  std::string data;
  std::string variant = "proposed";
  std::string out;
  int epochs = -1;
  std::size_t max_triplets = 0;
  std::size_t max_questions = 0;
};

// Samples of the given pairs, limited to `max_questions` randomly chosen
// questions when nonzero.
std::vector<TripletSample> split_samples(const TripletDataset& data, const std::vector<std::string>& pairs,
                                         std::size_t max_questions, std::uint64_t seed) {
  if (max_questions == 0) return select_samples(data, pairs);
  std::vector<bool> in_split(data.pair_ids.size(), pairs.empty());
  for (std::size_t i = 0; i < data.pair_ids.size(); ++i)
    if (std::find(pairs.begin(), pairs.end(), data.pair_ids[i]) != pairs.end()) in_split[i] = true;
  std::vector<std::uint32_t> questions;
  for (const auto& r : data.records)
    if (r.pair_index < in_split.size() && in_split[r.pair_index] &&
        (questions.empty() || questions.back() != r.question_index))
      questions.push_back(r.question_index);
  std::vector<std::uint32_t> chosen;
  for (auto i : subsample_indices(questions.size(), max_questions, seed)) chosen.push_back(questions[i]);
  std::vector<TripletSample> out;
  for (const auto& r : data.records)
    if (std::binary_search(chosen.begin(), chosen.end(), r.question_index)) out.push_back(r.sample);
  return out;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,phi,psi,total,train_accuracy,test_accuracy\n";
  for (const auto& h : history) {
    out += std::to_string(h.epoch) + "," + format_double(h.phi) + "," + format_double(h.psi) + "," +
           format_double(h.total) + "," + format_double(h.train_accuracy) + "," +
           (h.test_accuracy ? format_double(*h.test_accuracy) : std::string()) + "\n";
  }
  return out;
}

json cmd_train(const TrainArgs& a, const Common& c, const Log& log) {
  const ModelVariant variant = parse_variant(a.variant);
  RunConfig cfg = run_config(c);
  if (a.epochs >= 0) cfg.train.epochs = a.epochs;
  cfg.train.seed = derive_seed(c.seed, "train");
  cfg.train.threads = c.threads;
  cfg.train.validate();

  Manifest manifest("train", c);
  if (!c.config.empty()) manifest.input(c.config);
  const TripletDataset data = read_triplet_file(a.data);
  manifest.input(a.data);

  std::vector<TripletSample> train_set, test_set;
  json split_json = json::object();
  if (data.pair_ids.size() >= 2) {
    const SplitSpec split = split_by_pairs(data.pair_ids, derive_seed(c.seed, "split"));
    train_set = split_samples(data, split.train_pairs, a.max_questions, derive_seed(c.seed, "questions-train"));
    test_set = split_samples(data, split.test_pairs, a.max_questions, derive_seed(c.seed, "questions-test"));
    split_json = {{"train_pairs", split.train_pairs}, {"test_pairs", split.test_pairs}};
  } else {
    train_set = split_samples(data, {}, a.max_questions, derive_seed(c.seed, "questions-train"));
    log("single scene pair: training without a held-out split");
  }
  if (a.max_triplets > 0) {
    auto pick = [&](std::vector<TripletSample>& set, const char* role) {
      std::vector<TripletSample> kept;
      for (auto i : subsample_indices(set.size(), a.max_triplets, derive_seed(c.seed, role))) kept.push_back(set[i]);
      set = std::move(kept);
    };
    pick(train_set, "subsample-train");
    if (!test_set.empty()) pick(test_set, "subsample-test");
  }
  log("training " + std::string(variant_name(variant)) + " on " + std::to_string(train_set.size()) + " triplets");

  const auto init = SimilarityModel::initialized(variant, derive_seed(c.seed, "init"), data.feature_config.fingerprint());
  const TrainResult result = train(init, train_set, cfg.train, test_set);
  const fs::path out(a.out);
  write_file(out, save_model(result.model));
  manifest.output(out);
  const fs::path hist(a.out + ".history.csv");
  write_file(hist, history_csv(result.history));
  manifest.output(hist);
  manifest.config("features", data.feature_config);
  manifest.config("train", cfg.train);
  manifest.config("variant", std::string(variant_name(variant)));
  manifest.config("max_triplets", a.max_triplets);
  manifest.config("max_questions", a.max_questions);
  manifest.config("split", split_json);
  const auto mpath = manifest.write(a.out + ".manifest.json");

  json res = {{"variant", variant_name(variant)},
              {"epochs_run", result.history.size()},
              {"best_epoch", result.best_epoch},
              {"train_triplets", train_set.size()},
              {"test_triplets", test_set.size()},
              {"model", out.generic_string()},
              {"manifest", mpath.generic_string()}};
  if (!result.history.empty()) res["final_loss"] = result.history.back().total;
  res["train_accuracy"] = triplet_accuracy(result.model, train_set, c.threads);
  if (!test_set.empty()) res["test_accuracy"] = triplet_accuracy(result.model, test_set, c.threads);
  return res;
}

struct PlaceArgs {
  std::string model;
  std::string scene_a;
  std::string scene_b;
  std::string px, py, pyprime;
  std::string out;
};

json cmd_place(const PlaceArgs& a, const Common& c, const Log& log) {
  RunConfig cfg = run_config(c);
  cfg.pso.seed = derive_seed(c.seed, "pso");
  Manifest manifest("place", c);
  if (!c.config.empty()) manifest.input(c.config);
  const SimilarityModel model = load_model_file(a.model);
  manifest.input(a.model);
  PlacementQuery q;
  q.scene_a = std::make_shared<const Scene>(load_scene_file(a.scene_a));
  manifest.input(a.scene_a);
  q.scene_b = std::make_shared<const Scene>(load_scene_file(a.scene_b));
  manifest.input(a.scene_b);
  q.p_x = parse_placement_flag(a.px);
  q.p_y = parse_placement_flag(a.py);
  q.p_y_prime = parse_placement_flag(a.pyprime);
  if (!q.scene_a->inside_floor(q.p_x.position) || !q.scene_a->inside_floor(q.p_y_prime.position))
    throw InvariantError(q.scene_a->id(), "query placement outside scene A");
  if (!q.scene_b->inside_floor(q.p_y.position)) throw InvariantError(q.scene_b->id(), "query placement outside scene B");

  const PlacementResult r = place_avatar(model, q, cfg.features, cfg.grid, cfg.pso, c.threads);
  log("placed avatar in " + std::to_string(r.timings.table_ms + r.timings.grid_ms + r.timings.pso_ms) + " ms");

  json result = {{"placement", placement_json(r.placement)},
                 {"stance", r.stance == Stance::sit ? "sit" : "stand"},
                 {"dissimilarity", r.dissimilarity},
                 {"grid_best", placement_json(r.grid_best)},
                 {"grid_dissimilarity", r.grid_dissimilarity}};
  manifest.config("features", cfg.features);
  manifest.config("grid", cfg.grid);
  manifest.config("pso", cfg.pso);
  manifest.config("query", {{"p_x", placement_json(q.p_x)},
                            {"p_y", placement_json(q.p_y)},
                            {"p_y_prime", placement_json(q.p_y_prime)}});
  json res = result;
  if (!a.out.empty()) {
    write_file(a.out, result.dump(2) + "\n");
    manifest.output(a.out);
    res["manifest"] = manifest.write(a.out + ".manifest.json").generic_string();
  } else if (!c.manifest.empty()) {
    res["manifest"] = manifest.write(c.manifest).generic_string();
  } else {
    res["manifest"] = manifest.doc();
  }
  res["timings_ms"] = {{"table", r.timings.table_ms}, {"grid", r.timings.grid_ms}, {"pso", r.timings.pso_ms}};
  return res;
}

struct EvalArgs {
  std::string model;
  std::string survey;
  std::string scenes;
  std::string out;
};

json cmd_eval(const EvalArgs& a, const Common& c, const Log& log) {
  const RunConfig cfg = run_config(c);
  Manifest manifest("eval", c);
  if (!c.config.empty()) manifest.input(c.config);
  const SimilarityModel model = load_model_file(a.model);
  manifest.input(a.model);
  const SceneSet scenes = load_scene_dir(a.scenes, &manifest);
  const auto questions = load_survey_file(a.survey, scenes.registry);
  manifest.input(a.survey);
  if (questions.empty()) throw EmptyInput("survey has no questions");

  // one table per scene B, shared by its questions
  std::map<const Scene*, std::unique_ptr<SceneFeatureTable>> tables;
  std::vector<RankRecord> records;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const Scene* b = questions[i].scene_b.get();
    auto it = tables.find(b);
    if (it == tables.end())
      it = tables.emplace(b, std::make_unique<SceneFeatureTable>(*b, cfg.grid, cfg.features, c.threads)).first;
    const auto r = rank_positives(model, questions[i], cfg.features, cfg.grid, i, c.threads, it->second.get());
    records.insert(records.end(), r.begin(), r.end());
  }
  if (records.empty()) throw EmptyInput("survey has no positives to rank");
  const CmcCurve curve = cmc_curve(records);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_file(dir / "ranks.csv", ranks_csv(records));
  write_file(dir / "cmc.csv", cmc_csv(curve));
  manifest.output(dir / "ranks.csv");
  manifest.output(dir / "cmc.csv");
  manifest.config("features", cfg.features);
  manifest.config("grid", cfg.grid);
  const auto mpath = manifest.write(dir / "manifest.json");
  log("ranked " + std::to_string(records.size()) + " positives over " + std::to_string(questions.size()) +
      " questions");
  double mean_percentile = 0.0;
  for (const auto& r : records) mean_percentile += r.percentile;
  mean_percentile /= static_cast<double>(records.size());
  return {{"questions", questions.size()},
          {"positives", records.size()},
          {"mean_percentile", mean_percentile},
          {"cmc_at_1", curve[0]},
          {"cmc_at_10", curve[9]},
          {"out", dir.generic_string()},
          {"manifest", mpath.generic_string()}};
}

struct HeatmapArgs {
  std::string model;
  std::string survey;
  std::string scenes;
  std::size_t question = 0;
  std::string out;
};

json cmd_heatmap(const HeatmapArgs& a, const Common& c, const Log& log) {
  const RunConfig cfg = run_config(c);
  Manifest manifest("heatmap", c);
  if (!c.config.empty()) manifest.input(c.config);
  const SimilarityModel model = load_model_file(a.model);
  manifest.input(a.model);
  const SceneSet scenes = load_scene_dir(a.scenes, &manifest);
  const auto questions = load_survey_file(a.survey, scenes.registry);
  manifest.input(a.survey);
  if (a.question >= questions.size())
    throw UsageError("--question " + std::to_string(a.question) + " out of range (survey has " +
                     std::to_string(questions.size()) + ")");
  const HeatmapGrid heat = compute_heatmap(model, questions[a.question], cfg.features, cfg.grid, c.threads);
  const fs::path ppm(a.out + ".ppm"), csv(a.out + ".csv");
  write_file(ppm, heatmap_ppm(heat));
  write_file(csv, heatmap_csv(heat));
  manifest.output(ppm);
  manifest.output(csv);
  manifest.config("features", cfg.features);
  manifest.config("grid", cfg.grid);
  manifest.config("question", a.question);
  const auto mpath = manifest.write(a.out + ".manifest.json");
  std::size_t feasible = 0;
  for (const auto& cell : heat.cells) feasible += cell.feasible;
  log("heatmap of scene " + heat.scene_id + ": " + std::to_string(feasible) + " feasible cells");
  return {{"scene", heat.scene_id},   {"rows", heat.rows},
          {"cols", heat.cols},        {"feasible_cells", feasible},
          {"ppm", ppm.generic_string()}, {"csv", csv.generic_string()},
          {"manifest", mpath.generic_string()}};
}

struct AblationArgs {
  std::string data;
  std::vector<std::string> variants;
  int seeds = 5;
  int epochs = -1;
  std::size_t max_triplets = 0;
  std::string out;
};

json cmd_ablation(const AblationArgs& a, const Common& c, const Log& log) {
  if (a.seeds < 1) throw UsageError("--seeds must be >= 1");
  RunConfig cfg = run_config(c);
  if (a.epochs >= 0) cfg.train.epochs = a.epochs;
  cfg.train.threads = c.threads;
  Manifest manifest("ablation", c);
  if (!c.config.empty()) manifest.input(c.config);
  const TripletDataset data = read_triplet_file(a.data);
  manifest.input(a.data);
  const SplitSpec split = split_by_pairs(data.pair_ids, derive_seed(c.seed, "split"));
  std::vector<TripletSample> train_set = select_samples(data, split.train_pairs);
  std::vector<TripletSample> test_set = select_samples(data, split.test_pairs);
  if (a.max_triplets > 0) {
    std::vector<TripletSample> kept;
    for (auto i : subsample_indices(train_set.size(), a.max_triplets, derive_seed(c.seed, "subsample-train")))
      kept.push_back(train_set[i]);
    train_set = std::move(kept);
  }
  std::vector<ModelVariant> variants;
  if (a.variants.empty()) {
    variants = {ModelVariant::proposed_sfpm_dfn, ModelVariant::bbm_dfn, ModelVariant::sfpm_nodfn,
                ModelVariant::bbm_nodfn};
  } else {
    for (const auto& v : a.variants) variants.push_back(parse_variant(v));
  }
  std::vector<std::pair<std::string, std::vector<double>>> acc;
  for (const auto v : variants) {
    std::vector<double> per_seed;
    for (int s = 0; s < a.seeds; ++s) {
      const std::uint64_t run_seed = derive_seed(c.seed, static_cast<std::uint64_t>(s));
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(run_seed, "train");
      const auto init =
          SimilarityModel::initialized(v, derive_seed(run_seed, "init"), data.feature_config.fingerprint());
      const TrainResult r = train(init, train_set, tc, test_set);
      per_seed.push_back(triplet_accuracy(r.model, test_set, c.threads));
      log(std::string(variant_name(v)) + " seed " + std::to_string(s) + ": " + format_double(per_seed.back()));
    }
    acc.emplace_back(std::string(variant_name(v)), std::move(per_seed));
  }
  const auto rows = ablation_table(acc);
  write_file(a.out, ablation_csv(rows));
  manifest.output(a.out);
  manifest.config("train", cfg.train);
  manifest.config("seeds", a.seeds);
  manifest.config("max_triplets", a.max_triplets);
  const auto mpath = manifest.write(a.out + ".manifest.json");
  json table = json::array();
  for (const auto& r : rows) table.push_back({{"variant", r.variant}, {"mean", r.mean}, {"std", r.stddev}});
  return {{"rows", table}, {"out", a.out}, {"manifest", mpath.generic_string()}};
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed for every random choice of the command");
  cmd->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  cmd->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--manifest", c.manifest, "Where to write the run manifest");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Placement retargeting between dissimilar indoor scenes"};
  app.require_subcommand(1);
  Common common;
  std::function<json()> action;
  const Log log(err);

  GenScenesArgs gs;
  auto* gen_scenes = app.add_subcommand("gen-scenes", "Generate random synthetic scene pairs");
  add_common(gen_scenes, common);
  gen_scenes->add_option("--pairs", gs.pairs, "Number of scene pairs")->required();
  gen_scenes->add_option("--out", gs.out, "Output directory")->required();
  gen_scenes->callback([&] { action = [&] { return cmd_gen_scenes(gs, common, log); }; });

  GenDatasetArgs gd;
  auto* gen_dataset = app.add_subcommand("gen-dataset", "Build a triplet file from scenes and a survey");
  add_common(gen_dataset, common);
  gen_dataset->add_option("--scenes", gd.scenes, "Scene directory")->required();
  gen_dataset->add_option("--survey", gd.survey, "Survey JSON (synthesized when omitted)");
  gen_dataset->add_option("--questions-per-pair", gd.questions_per_pair, "Synthetic questions per scene pair");
  gen_dataset->add_option("--out", gd.out, "Triplet file")->required();
  gen_dataset->add_option("--survey-out", gd.survey_out, "Where to write the survey used (default OUT.survey.json)");
  gen_dataset->callback([&] { action = [&] { return cmd_gen_dataset(gd, common, log); }; });

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a similarity model");
  add_common(train_cmd, common);
  train_cmd->add_option("--data", tr.data, "Triplet file")->required();
  train_cmd->add_option("--variant", tr.variant, "proposed | bbm_dfn | sfpm_nodfn | bbm_nodfn | plain_triplet");
  train_cmd->add_option("--out", tr.out, "Model file")->required();
  train_cmd->add_option("--epochs", tr.epochs, "Override the configured epoch count");
  train_cmd->add_option("--max-triplets", tr.max_triplets, "Random subset size per split (0 keeps all)");
  train_cmd->add_option("--max-questions", tr.max_questions, "Random question count per split (0 keeps all)");
  train_cmd->callback([&] { action = [&] { return cmd_train(tr, common, log); }; });

  PlaceArgs pl;
  auto* place = app.add_subcommand("place", "Place the avatar of X in scene B");
  add_common(place, common);
  place->add_option("--model", pl.model, "Model file")->required();
  place->add_option("--scene-a", pl.scene_a, "Scene of person X")->required();
  place->add_option("--scene-b", pl.scene_b, "Scene of person Y")->required();
  place->add_option("--px", pl.px, "X in scene A as x,y,heading (radians)")->required();
  place->add_option("--py", pl.py, "Y in scene B as x,y,heading")->required();
  place->add_option("--pyprime", pl.pyprime, "Avatar of Y in scene A as x,y,heading")->required();
  place->add_option("--out", pl.out, "Also write the result (without timings) here");
  place->callback([&] { action = [&] { return cmd_place(pl, common, log); }; });

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Percentile ranks and CMC of survey positives");
  add_common(eval, common);
  eval->add_option("--model", ev.model, "Model file")->required();
  eval->add_option("--survey", ev.survey, "Survey JSON")->required();
  eval->add_option("--scenes", ev.scenes, "Scene directory")->required();
  eval->add_option("--out", ev.out, "Output directory")->required();
  eval->callback([&] { action = [&] { return cmd_eval(ev, common, log); }; });

  HeatmapArgs hm;
  auto* heatmap = app.add_subcommand("heatmap", "Best-heading dissimilarity map of one question");
  add_common(heatmap, common);
  heatmap->add_option("--model", hm.model, "Model file")->required();
  heatmap->add_option("--survey", hm.survey, "Survey JSON")->required();
  heatmap->add_option("--scenes", hm.scenes, "Scene directory")->required();
  heatmap->add_option("--question", hm.question, "Question index in the survey");
  heatmap->add_option("--out", hm.out, "Output prefix (.ppm and .csv are appended)")->required();
  heatmap->callback([&] { action = [&] { return cmd_heatmap(hm, common, log); }; });

  AblationArgs ab;
  auto* ablation = app.add_subcommand("ablation", "Train network variants over several seeds");
  add_common(ablation, common);
  ablation->add_option("--data", ab.data, "Triplet file")->required();
  ablation->add_option("--variant", ab.variants, "Variants to compare (repeatable)");
  ablation->add_option("--seeds", ab.seeds, "Training seeds per variant");
  ablation->add_option("--epochs", ab.epochs, "Override the configured epoch count");
  ablation->add_option("--max-triplets", ab.max_triplets, "Random training subset size (0 keeps all)");
  ablation->add_option("--out", ab.out, "Ablation CSV")->required();
  ablation->callback([&] { action = [&] { return cmd_ablation(ab, common, log); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "[retarget] usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    const json result = action();
    out << result.dump() << "\n";
    return 0;
  } catch (const Error& e) {
    switch (e.error_class()) {
      case ErrorClass::usage:
        err << "[retarget] usage error: " << e.what() << "\n";
        return 2;
      case ErrorClass::data:
        err << "[retarget] data error: " << e.what() << "\n";
        return 3;
      case ErrorClass::numeric:
        err << "[retarget] numeric failure: " << e.what() << "\n";
        return 4;
    }
  } catch (const fs::filesystem_error& e) {
    err << "[retarget] data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "[retarget] data error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}

}  // namespace retarget
