#include "retarget/config_io.hpp"

#include <fstream>
#include <sstream>

#include "retarget/errors.hpp"

namespace retarget {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.is_object()) throw ParseError("config section must be an object");
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

void to_json(json& j, const FeatureConfig& c) {
  j = {{"va_max_distance", c.va_max_distance},       {"va_max_angle", c.va_max_angle},
       {"sp_max_distance", c.sp_max_distance},       {"pose_inner_radius", c.pose_inner_radius},
       {"pose_outer_radius", c.pose_outer_radius},   {"pose_sectors", c.pose_sectors},
       {"pose_sample_step", c.pose_sample_step},     {"norm_distance_scale", c.norm_distance_scale},
       {"norm_height_scale", c.norm_height_scale}};
}

void from_json(const json& j, FeatureConfig& c) {
  read(j, "va_max_distance", c.va_max_distance);
  read(j, "va_max_angle", c.va_max_angle);
  read(j, "sp_max_distance", c.sp_max_distance);
  read(j, "pose_inner_radius", c.pose_inner_radius);
  read(j, "pose_outer_radius", c.pose_outer_radius);
  read(j, "pose_sectors", c.pose_sectors);
  read(j, "pose_sample_step", c.pose_sample_step);
  read(j, "norm_distance_scale", c.norm_distance_scale);
  read(j, "norm_height_scale", c.norm_height_scale);
}

void to_json(json& j, const GridSpec& c) {
  j = {{"cell_size", c.cell_size}, {"orientations", c.orientations}, {"clearance", c.clearance}};
}

void from_json(const json& j, GridSpec& c) {
  read(j, "cell_size", c.cell_size);
  read(j, "orientations", c.orientations);
  read(j, "clearance", c.clearance);
}

void to_json(json& j, const NegativeSamplingConfig& c) {
  j = {{"random_count", c.random_count},       {"hard_count", c.hard_count},
       {"min_distance", c.min_distance},       {"min_angle", c.min_angle},
       {"min_pose_delta", c.min_pose_delta},   {"max_attempts", c.max_attempts},
       {"clearance", c.clearance},             {"hard_radius_min", c.hard_radius_min},
       {"hard_radius_max", c.hard_radius_max}, {"hard_angle_min", c.hard_angle_min},
       {"hard_angle_max", c.hard_angle_max}};
}

void from_json(const json& j, NegativeSamplingConfig& c) {
  read(j, "random_count", c.random_count);
  read(j, "hard_count", c.hard_count);
  read(j, "min_distance", c.min_distance);
  read(j, "min_angle", c.min_angle);
  read(j, "min_pose_delta", c.min_pose_delta);
  read(j, "max_attempts", c.max_attempts);
  read(j, "clearance", c.clearance);
  read(j, "hard_radius_min", c.hard_radius_min);
  read(j, "hard_radius_max", c.hard_radius_max);
  read(j, "hard_angle_min", c.hard_angle_min);
  read(j, "hard_angle_max", c.hard_angle_max);
}

void to_json(json& j, const SynthesisConfig& c) {
  j = {{"positives", c.positives},
       {"jitter_radius", c.jitter_radius},
       {"jitter_angle", c.jitter_angle},
       {"sit_probability", c.sit_probability},
       {"grid", c.grid}};
}

void from_json(const json& j, SynthesisConfig& c) {
  read(j, "positives", c.positives);
  read(j, "jitter_radius", c.jitter_radius);
  read(j, "jitter_angle", c.jitter_angle);
  read(j, "sit_probability", c.sit_probability);
  read(j, "grid", c.grid);
}

NLOHMANN_JSON_SERIALIZE_ENUM(OptimizerKind, {{OptimizerKind::sgd_momentum, "sgd_momentum"},
                                             {OptimizerKind::adaptive_moment, "adam"}})

void to_json(json& j, const TrainConfig& c) {
  j = {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
       {"epochs", c.epochs},               {"optimizer", c.optimizer},
       {"momentum", c.momentum},           {"beta1", c.beta1},
       {"beta2", c.beta2},                 {"adam_epsilon", c.adam_epsilon},
       {"seed", c.seed},                   {"early_stop_patience", c.early_stop_patience}};
}

void from_json(const json& j, TrainConfig& c) {
  read(j, "learning_rate", c.learning_rate);
  read(j, "batch_size", c.batch_size);
  read(j, "epochs", c.epochs);
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    if (o != "sgd_momentum" && o != "adam") throw ParseError("optimizer must be 'sgd_momentum' or 'adam'");
    c.optimizer = o.get<OptimizerKind>();
  }
  read(j, "momentum", c.momentum);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "adam_epsilon", c.adam_epsilon);
  read(j, "seed", c.seed);
  read(j, "early_stop_patience", c.early_stop_patience);
}

void to_json(json& j, const PSOConfig& c) {
  j = {{"inertia", c.inertia},         {"c1", c.c1},
       {"c2", c.c2},                   {"particles", c.particles},
       {"max_epochs", c.max_epochs},   {"position_jitter", c.position_jitter},
       {"heading_jitter", c.heading_jitter}, {"max_speed", c.max_speed},
       {"max_turn", c.max_turn},       {"seed", c.seed}};
}

void from_json(const json& j, PSOConfig& c) {
  read(j, "inertia", c.inertia);
  read(j, "c1", c.c1);
  read(j, "c2", c.c2);
  read(j, "particles", c.particles);
  read(j, "max_epochs", c.max_epochs);
  read(j, "position_jitter", c.position_jitter);
  read(j, "heading_jitter", c.heading_jitter);
  read(j, "max_speed", c.max_speed);
  read(j, "max_turn", c.max_turn);
  read(j, "seed", c.seed);
}

void to_json(json& j, const BilinearConfig& c) {
  j = {{"margin", c.margin},
       {"learning_rate", c.learning_rate},
       {"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"seed", c.seed}};
}

void from_json(const json& j, BilinearConfig& c) {
  read(j, "margin", c.margin);
  read(j, "learning_rate", c.learning_rate);
  read(j, "epochs", c.epochs);
  read(j, "batch_size", c.batch_size);
  read(j, "seed", c.seed);
}

void to_json(json& j, const RunConfig& c) {
  j = {{"features", c.features}, {"grid", c.grid}, {"sampling", c.sampling}, {"synthesis", c.synthesis},
       {"train", c.train},       {"pso", c.pso},   {"bilinear", c.bilinear}};
}

void from_json(const json& j, RunConfig& c) {
  read(j, "features", c.features);
  read(j, "grid", c.grid);
  read(j, "sampling", c.sampling);
  read(j, "synthesis", c.synthesis);
  read(j, "train", c.train);
  read(j, "pso", c.pso);
  read(j, "bilinear", c.bilinear);
}

RunConfig parse_run_config(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  RunConfig c;
  from_json(doc, c);
  c.features.validate();
  c.grid.validate();
  c.sampling.validate();
  c.train.validate();
  c.pso.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace retarget
