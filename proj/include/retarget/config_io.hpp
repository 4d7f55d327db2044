#pragma once

#include <filesystem>
#include <string_view>

#include "json.hpp"
#include "retarget/dataset.hpp"
#include "retarget/features.hpp"
#include "retarget/grid.hpp"
#include "retarget/solver.hpp"
#include "retarget/trainer.hpp"

namespace retarget {

// JSON mirrors of the typed configs. Absent keys keep their defaults; a key
// of the wrong type raises ParseError.
void to_json(nlohmann::json& j, const FeatureConfig& c);
void from_json(const nlohmann::json& j, FeatureConfig& c);
void to_json(nlohmann::json& j, const GridSpec& c);
void from_json(const nlohmann::json& j, GridSpec& c);
void to_json(nlohmann::json& j, const NegativeSamplingConfig& c);
void from_json(const nlohmann::json& j, NegativeSamplingConfig& c);
void to_json(nlohmann::json& j, const SynthesisConfig& c);
void from_json(const nlohmann::json& j, SynthesisConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const PSOConfig& c);
void from_json(const nlohmann::json& j, PSOConfig& c);
void to_json(nlohmann::json& j, const BilinearConfig& c);
void from_json(const nlohmann::json& j, BilinearConfig& c);

/// Everything a run can be configured with; each section is optional.
struct RunConfig {
  FeatureConfig features;
  GridSpec grid;
  NegativeSamplingConfig sampling;
  SynthesisConfig synthesis;
  TrainConfig train;
  PSOConfig pso;
  BilinearConfig bilinear;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig parse_run_config(std::string_view document);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace retarget
