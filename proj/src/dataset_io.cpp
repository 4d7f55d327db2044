#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "retarget/config_io.hpp"
#include "retarget/dataset.hpp"
#include "retarget/errors.hpp"

namespace retarget {

using nlohmann::json;

namespace {

Placement parse_placement(const json& j) {
  if (!j.is_object() || !j.contains("pos") || !j.contains("heading")) throw ParseError("placement needs pos and heading");
  const auto& pos = j["pos"];
  if (!pos.is_array() || pos.size() != 2 || !pos[0].is_number() || !pos[1].is_number() || !j["heading"].is_number())
    throw ParseError("placement pos must be [x, y] and heading a number");
  return Placement({pos[0].get<double>(), pos[1].get<double>()}, j["heading"].get<double>());
}

json placement_json(const Placement& p) {
  return {{"pos", json::array({p.position.x, p.position.y})}, {"heading", p.heading}};
}

const ScenePtr& lookup(const SceneRegistry& scenes, const json& id) {
  if (!id.is_string()) throw ParseError("scene references must be strings");
  const auto it = scenes.find(id.get<std::string>());
  if (it == scenes.end()) throw UnknownScene("unknown scene \"" + id.get<std::string>() + "\"");
  return it->second;
}

void require_inside(const Scene& scene, const Placement& p, std::size_t question, const char* what) {
  if (!scene.inside_floor(p.position))
    throw InvariantError("question " + std::to_string(question),
                         std::string(what) + " lies outside the floor of scene " + scene.id());
}

}  // namespace

std::vector<SurveyQuestion> load_survey(std::string_view document, const SceneRegistry& scenes) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("survey document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("questions") || !doc["questions"].is_array())
    throw ParseError("survey document needs a \"questions\" array");
  std::vector<SurveyQuestion> out;
  for (const auto& jq : doc["questions"]) {
    if (!jq.is_object()) throw ParseError("questions must be JSON objects");
    for (const char* key : {"scene_a", "scene_b", "p_x", "p_y_prime", "p_y", "positives"}) {
      if (!jq.contains(key)) throw ParseError(std::string("question is missing \"") + key + "\"");
    }
    SurveyQuestion q;
    q.scene_a = lookup(scenes, jq["scene_a"]);
    q.scene_b = lookup(scenes, jq["scene_b"]);
    q.p_x = parse_placement(jq["p_x"]);
    q.p_y_prime = parse_placement(jq["p_y_prime"]);
    q.p_y = parse_placement(jq["p_y"]);
    if (!jq["positives"].is_array()) throw ParseError("\"positives\" must be an array");
    for (const auto& jp : jq["positives"]) q.positives.push_back(parse_placement(jp));
    const std::size_t idx = out.size();
    if (q.positives.empty()) throw InvariantError("question " + std::to_string(idx), "no positives");
    require_inside(*q.scene_a, q.p_x, idx, "p_x");
    require_inside(*q.scene_a, q.p_y_prime, idx, "p_y_prime");
    require_inside(*q.scene_b, q.p_y, idx, "p_y");
    for (const auto& p : q.positives) require_inside(*q.scene_b, p, idx, "positive");
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<SurveyQuestion> load_survey_file(const std::filesystem::path& path, const SceneRegistry& scenes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open survey file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_survey(buf.str(), scenes);
}

std::string serialize_survey(const std::vector<SurveyQuestion>& questions) {
  json arr = json::array();
  for (const auto& q : questions) {
    json positives = json::array();
    for (const auto& p : q.positives) positives.push_back(placement_json(p));
    arr.push_back({{"scene_a", q.scene_a->id()},
                   {"scene_b", q.scene_b->id()},
                   {"p_x", placement_json(q.p_x)},
                   {"p_y_prime", placement_json(q.p_y_prime)},
                   {"p_y", placement_json(q.p_y)},
                   {"positives", std::move(positives)}});
  }
  return json{{"questions", std::move(arr)}}.dump(1) + "\n";
}

// ---- triplet files -----------------------------------------------------------
//
// magic[8] "RTTRIPLE", u32 version, u64 header length, UTF-8 JSON header
// {feature_config, fingerprint, pairs, count}, then `count` records of
// u32 pair index, u32 question index, 3 x 45 float64 (anchor, positive,
// negative). Little-endian throughout.

namespace {

constexpr char kTripletMagic[8] = {'R', 'T', 'T', 'R', 'I', 'P', 'L', 'E'};
constexpr std::uint32_t kTripletVersion = 1;

template <typename T>
void put(std::string& out, T value) {
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  out.append(reinterpret_cast<const char*>(raw), sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw ParseError("triplet file is truncated");
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, bytes.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, raw, sizeof(T));
  return v;
}

}  // namespace

std::string serialize_triplets(const TripletDataset& data) {
  json header;
  header["feature_config"] = data.feature_config;
  header["fingerprint"] = data.feature_config.fingerprint();
  header["pairs"] = data.pair_ids;
  header["count"] = data.records.size();
  const std::string header_text = header.dump();

  std::string out(kTripletMagic, sizeof kTripletMagic);
  put<std::uint32_t>(out, kTripletVersion);
  put<std::uint64_t>(out, header_text.size());
  out += header_text;
  out.reserve(out.size() + data.records.size() * (8 + 3 * kFeatureDim * 8));
  for (const auto& r : data.records) {
    put<std::uint32_t>(out, r.pair_index);
    put<std::uint32_t>(out, r.question_index);
    for (const auto* v : {&r.sample.anchor, &r.sample.positive, &r.sample.negative})
      for (double x : *v) put<double>(out, x);
  }
  return out;
}

TripletDataset parse_triplets(std::string_view bytes) {
  if (bytes.size() < sizeof kTripletMagic || bytes.substr(0, sizeof kTripletMagic) != std::string_view(kTripletMagic, 8))
    throw ParseError("not a triplet file");
  std::size_t pos = sizeof kTripletMagic;
  if (get<std::uint32_t>(bytes, pos) != kTripletVersion) throw ParseError("unsupported triplet file version");
  const auto header_len = get<std::uint64_t>(bytes, pos);
  if (pos + header_len > bytes.size()) throw ParseError("triplet file is truncated");
  json header;
  try {
    header = json::parse(bytes.substr(pos, header_len));
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad triplet header: ") + e.what());
  }
  pos += header_len;

  TripletDataset data;
  try {
    data.feature_config = header.at("feature_config").get<FeatureConfig>();
    data.pair_ids = header.at("pairs").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad triplet header: ") + e.what());
  }
  const auto count = header.value("count", std::size_t{0});
  data.records.resize(count);
  for (auto& r : data.records) {
    r.pair_index = get<std::uint32_t>(bytes, pos);
    r.question_index = get<std::uint32_t>(bytes, pos);
    if (r.pair_index >= data.pair_ids.size()) throw ParseError("triplet record references an unknown pair");
    for (auto* v : {&r.sample.anchor, &r.sample.positive, &r.sample.negative})
      for (double& x : *v) {
        x = get<double>(bytes, pos);
        if (!std::isfinite(x)) throw ParseError("triplet file contains a non-finite feature");
      }
  }
  if (pos != bytes.size()) throw ParseError("trailing bytes after triplet records");
  return data;
}

void write_triplet_file(const TripletDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write triplet file " + path.string());
  const std::string bytes = serialize_triplets(data);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TripletDataset read_triplet_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open triplet file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_triplets(buf.str());
}

}  // namespace retarget
