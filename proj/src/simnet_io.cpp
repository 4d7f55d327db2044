#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "retarget/errors.hpp"
#include "retarget/simnet.hpp"

namespace retarget {

namespace {

constexpr char kMagic[8] = {'R', 'T', 'S', 'I', 'M', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  out.append(reinterpret_cast<const char*>(raw), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw ParseError("model file is truncated");
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw ParseError("model file is truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

// Layout (little-endian): magic[8], u32 version, u32 variant, u64 feature
// fingerprint, u64 seed, u32 tensor count, then per tensor u32 rows, u32 cols
// followed by rows*cols float64 values. Biases are stored as rows x 1.
std::string save_model(const SimilarityModel& model) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.variant()));
  put<std::uint64_t>(out, model.feature_fingerprint());
  put<std::uint64_t>(out, model.seed());
  const auto modules = model.modules();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(modules.size() * 6));
  for (const Bbm* m : modules) {
    for (const auto& layer : m->layers()) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.out_dim));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.in_dim));
      for (double v : layer.weight) put<double>(out, v);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.out_dim));
      put<std::uint32_t>(out, 1u);
      for (double v : layer.bias) put<double>(out, v);
    }
  }
  return out;
}

SimilarityModel load_model(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) throw ParseError("not a model file");
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) throw ParseError("unsupported model file version " + std::to_string(version));
  const auto variant_raw = in.get<std::uint32_t>();
  if (variant_raw >= kAllVariants.size()) throw ParseError("unknown model variant tag");
  const auto variant = static_cast<ModelVariant>(variant_raw);
  const auto fingerprint = in.get<std::uint64_t>();
  const auto seed = in.get<std::uint64_t>();

  SimilarityModel model = SimilarityModel::initialized(variant, seed, fingerprint);
  const auto tensor_count = in.get<std::uint32_t>();
  auto modules = model.modules();
  if (tensor_count != modules.size() * 6)
    throw VariantMismatch("tensor count does not match variant " + std::string(variant_name(variant)));
  auto read_tensor = [&](std::vector<double>& dst, std::size_t rows, std::size_t cols) {
    const auto r = in.get<std::uint32_t>();
    const auto c = in.get<std::uint32_t>();
    if (r != rows || c != cols)
      throw VariantMismatch("tensor shape does not match variant " + std::string(variant_name(variant)));
    for (auto& v : dst) v = in.get<double>();
  };
  for (Bbm* m : modules) {
    for (auto& layer : m->layers()) {
      read_tensor(layer.weight, layer.out_dim, layer.in_dim);
      read_tensor(layer.bias, layer.out_dim, 1);
    }
  }
  if (!in.done()) throw ParseError("trailing bytes after model tensors");
  return model;
}

void save_model_file(const SimilarityModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write model file " + path.string());
  const std::string bytes = save_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

SimilarityModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

}  // namespace retarget
