#include "mgdil/dil/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <type_traits>

#include "mgdil/util/error.hpp"

namespace mgdil::dil {

namespace {

constexpr char kMagic[8] = {'M', 'G', 'D', 'I', 'L', 'C', 'K', 'P'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError(std::string("checkpoint truncated in ") + what);
  return value;
}

ModelDims dims_from(const nlohmann::json& j) {
  ModelDims d;
  d.input = j.at("input").get<std::size_t>();
  d.hidden = j.at("hidden").get<std::size_t>();
  d.latent = j.at("latent").get<std::size_t>();
  d.projection = j.at("projection").get<std::size_t>();
  d.domains = j.at("domains").get<std::size_t>();
  d.classes = j.at("classes").get<std::size_t>();
  return d;
}

// Reads everything up to the payload and leaves `in` positioned on it.
CheckpointInfo read_header(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ParseError("not a checkpoint file (bad magic)");
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
  const auto length = get<std::uint64_t>(in, "header length");
  if (length > (1u << 24)) throw ParseError("checkpoint header too large");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) throw ParseError("checkpoint truncated in header");
  CheckpointInfo info;
  try {
    info.header = nlohmann::json::parse(text);
    info.dims = dims_from(info.header.at("dims"));
    const auto precision = info.header.at("precision").get<std::string>();
    if (precision == "f32") {
      info.precision = Precision::kFloat32;
    } else if (precision == "f64") {
      info.precision = Precision::kFloat64;
    } else {
      throw ParseError("unknown checkpoint precision '" + precision + "'");
    }
    info.seed = info.header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint header: ") + e.what());
  }
  return info;
}

template <typename Stored, typename Real>
void read_payload(std::istream& in, std::span<Real> out) {
  std::vector<Stored> raw(out.size());
  const auto bytes = static_cast<std::streamsize>(raw.size() * sizeof(Stored));
  if (!in.read(reinterpret_cast<char*>(raw.data()), bytes)) throw ParseError("checkpoint truncated in parameters");
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<Real>(raw[i]);
}

}  // namespace

template <typename Real>
void save_checkpoint(const std::filesystem::path& path, const Model<Real>& model, std::uint64_t seed,
                     const nlohmann::json& config) {
  const auto& d = model.dims();
  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t t = 0; t < kTensorCount; ++t) {
    const auto& s = model.layout().slot(static_cast<Tensor>(t));
    tensors.push_back({{"name", tensor_name(static_cast<Tensor>(t))}, {"offset", s.offset}, {"rows", s.rows}, {"cols", s.cols}});
  }
  const nlohmann::json header = {
      {"dims",
       {{"input", d.input},
        {"hidden", d.hidden},
        {"latent", d.latent},
        {"projection", d.projection},
        {"domains", d.domains},
        {"classes", d.classes}}},
      {"precision", std::is_same_v<Real, float> ? "f32" : "f64"},
      {"seed", seed},
      {"config", config},
      {"tensors", tensors},
      {"parameter_count", model.params().size()},
  };
  const std::string text = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(kMagic, 8);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto params = model.params();
  out.write(reinterpret_cast<const char*>(params.data()), static_cast<std::streamsize>(params.size() * sizeof(Real)));
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return read_header(in);
}

template <typename Real>
Model<Real> load_checkpoint(const std::filesystem::path& path, CheckpointInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  CheckpointInfo header = read_header(in);
  Model<Real> model(header.dims);
  if (header.precision == Precision::kFloat32) {
    read_payload<float>(in, model.params());
  } else {
    read_payload<double>(in, model.params());
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after checkpoint parameters");
  if (info != nullptr) *info = std::move(header);
  return model;
}

template void save_checkpoint(const std::filesystem::path&, const Model<float>&, std::uint64_t, const nlohmann::json&);
template void save_checkpoint(const std::filesystem::path&, const Model<double>&, std::uint64_t, const nlohmann::json&);
template Model<float> load_checkpoint(const std::filesystem::path&, CheckpointInfo*);
template Model<double> load_checkpoint(const std::filesystem::path&, CheckpointInfo*);

}  // namespace mgdil::dil
