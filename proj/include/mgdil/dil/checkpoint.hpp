#pragma once

// Binary checkpoint container:
//   "MGDILCKP" | u32 version | u64 header bytes | JSON header | raw parameters
// The header records dims, precision, seed, train config and the tensor
// table; parameters follow in the flat layout order, host byte order
// (little-endian on every supported target).

#include <cstdint>
#include <filesystem>

#include "json.hpp"
#include "mgdil/dil/model.hpp"
#include "mgdil/dil/trainer.hpp"

namespace mgdil::dil {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointInfo {
  ModelDims dims;
  Precision precision = Precision::kFloat32;
  std::uint64_t seed = 0;
  nlohmann::json header;
};

template <typename Real>
void save_checkpoint(const std::filesystem::path& path, const Model<Real>& model, std::uint64_t seed,
                     const nlohmann::json& config);

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);

// Loads parameters, converting from the stored precision when it differs.
// Throws ParseError on a bad magic, version, header or truncated payload.
template <typename Real>
Model<Real> load_checkpoint(const std::filesystem::path& path, CheckpointInfo* info = nullptr);

}  // namespace mgdil::dil
