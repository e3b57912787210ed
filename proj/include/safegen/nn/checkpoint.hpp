#pragma once

// Checkpoint file layout (all little-endian):
//   8 bytes   magic "SGMLP001"
//   4 x int32 input_dim, output_dim, width, depth
//   int64     parameter count
//   float64[] parameters in MlpModel order (weights row-major)
// A JSON sidecar next to it (<path>.json) carries config and history; its
// content is produced by the caller.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "safegen/nn/mlp.hpp"

namespace safegen::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

inline constexpr char kCheckpointMagic[8] = {'S', 'G', 'M', 'L', 'P', '0', '0', '1'};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void save_checkpoint(const std::string& path, const MlpModel& model, const std::string& sidecar_json = "") {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path);
  out.write(kCheckpointMagic, 8);
  const MlpShape& s = model.shape();
  const std::int32_t dims[4] = {s.input_dim, s.output_dim, s.width, s.depth};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  const std::int64_t count = model.num_params();
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(model.params().data()), static_cast<std::streamsize>(count * 8));
  if (!out) throw CheckpointError("write failed: " + path);
  if (!sidecar_json.empty()) {
    std::ofstream side(path + ".json", std::ios::trunc);
    side << sidecar_json << '\n';
    if (!side) throw CheckpointError("write failed: " + path + ".json");
  }
}

inline MlpModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  char magic[8];
  std::int32_t dims[4];
  std::int64_t count = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0) throw CheckpointError("not a checkpoint: " + path);
  MlpModel model(MlpShape{dims[0], dims[1], dims[2], dims[3]});
  if (count != model.num_params()) throw CheckpointError("parameter count does not match shape: " + path);
  in.read(reinterpret_cast<char*>(model.params().data()), static_cast<std::streamsize>(count * 8));
  if (!in) throw CheckpointError("truncated checkpoint: " + path);
  return model;
}

}  // namespace safegen::nn
