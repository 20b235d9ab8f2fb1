#pragma once

#include <cstdint>
#include <string>

#include "pdl/nn.hpp"

namespace pdl::nn {

struct CheckpointMeta {
  int experiment = 0;
  std::string preset = "desk";
  std::uint64_t seed = 0;
  int epochs = 0;
  double final_loss = 0.0;
};

/// File layout: 8-byte magic "PDLCKPT1", little-endian u32 header length,
/// JSON header (spec, meta, parameter table), then the parameter values as
/// little-endian 64-bit floats in table order.
void save_checkpoint(const std::string& path, const Model& model,
                     const CheckpointMeta& meta);
Model load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

}  // namespace pdl::nn
