#pragma once

#include <functional>
#include <string>

#include "pdl/nn.hpp"
#include "pdl/tensor.hpp"

namespace pdl::ag {

/// Builds a scalar loss node from a tape plus one leaf per parameter
/// (store order).
using LossBuilder = std::function<int(Tape&, const std::vector<int>&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst; // "param[index]"
};

/// Central-difference check of every parameter coordinate (or a random
/// subsample of max_coords per parameter when set). Relative error is
/// |analytic - numeric| / max(1, |numeric|).
GradCheckResult grad_check(nn::ParamStore& params, const LossBuilder& build,
                           double eps = 1e-5, std::size_t max_coords = 0,
                           Rng* rng = nullptr);

}  // namespace pdl::ag
