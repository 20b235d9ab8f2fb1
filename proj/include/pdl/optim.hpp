#pragma once

#include <vector>

#include "pdl/nn.hpp"

namespace pdl::nn {

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long t = 0;
};

AdamState make_adam_state(const ParamStore& params);

/// Bias-corrected first/second-moment update, applied in place to
/// params.value from params.grad.
void adam_step(ParamStore& params, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

}  // namespace pdl::nn
