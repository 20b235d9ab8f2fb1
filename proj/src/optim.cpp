#include "pdl/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace pdl::nn {

AdamState make_adam_state(const ParamStore& params) {
  AdamState s;
  s.m.resize(static_cast<std::size_t>(params.size()));
  s.v.resize(static_cast<std::size_t>(params.size()));
  for (int i = 0; i < params.size(); ++i) {
    s.m[static_cast<std::size_t>(i)].assign(params.at(i).value.size(), 0.0);
    s.v[static_cast<std::size_t>(i)].assign(params.at(i).value.size(), 0.0);
  }
  return s;
}

void adam_step(ParamStore& params, AdamState& state, double lr, double beta1,
               double beta2, double eps) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (int i = 0; i < params.size(); ++i) {
    Param& p = params.at(i);
    auto& m = state.m[static_cast<std::size_t>(i)];
    auto& v = state.v[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      if (!std::isfinite(g))
        throw std::runtime_error("adam_step: nonfinite gradient in parameter " + p.name);
      m[j] = beta1 * m[j] + (1.0 - beta1) * g;
      v[j] = beta2 * v[j] + (1.0 - beta2) * g * g;
      p.value[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps);
    }
  }
}

}  // namespace pdl::nn
