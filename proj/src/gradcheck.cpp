#include "pdl/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace pdl::ag {

namespace {

double forward_value(nn::ParamStore& params, const LossBuilder& build) {
  Tape tape;
  const std::vector<int> leaves = nn::make_param_leaves(tape, params, false);
  const int loss = build(tape, leaves);
  return tape.at(loss).value[0];
}

}  // namespace

GradCheckResult grad_check(nn::ParamStore& params, const LossBuilder& build,
                           double eps, std::size_t max_coords, Rng* rng) {
  // Analytic pass.
  Tape tape;
  const std::vector<int> leaves = nn::make_param_leaves(tape, params, true);
  const int loss = build(tape, leaves);
  tape.backward(loss);

  GradCheckResult result;
  for (int pi = 0; pi < params.size(); ++pi) {
    nn::Param& p = params.at(pi);
    const auto& leaf_grad = tape.at(leaves[static_cast<std::size_t>(pi)]).grad;

    std::vector<std::size_t> coords(p.value.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (max_coords > 0 && coords.size() > max_coords && rng) {
      std::shuffle(coords.begin(), coords.end(), *rng);
      coords.resize(max_coords);
    }

    for (std::size_t ci : coords) {
      const double saved = p.value[ci];
      p.value[ci] = saved + eps;
      const double up = forward_value(params, build);
      p.value[ci] = saved - eps;
      const double down = forward_value(params, build);
      p.value[ci] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = leaf_grad.empty() ? 0.0 : leaf_grad[ci];
      const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst = p.name + "[" + std::to_string(ci) + "]";
      }
    }
  }
  return result;
}

}  // namespace pdl::ag
