#include "pdl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pdl::sim {

const char* to_string(PriMode mode) {
  switch (mode) {
    case PriMode::Constant: return "constant";
    case PriMode::DwellSwitch: return "dwell_switch";
    case PriMode::Staggered: return "staggered";
  }
  return "?";
}

PriMode pri_mode_from_string(const std::string& s) {
  if (s == "constant") return PriMode::Constant;
  if (s == "dwell_switch") return PriMode::DwellSwitch;
  if (s == "staggered") return PriMode::Staggered;
  throw std::invalid_argument("unknown PRI mode: " + s);
}

double EmitterSpec::min_pri() const {
  switch (mode) {
    case PriMode::Constant: return constant_pri;
    case PriMode::DwellSwitch:
      return *std::min_element(group_pris.begin(), group_pris.end());
    case PriMode::Staggered:
      return *std::min_element(stagger_pris.begin(), stagger_pris.end());
  }
  return 0.0;
}

double EmitterSpec::max_pri() const {
  switch (mode) {
    case PriMode::Constant: return constant_pri;
    case PriMode::DwellSwitch:
      return *std::max_element(group_pris.begin(), group_pris.end());
    case PriMode::Staggered:
      return *std::max_element(stagger_pris.begin(), stagger_pris.end());
  }
  return 0.0;
}

double EmitterSpec::mean_pri() const {
  switch (mode) {
    case PriMode::Constant: return constant_pri;
    case PriMode::DwellSwitch:
      return std::accumulate(group_pris.begin(), group_pris.end(), 0.0) /
             static_cast<double>(group_pris.size());
    case PriMode::Staggered:
      return std::accumulate(stagger_pris.begin(), stagger_pris.end(), 0.0) /
             static_cast<double>(stagger_pris.size());
  }
  return 0.0;
}

int EmitterSpec::period_pulses() const {
  switch (mode) {
    case PriMode::Constant: return 1;
    case PriMode::DwellSwitch:
      return pulses_per_group * static_cast<int>(group_pris.size());
    case PriMode::Staggered: return static_cast<int>(stagger_pris.size());
  }
  return 1;
}

bool PulseStream::is_sorted() const {
  return std::is_sorted(pulses.begin(), pulses.end(),
                        [](const Pulse& a, const Pulse& b) { return a.toa < b.toa; });
}

std::vector<double> PulseStream::toas() const {
  std::vector<double> out(pulses.size());
  for (std::size_t i = 0; i < pulses.size(); ++i) out[i] = pulses[i].toa;
  return out;
}

std::vector<int> PulseStream::labels() const {
  std::vector<int> out(pulses.size());
  for (std::size_t i = 0; i < pulses.size(); ++i) out[i] = pulses[i].label;
  return out;
}

std::vector<double> gen_constant_pri(const EmitterSpec& spec, std::size_t n) {
  if (spec.mode != PriMode::Constant)
    throw std::invalid_argument("gen_constant_pri: emitter mode is not constant");
  if (n == 0) throw std::invalid_argument("gen_constant_pri: n must be >= 1");
  return std::vector<double>(n, spec.constant_pri);
}

std::vector<double> gen_dwell_switch(const EmitterSpec& spec, std::size_t n) {
  if (spec.mode != PriMode::DwellSwitch)
    throw std::invalid_argument("gen_dwell_switch: emitter mode is not dwell_switch");
  if (spec.group_pris.empty())
    throw std::invalid_argument("gen_dwell_switch: empty group_pris");
  if (spec.pulses_per_group < 1)
    throw std::invalid_argument("gen_dwell_switch: pulses_per_group must be >= 1");
  if (n == 0) throw std::invalid_argument("gen_dwell_switch: n must be >= 1");
  const std::size_t k = spec.group_pris.size();
  const std::size_t j = static_cast<std::size_t>(spec.pulses_per_group);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = spec.group_pris[(i / j) % k];
  return out;
}

std::vector<double> gen_staggered(const EmitterSpec& spec, std::size_t n) {
  if (spec.mode != PriMode::Staggered)
    throw std::invalid_argument("gen_staggered: emitter mode is not staggered");
  if (spec.stagger_pris.empty())
    throw std::invalid_argument("gen_staggered: empty stagger_pris");
  if (n == 0) throw std::invalid_argument("gen_staggered: n must be >= 1");
  const std::size_t m = spec.stagger_pris.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = spec.stagger_pris[i % m];
  return out;
}

std::vector<double> gen_pri_sequence(const EmitterSpec& spec, std::size_t n) {
  switch (spec.mode) {
    case PriMode::Constant: return gen_constant_pri(spec, n);
    case PriMode::DwellSwitch: return gen_dwell_switch(spec, n);
    case PriMode::Staggered: return gen_staggered(spec, n);
  }
  throw std::invalid_argument("gen_pri_sequence: bad mode");
}

std::vector<double> pri_to_toa(const std::vector<double>& pris, double t0) {
  std::vector<double> out;
  out.reserve(pris.size() + 1);
  out.push_back(t0);
  double t = t0;
  for (double p : pris) {
    if (!(p > 0.0)) throw std::invalid_argument("pri_to_toa: nonpositive PRI");
    t += p;
    out.push_back(t);
  }
  return out;
}

std::vector<double> apply_jitter(const std::vector<double>& toas, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("apply_jitter: negative sigma");
  std::vector<double> out = toas;
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& t : out) t += noise(rng);
    std::sort(out.begin(), out.end());
  }
  return out;
}

PulseStream apply_pulse_loss(const PulseStream& stream, double rho_l, Rng& rng) {
  if (rho_l < 0.0 || rho_l >= 1.0)
    throw std::invalid_argument("apply_pulse_loss: rho_l must be in [0,1)");
  PulseStream out;
  out.pulses.reserve(stream.pulses.size());
  if (rho_l == 0.0) {
    out.pulses = stream.pulses;
    return out;
  }
  std::bernoulli_distribution keep(1.0 - rho_l);
  for (const Pulse& p : stream.pulses)
    if (keep(rng)) out.pulses.push_back(p);
  return out;
}

namespace {
bool pulse_before(const Pulse& a, const Pulse& b) {
  if (a.toa != b.toa) return a.toa < b.toa;
  return a.label < b.label;
}
}  // namespace

PulseStream interleave(const std::vector<PulseStream>& streams) {
  PulseStream out;
  std::size_t total = 0;
  for (const auto& s : streams) total += s.size();
  out.pulses.reserve(total);
  for (const auto& s : streams)
    out.pulses.insert(out.pulses.end(), s.pulses.begin(), s.pulses.end());
  std::stable_sort(out.pulses.begin(), out.pulses.end(), pulse_before);
  return out;
}

PulseStream inject_noise(const PulseStream& stream, double rho_n, int n_targets,
                         double t_start, double t_end, int noise_label, Rng& rng) {
  if (rho_n < 0.0) throw std::invalid_argument("inject_noise: rho_n must be >= 0");
  if (!(t_end > t_start)) throw std::invalid_argument("inject_noise: invalid window");
  if (n_targets < 1) throw std::invalid_argument("inject_noise: n_targets must be >= 1");
  const double per_target = static_cast<double>(stream.size()) / n_targets;
  const long count = std::lround(rho_n * per_target);
  PulseStream out = stream;
  if (count == 0) return out;
  std::uniform_real_distribution<double> where(t_start, t_end);
  out.pulses.reserve(out.pulses.size() + static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i)
    out.pulses.push_back(Pulse{where(rng), noise_label});
  std::stable_sort(out.pulses.begin(), out.pulses.end(), pulse_before);
  return out;
}

Encoded compute_dtoa(const PulseStream& stream) {
  if (stream.empty()) throw std::invalid_argument("compute_dtoa: empty stream");
  Encoded enc;
  enc.dtoa.resize(stream.size());
  enc.labels.resize(stream.size());
  enc.dtoa[0] = 0.0;
  enc.labels[0] = stream.pulses[0].label;
  for (std::size_t i = 1; i < stream.size(); ++i) {
    enc.dtoa[i] = stream.pulses[i].toa - stream.pulses[i - 1].toa;
    enc.labels[i] = stream.pulses[i].label;
  }
  return enc;
}

PulseStream emit_stream(const EmitterSpec& spec, double t0, double t_end) {
  PulseStream out;
  if (t0 > t_end) return out;
  // Overshoot by one modulation period, then trim.
  const double span = t_end - t0;
  const std::size_t n =
      static_cast<std::size_t>(span / spec.min_pri()) + spec.period_pulses() + 1;
  std::vector<double> toas = pri_to_toa(gen_pri_sequence(spec, n), t0);
  for (double t : toas) {
    if (t > t_end) break;
    out.pulses.push_back(Pulse{t, spec.class_label});
  }
  return out;
}

}  // namespace pdl::sim
