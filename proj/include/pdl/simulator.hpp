#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pdl/rng.hpp"

namespace pdl::sim {

enum class PriMode { Constant, DwellSwitch, Staggered };

const char* to_string(PriMode mode);
PriMode pri_mode_from_string(const std::string& s);

/// One radar emitter: PRI modulation mode plus its mode parameters.
/// Time values are dimensionless units (nominally microseconds).
struct EmitterSpec {
  PriMode mode = PriMode::Constant;
  double constant_pri = 0.0;        // Constant
  std::vector<double> group_pris;   // DwellSwitch: K group values
  int pulses_per_group = 0;         // DwellSwitch: J
  std::vector<double> stagger_pris; // Staggered: M values
  int class_label = 0;

  double min_pri() const;
  double max_pri() const;
  double mean_pri() const;
  // Length of one modulation period in pulses (1 / J*K / M).
  int period_pulses() const;
};

struct Pulse {
  double toa = 0.0;
  int label = 0;
};

/// Time-sorted pulse sequence. Ties sort lower label first.
struct PulseStream {
  std::vector<Pulse> pulses;

  std::size_t size() const { return pulses.size(); }
  bool empty() const { return pulses.empty(); }
  bool is_sorted() const;
  std::vector<double> toas() const;
  std::vector<int> labels() const;
};

struct NoiseSpec {
  double rho_l = 0.0;        // per-emitter pulse loss rate, in [0,1)
  double rho_n = 0.0;        // noise-to-average-target-count ratio, >= 0
  double jitter_sigma = 0.1; // TOA measurement-noise standard deviation
};

// PRI sequence generators, one per modulation mode.
std::vector<double> gen_constant_pri(const EmitterSpec& spec, std::size_t n);
std::vector<double> gen_dwell_switch(const EmitterSpec& spec, std::size_t n);
std::vector<double> gen_staggered(const EmitterSpec& spec, std::size_t n);
std::vector<double> gen_pri_sequence(const EmitterSpec& spec, std::size_t n);

/// Cumulative sum: n PRIs produce n+1 TOAs starting at t0.
std::vector<double> pri_to_toa(const std::vector<double>& pris, double t0);

/// Adds independent Gaussian(0, sigma^2) to each TOA and re-sorts ascending.
std::vector<double> apply_jitter(const std::vector<double>& toas, double sigma, Rng& rng);

/// Keeps each pulse independently with probability 1 - rho_l.
PulseStream apply_pulse_loss(const PulseStream& stream, double rho_l, Rng& rng);

/// Merges sorted streams into one sorted stream; ties keep lower label first,
/// then input order.
PulseStream interleave(const std::vector<PulseStream>& streams);

/// Adds round(rho_n * target_count / n_targets) noise pulses drawn uniformly
/// over (t_start, t_end), labeled noise_label.
PulseStream inject_noise(const PulseStream& stream, double rho_n, int n_targets,
                         double t_start, double t_end, int noise_label, Rng& rng);

struct Encoded {
  std::vector<double> dtoa;
  std::vector<int> labels;
};

/// DTOA with a prepended 0 so input and label lengths match.
Encoded compute_dtoa(const PulseStream& stream);

/// Deterministic clean pulse train of one emitter on [t0, t_end].
PulseStream emit_stream(const EmitterSpec& spec, double t0, double t_end);

}  // namespace pdl::sim
