#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdl/simulator.hpp"

namespace pdl::data {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
};

enum class Semantic { ModMode, PriRange, ModModePlusRange, Noise };

/// Recipe for drawing one emitter of a class.
struct EmitterDraw {
  sim::PriMode mode = sim::PriMode::Constant;
  Range pri{20.0, 100.0};
  int stagger_m = 0;       // staggered: fixed period length; 0 = sample from m_range
  IntRange m_range{3, 10}; // staggered
  IntRange j_range{4, 6};  // dwell & switch: pulses per group
  IntRange k_range{4, 6};  // dwell & switch: groups per period
};

/// One semantic category: the emitters drawn for it per sample.
/// The noise category has no emitters.
struct ClassDef {
  Semantic semantic = Semantic::Noise;
  std::vector<EmitterDraw> emitters;

  int targets() const { return static_cast<int>(emitters.size()); }
};

struct ExperimentConfig {
  int id = 0;
  std::vector<ClassDef> classes; // class ids dense from 0; noise last
  Range rho_l{0.0, 0.25};
  Range rho_n{0.0, 0.25};
  int seq_len = 1000;
  double jitter_sigma = 0.1;

  int num_classes() const { return static_cast<int>(classes.size()); }
  int noise_class() const;
  int num_targets() const; // D
};

/// Experiment presets 1..5.
ExperimentConfig builtin_config(int experiment_id);

struct EmitterMeta {
  int class_label = 0;
  sim::EmitterSpec spec;
  double t0 = 0.0;
};

struct SampleMeta {
  int experiment = 0;
  std::uint64_t seed = 0;
  double rho_l = 0.0;
  double rho_n = 0.0;
  std::vector<EmitterMeta> emitters;

  bool operator==(const SampleMeta&) const;
};

/// One training/evaluation unit: DTOA vector plus per-pulse class labels.
struct Sample {
  std::vector<double> dtoa;
  std::vector<int> labels;
  SampleMeta meta;

  bool operator==(const Sample&) const;
};

/// Extra per-draw information kept out of the serialized format.
struct DrawDetail {
  Sample sample;
  std::vector<int> emitter_of_pulse;             // index into meta.emitters, -1 = noise
  std::vector<sim::PulseStream> clean_streams;   // per emitter, pre-jitter/pre-loss
};

Sample draw_sample(const ExperimentConfig& config, std::uint64_t seed);
DrawDetail draw_sample_detailed(const ExperimentConfig& config, std::uint64_t seed);

/// One sample per line; ".gz" paths are gzip-compressed.
void write_jsonl(const std::vector<Sample>& samples, const std::string& path);
std::vector<Sample> read_jsonl(const std::string& path);

}  // namespace pdl::data
