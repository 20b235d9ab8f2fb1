#include "pdl/dataset.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pdl::data {

int ExperimentConfig::noise_class() const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i].semantic == Semantic::Noise) return static_cast<int>(i);
  throw std::logic_error("ExperimentConfig: no noise class");
}

int ExperimentConfig::num_targets() const {
  int d = 0;
  for (const auto& c : classes) d += c.targets();
  return d;
}

bool SampleMeta::operator==(const SampleMeta& o) const {
  if (experiment != o.experiment || seed != o.seed || rho_l != o.rho_l ||
      rho_n != o.rho_n || emitters.size() != o.emitters.size())
    return false;
  for (std::size_t i = 0; i < emitters.size(); ++i) {
    const auto& a = emitters[i];
    const auto& b = o.emitters[i];
    if (a.class_label != b.class_label || a.t0 != b.t0 ||
        a.spec.mode != b.spec.mode || a.spec.constant_pri != b.spec.constant_pri ||
        a.spec.group_pris != b.spec.group_pris ||
        a.spec.pulses_per_group != b.spec.pulses_per_group ||
        a.spec.stagger_pris != b.spec.stagger_pris ||
        a.spec.class_label != b.spec.class_label)
      return false;
  }
  return true;
}

bool Sample::operator==(const Sample& o) const {
  return dtoa == o.dtoa && labels == o.labels && meta == o.meta;
}

ExperimentConfig builtin_config(int experiment_id) {
  ExperimentConfig cfg;
  cfg.id = experiment_id;
  auto constant = [](double lo, double hi) {
    EmitterDraw d;
    d.mode = sim::PriMode::Constant;
    d.pri = {lo, hi};
    return d;
  };
  auto staggered = [](double lo, double hi, int m) {
    EmitterDraw d;
    d.mode = sim::PriMode::Staggered;
    d.pri = {lo, hi};
    d.stagger_m = m;
    return d;
  };
  auto dwell = [](double lo, double hi) {
    EmitterDraw d;
    d.mode = sim::PriMode::DwellSwitch;
    d.pri = {lo, hi};
    return d;
  };
  switch (experiment_id) {
    case 1:
      // One target per modulation mode, plus noise.
      cfg.classes = {
          {Semantic::ModMode, {constant(20, 100)}},
          {Semantic::ModMode, {dwell(20, 100)}},
          {Semantic::ModMode, {staggered(20, 100, 0)}},
          {Semantic::Noise, {}},
      };
      cfg.rho_l = {0.0, 0.25};
      cfg.rho_n = {0.0, 0.25};
      break;
    case 2:
      // Constant PRI split into four value ranges.
      cfg.classes = {
          {Semantic::PriRange, {constant(20, 40)}},
          {Semantic::PriRange, {constant(40, 60)}},
          {Semantic::PriRange, {constant(60, 80)}},
          {Semantic::PriRange, {constant(80, 100)}},
          {Semantic::Noise, {}},
      };
      cfg.rho_l = {0.0, 0.5};
      cfg.rho_n = {0.0, 0.5};
      break;
    case 3:
      // Staggered PRI (7 pulses per period) split into three value ranges.
      cfg.classes = {
          {Semantic::PriRange, {staggered(20, 40, 7)}},
          {Semantic::PriRange, {staggered(40, 70, 7)}},
          {Semantic::PriRange, {staggered(70, 100, 7)}},
          {Semantic::Noise, {}},
      };
      cfg.rho_l = {0.0, 0.5};
      cfg.rho_n = {0.0, 0.5};
      break;
    case 4:
      // Modulation mode and value range used jointly.
      cfg.classes = {
          {Semantic::ModModePlusRange, {constant(20, 60)}},
          {Semantic::ModModePlusRange, {constant(60, 100)}},
          {Semantic::ModModePlusRange, {staggered(20, 100, 0)}},
          {Semantic::Noise, {}},
      };
      cfg.rho_l = {0.0, 0.5};
      cfg.rho_n = {0.0, 0.5};
      break;
    case 5:
      // Two targets per modulation-mode class.
      cfg.classes = {
          {Semantic::ModMode, {constant(20, 60), constant(60, 100)}},
          {Semantic::ModMode, {staggered(20, 60, 7), staggered(60, 100, 7)}},
          {Semantic::Noise, {}},
      };
      cfg.rho_l = {0.0, 0.25};
      cfg.rho_n = {0.0, 0.25};
      break;
    default:
      throw std::invalid_argument("builtin_config: experiment id must be 1..5, got " +
                                  std::to_string(experiment_id));
  }
  return cfg;
}

namespace {

sim::EmitterSpec draw_emitter(const EmitterDraw& d, int class_label, Rng& rng) {
  sim::EmitterSpec spec;
  spec.mode = d.mode;
  spec.class_label = class_label;
  std::uniform_real_distribution<double> pri(d.pri.lo, d.pri.hi);
  switch (d.mode) {
    case sim::PriMode::Constant:
      spec.constant_pri = pri(rng);
      break;
    case sim::PriMode::DwellSwitch: {
      std::uniform_int_distribution<int> jd(d.j_range.lo, d.j_range.hi);
      std::uniform_int_distribution<int> kd(d.k_range.lo, d.k_range.hi);
      spec.pulses_per_group = jd(rng);
      const int k = kd(rng);
      spec.group_pris.resize(k);
      for (double& v : spec.group_pris) v = pri(rng);
      break;
    }
    case sim::PriMode::Staggered: {
      int m = d.stagger_m;
      if (m == 0) {
        std::uniform_int_distribution<int> md(d.m_range.lo, d.m_range.hi);
        m = md(rng);
      }
      spec.stagger_pris.resize(m);
      for (double& v : spec.stagger_pris) v = pri(rng);
      break;
    }
  }
  return spec;
}

}  // namespace

DrawDetail draw_sample_detailed(const ExperimentConfig& config, std::uint64_t seed) {
  if (config.seq_len < 2)
    throw std::invalid_argument("draw_sample: seq_len must be >= 2");
  const int d_targets = config.num_targets();
  if (d_targets == 0)
    throw std::invalid_argument("draw_sample: config has no target emitters; cannot produce " +
                                std::to_string(config.seq_len) + " pulses");
  const int noise = config.noise_class();

  // Phase 1: per-sample draws (emitter parameters, loss and noise rates).
  Rng rng = make_rng(seed, 0);
  std::vector<EmitterMeta> emitters;
  for (std::size_t c = 0; c < config.classes.size(); ++c)
    for (const auto& dr : config.classes[c].emitters)
      emitters.push_back({static_cast<int>(c),
                          draw_emitter(dr, static_cast<int>(c), rng), 0.0});
  std::uniform_real_distribution<double> rl(config.rho_l.lo, config.rho_l.hi);
  std::uniform_real_distribution<double> rn(config.rho_n.lo, config.rho_n.hi);
  const double rho_l = config.rho_l.lo == config.rho_l.hi ? config.rho_l.lo : rl(rng);
  const double rho_n = config.rho_n.lo == config.rho_n.hi ? config.rho_n.lo : rn(rng);

  double rate = 0.0;
  for (const auto& e : emitters) rate += (1.0 - rho_l) / e.spec.mean_pri();
  const double total_rate = rate * (1.0 + rho_n / d_targets);

  // Phase 2: stream realization; regenerated with a longer horizon if the
  // merged stream comes up short.
  const int max_attempts = 8;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Rng rng2 = make_rng(seed, 1 + static_cast<std::uint64_t>(attempt));
    const double margin = 1.2 * std::pow(1.5, attempt);
    const double horizon = margin * config.seq_len / total_rate;

    // Internally pulses are labeled by emitter index so that two emitters of
    // one class stay distinguishable; noise gets the largest index and so
    // sorts last at TOA ties, matching the class-label tie rule.
    const int noise_internal = static_cast<int>(emitters.size());
    std::vector<sim::PulseStream> clean(emitters.size());
    std::vector<sim::PulseStream> lossy(emitters.size());
    for (std::size_t e = 0; e < emitters.size(); ++e) {
      std::uniform_real_distribution<double> phase(0.0, emitters[e].spec.max_pri());
      emitters[e].t0 = phase(rng2);
      clean[e] = sim::emit_stream(emitters[e].spec, emitters[e].t0, horizon);
      std::vector<double> toas =
          sim::apply_jitter(clean[e].toas(), config.jitter_sigma, rng2);
      sim::PulseStream jt;
      jt.pulses.reserve(toas.size());
      for (double t : toas) jt.pulses.push_back({t, static_cast<int>(e)});
      lossy[e] = sim::apply_pulse_loss(jt, rho_l, rng2);
    }
    sim::PulseStream merged = sim::interleave(lossy);
    merged = sim::inject_noise(merged, rho_n, d_targets, 0.0, horizon,
                               noise_internal, rng2);
    if (merged.size() < static_cast<std::size_t>(config.seq_len)) continue;
    merged.pulses.resize(config.seq_len);

    DrawDetail detail;
    detail.clean_streams = std::move(clean);
    for (auto& cs : detail.clean_streams)
      for (auto& p : cs.pulses) p.label = emitters[p.label].class_label;
    detail.emitter_of_pulse.resize(config.seq_len);
    sim::PulseStream relabeled = merged;
    for (int i = 0; i < config.seq_len; ++i) {
      const int e = merged.pulses[i].label;
      detail.emitter_of_pulse[i] = e == noise_internal ? -1 : e;
      relabeled.pulses[i].label =
          e == noise_internal ? noise : emitters[e].class_label;
    }
    sim::Encoded enc = sim::compute_dtoa(relabeled);
    detail.sample.dtoa = std::move(enc.dtoa);
    detail.sample.labels = std::move(enc.labels);
    detail.sample.meta = {config.id, seed, rho_l, rho_n, emitters};
    return detail;
  }
  throw std::runtime_error("draw_sample: could not produce " +
                           std::to_string(config.seq_len) +
                           " pulses for experiment " + std::to_string(config.id));
}

Sample draw_sample(const ExperimentConfig& config, std::uint64_t seed) {
  return draw_sample_detailed(config, seed).sample;
}

// ---------------------------------------------------------------------------
// JSONL serialization. Written by hand so reals render with 17 significant
// digits (lossless for 64-bit floats) and reruns are byte-identical.

namespace {

void append_real(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_emitter(std::string& out, const EmitterMeta& e) {
  out += "{\"class\":";
  out += std::to_string(e.class_label);
  out += ",\"mode\":\"";
  out += sim::to_string(e.spec.mode);
  out += "\",\"pris\":[";
  const std::vector<double>* pris = nullptr;
  std::vector<double> one;
  switch (e.spec.mode) {
    case sim::PriMode::Constant:
      one.push_back(e.spec.constant_pri);
      pris = &one;
      break;
    case sim::PriMode::DwellSwitch: pris = &e.spec.group_pris; break;
    case sim::PriMode::Staggered: pris = &e.spec.stagger_pris; break;
  }
  for (std::size_t i = 0; i < pris->size(); ++i) {
    if (i) out += ',';
    append_real(out, (*pris)[i]);
  }
  out += "],\"group_len\":";
  out += std::to_string(e.spec.pulses_per_group);
  out += ",\"t0\":";
  append_real(out, e.t0);
  out += '}';
}

std::string sample_to_line(const Sample& s) {
  std::string out;
  out.reserve(s.dtoa.size() * 20 + 256);
  out += "{\"dtoa\":[";
  for (std::size_t i = 0; i < s.dtoa.size(); ++i) {
    if (i) out += ',';
    append_real(out, s.dtoa[i]);
  }
  out += "],\"labels\":[";
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s.labels[i]);
  }
  out += "],\"meta\":{\"experiment\":";
  out += std::to_string(s.meta.experiment);
  out += ",\"seed\":";
  out += std::to_string(s.meta.seed);
  out += ",\"rho_l\":";
  append_real(out, s.meta.rho_l);
  out += ",\"rho_n\":";
  append_real(out, s.meta.rho_n);
  out += ",\"emitters\":[";
  for (std::size_t i = 0; i < s.meta.emitters.size(); ++i) {
    if (i) out += ',';
    append_emitter(out, s.meta.emitters[i]);
  }
  out += "]}}";
  return out;
}

bool has_gz_suffix(const std::string& path) {
  return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

Sample sample_from_json(const nlohmann::json& j, std::size_t line_no) {
  auto fail = [line_no](const std::string& field) -> std::runtime_error {
    return std::runtime_error("line " + std::to_string(line_no) +
                              ": missing or malformed field \"" + field + "\"");
  };
  Sample s;
  try {
    s.dtoa = j.at("dtoa").get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw fail("dtoa");
  }
  try {
    s.labels = j.at("labels").get<std::vector<int>>();
  } catch (const nlohmann::json::exception&) {
    throw fail("labels");
  }
  try {
    const auto& m = j.at("meta");
    s.meta.experiment = m.at("experiment").get<int>();
    s.meta.seed = m.at("seed").get<std::uint64_t>();
    s.meta.rho_l = m.at("rho_l").get<double>();
    s.meta.rho_n = m.at("rho_n").get<double>();
    for (const auto& je : m.at("emitters")) {
      EmitterMeta e;
      e.class_label = je.at("class").get<int>();
      e.t0 = je.at("t0").get<double>();
      e.spec.class_label = e.class_label;
      e.spec.mode = sim::pri_mode_from_string(je.at("mode").get<std::string>());
      auto pris = je.at("pris").get<std::vector<double>>();
      e.spec.pulses_per_group = je.at("group_len").get<int>();
      switch (e.spec.mode) {
        case sim::PriMode::Constant:
          if (pris.size() != 1) throw fail("pris");
          e.spec.constant_pri = pris[0];
          break;
        case sim::PriMode::DwellSwitch: e.spec.group_pris = std::move(pris); break;
        case sim::PriMode::Staggered: e.spec.stagger_pris = std::move(pris); break;
      }
      s.meta.emitters.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception&) {
    throw fail("meta");
  }
  return s;
}

}  // namespace

void write_jsonl(const std::vector<Sample>& samples, const std::string& path) {
  if (has_gz_suffix(path)) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("write_jsonl: cannot open " + path);
    for (const auto& s : samples) {
      std::string line = sample_to_line(s);
      line += '\n';
      if (gzwrite(f, line.data(), static_cast<unsigned>(line.size())) == 0) {
        gzclose(f);
        throw std::runtime_error("write_jsonl: write failed on " + path);
      }
    }
    gzclose(f);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_jsonl: cannot open " + path);
  for (const auto& s : samples) f << sample_to_line(s) << '\n';
  if (!f) throw std::runtime_error("write_jsonl: write failed on " + path);
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  if (has_gz_suffix(path)) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("read_jsonl: cannot open " + path);
    std::string current;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) {
      for (int i = 0; i < n; ++i) {
        if (buf[i] == '\n') {
          lines.push_back(std::move(current));
          current.clear();
        } else {
          current += buf[i];
        }
      }
    }
    gzclose(f);
    if (!current.empty()) lines.push_back(std::move(current));
    return lines;
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_jsonl: cannot open " + path);
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

}  // namespace

std::vector<Sample> read_jsonl(const std::string& path) {
  std::vector<Sample> samples;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(
          "read_jsonl: malformed JSON at line " + std::to_string(i + 1) +
          " (last complete sample: line " + std::to_string(i) + "): " + e.what());
    }
    samples.push_back(sample_from_json(j, i + 1));
  }
  return samples;
}

}  // namespace pdl::data
