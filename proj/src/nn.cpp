#include "pdl/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace pdl::nn {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::BLSTM: return "blstm";
    case ModelKind::BGRU: return "bgru";
    case ModelKind::DCN: return "dcn";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "blstm") return ModelKind::BLSTM;
  if (s == "bgru") return ModelKind::BGRU;
  if (s == "dcn") return ModelKind::DCN;
  throw std::invalid_argument("unknown model kind: " + s);
}

ModelSpec make_spec(ModelKind kind, const std::string& preset, int num_classes) {
  ModelSpec spec;
  spec.kind = kind;
  spec.num_classes = num_classes;
  if (preset == "desk") {
    spec.hidden = kind == ModelKind::BGRU ? 37 : 32;
    spec.channels = 14;
  } else if (preset == "611k") {
    spec.hidden = kind == ModelKind::BGRU ? 318 : 275;
    spec.channels = 112;
  } else if (preset == "211k") {
    spec.hidden = kind == ModelKind::BGRU ? 186 : 161;
    spec.channels = 66;
  } else {
    throw std::invalid_argument("unknown preset: " + preset);
  }
  return spec;
}

int ParamStore::add(std::string name, ag::Shape shape, std::vector<double> value) {
  if (index_.count(name))
    throw std::invalid_argument("ParamStore: duplicate parameter " + name);
  if (ag::shape_size(shape) != value.size())
    throw std::invalid_argument("ParamStore: value size mismatch for " + name);
  Param p;
  p.name = std::move(name);
  p.shape = std::move(shape);
  p.value = std::move(value);
  p.grad.assign(p.value.size(), 0.0);
  params_.push_back(std::move(p));
  index_[params_.back().name] = size() - 1;
  return size() - 1;
}

Param* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[static_cast<std::size_t>(it->second)];
}

std::size_t ParamStore::total_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& p : params_)
    std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

namespace {

std::vector<double> uniform_init(std::size_t n, int fan_in, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-s, s);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

void add_matrix(ParamStore& store, const std::string& name, int rows, int cols, Rng& rng) {
  store.add(name, {rows, cols},
            uniform_init(static_cast<std::size_t>(rows) * cols, cols, rng));
}

void add_bias(ParamStore& store, const std::string& name, int n) {
  store.add(name, {n}, std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

void add_conv(ParamStore& store, const std::string& name, int cout, int cin, int k,
              Rng& rng) {
  store.add(name, {cout, cin, k},
            uniform_init(static_cast<std::size_t>(cout) * cin * k, cin * k, rng));
}

}  // namespace

void init_params(const ModelSpec& spec, ParamStore& store, Rng& rng) {
  const int h = spec.hidden;
  const int c = spec.num_classes;
  switch (spec.kind) {
    case ModelKind::BLSTM:
      for (const char* dir : {"fwd", "bwd"}) {
        add_matrix(store, std::string(dir) + ".W", 4 * h, 1 + h, rng);
        add_bias(store, std::string(dir) + ".b", 4 * h);
        // Forget-gate rows start open.
        Param* b = store.find(std::string(dir) + ".b");
        for (int i = h; i < 2 * h; ++i) b->value[static_cast<std::size_t>(i)] = 1.0;
      }
      add_matrix(store, "head.W", c, 2 * h, rng);
      add_bias(store, "head.b", c);
      break;
    case ModelKind::BGRU:
      for (const char* dir : {"fwd", "bwd"}) {
        add_matrix(store, std::string(dir) + ".Wzr", 2 * h, 1 + h, rng);
        add_bias(store, std::string(dir) + ".bzr", 2 * h);
        add_matrix(store, std::string(dir) + ".Wc", h, 1 + h, rng);
        add_bias(store, std::string(dir) + ".bc", h);
      }
      add_matrix(store, "head.W", c, 2 * h, rng);
      add_bias(store, "head.b", c);
      break;
    case ModelKind::DCN: {
      const int w = spec.channels;
      const int k = spec.kernel;
      add_conv(store, "lift.W", w, 1, 1, rng);
      add_bias(store, "lift.b", w);
      for (int b = 0; b < spec.residual_blocks; ++b) {
        const std::string pre = "block" + std::to_string(b);
        add_conv(store, pre + ".conv1.W", w, w, k, rng);
        add_bias(store, pre + ".conv1.b", w);
        add_conv(store, pre + ".conv2.W", w, w, k, rng);
        add_bias(store, pre + ".conv2.b", w);
      }
      add_conv(store, "out.W", c, w, 1, rng);
      add_bias(store, "out.b", c);
      break;
    }
  }
}

Model make_model(const ModelSpec& spec, std::uint64_t seed) {
  Model m;
  m.spec = spec;
  Rng rng = make_rng(seed, 0xC0DE);
  init_params(spec, m.params, rng);
  return m;
}

std::size_t param_count(const ModelSpec& spec) {
  ParamStore store;
  Rng rng(0);
  init_params(spec, store, rng);
  return store.total_values();
}

int dcn_receptive_field(const ModelSpec& spec) {
  int field = 1;
  for (int b = 0; b < spec.residual_blocks; ++b)
    field += 2 * (spec.kernel - 1) * (1 << b);
  return field;
}

std::vector<int> make_param_leaves(ag::Tape& tape, const ParamStore& store,
                                   bool requires_grad) {
  std::vector<int> leaves(static_cast<std::size_t>(store.size()));
  for (int i = 0; i < store.size(); ++i)
    leaves[static_cast<std::size_t>(i)] =
        tape.leaf(store.at(i).shape, store.at(i).value, requires_grad);
  return leaves;
}

void accumulate_leaf_grads(const ag::Tape& tape, const std::vector<int>& leaves,
                           ParamStore& store) {
  for (int i = 0; i < store.size(); ++i) {
    const auto& g = tape.at(leaves[static_cast<std::size_t>(i)]).grad;
    if (g.empty()) continue;
    auto& dst = store.at(i).grad;
    for (std::size_t j = 0; j < g.size(); ++j) dst[j] += g[j];
  }
}

LstmState lstm_cell(ag::Tape& t, int x, int h, int c, int w, int b, int hidden) {
  const int xc = ag::concat(t, {x, h});
  const int z = ag::add(t, ag::matmul(t, w, xc), b);
  const int gi = ag::sigmoid(t, ag::slice(t, z, 0, hidden));
  const int gf = ag::sigmoid(t, ag::slice(t, z, hidden, hidden));
  const int gg = ag::tanh_op(t, ag::slice(t, z, 2 * hidden, hidden));
  const int go = ag::sigmoid(t, ag::slice(t, z, 3 * hidden, hidden));
  const int c_next = ag::add(t, ag::mul(t, gf, c), ag::mul(t, gi, gg));
  const int h_next = ag::mul(t, go, ag::tanh_op(t, c_next));
  return {h_next, c_next};
}

int gru_cell(ag::Tape& t, int x, int h, int w_zr, int b_zr, int w_c, int b_c,
             int hidden) {
  const int xc = ag::concat(t, {x, h});
  const int zr = ag::sigmoid(t, ag::add(t, ag::matmul(t, w_zr, xc), b_zr));
  const int z = ag::slice(t, zr, 0, hidden);
  const int r = ag::slice(t, zr, hidden, hidden);
  const int xrh = ag::concat(t, {x, ag::mul(t, r, h)});
  const int hc = ag::tanh_op(t, ag::add(t, ag::matmul(t, w_c, xrh), b_c));
  const int keep = ag::scale_add(t, z, -1.0, 1.0);
  return ag::add(t, ag::mul(t, keep, h), ag::mul(t, z, hc));
}

// Parameter order is fixed by init_params, so leaves are addressed by index.
std::vector<int> bidirectional_forward(ag::Tape& t, const ModelSpec& spec,
                                       const std::vector<int>& leaves,
                                       const std::vector<double>& dtoa) {
  if (dtoa.empty())
    throw std::invalid_argument("bidirectional_forward: empty sequence");
  if (spec.kind != ModelKind::BLSTM && spec.kind != ModelKind::BGRU)
    throw std::invalid_argument("bidirectional_forward: model kind is not recurrent");
  const int len = static_cast<int>(dtoa.size());
  const int h = spec.hidden;

  std::vector<int> xs(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i)
    xs[static_cast<std::size_t>(i)] = t.scalar(dtoa[static_cast<std::size_t>(i)] * spec.input_scale);

  const int zero = t.leaf({h}, std::vector<double>(static_cast<std::size_t>(h), 0.0), false);
  std::vector<int> hf(static_cast<std::size_t>(len));
  std::vector<int> hb(static_cast<std::size_t>(len));

  if (spec.kind == ModelKind::BLSTM) {
    const int fw = leaves[0], fb = leaves[1], bw = leaves[2], bb = leaves[3];
    LstmState s{zero, zero};
    for (int i = 0; i < len; ++i) {
      s = lstm_cell(t, xs[static_cast<std::size_t>(i)], s.h, s.c, fw, fb, h);
      hf[static_cast<std::size_t>(i)] = s.h;
    }
    s = {zero, zero};
    for (int i = len - 1; i >= 0; --i) {
      s = lstm_cell(t, xs[static_cast<std::size_t>(i)], s.h, s.c, bw, bb, h);
      hb[static_cast<std::size_t>(i)] = s.h;
    }
  } else {
    const int fwzr = leaves[0], fbzr = leaves[1], fwc = leaves[2], fbc = leaves[3];
    const int bwzr = leaves[4], bbzr = leaves[5], bwc = leaves[6], bbc = leaves[7];
    int state = zero;
    for (int i = 0; i < len; ++i) {
      state = gru_cell(t, xs[static_cast<std::size_t>(i)], state, fwzr, fbzr, fwc, fbc, h);
      hf[static_cast<std::size_t>(i)] = state;
    }
    state = zero;
    for (int i = len - 1; i >= 0; --i) {
      state = gru_cell(t, xs[static_cast<std::size_t>(i)], state, bwzr, bbzr, bwc, bbc, h);
      hb[static_cast<std::size_t>(i)] = state;
    }
  }

  const int head_w = leaves[leaves.size() - 2];
  const int head_b = leaves[leaves.size() - 1];
  std::vector<int> logits(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) {
    const int both = ag::concat(t, {hf[static_cast<std::size_t>(i)], hb[static_cast<std::size_t>(i)]});
    logits[static_cast<std::size_t>(i)] = ag::add(t, ag::matmul(t, head_w, both), head_b);
  }
  return logits;
}

std::vector<int> dcn_forward(ag::Tape& t, const ModelSpec& spec,
                             const std::vector<int>& leaves,
                             const std::vector<double>& dtoa) {
  if (dtoa.empty()) throw std::invalid_argument("dcn_forward: empty sequence");
  if (spec.kind != ModelKind::DCN)
    throw std::invalid_argument("dcn_forward: model kind is not DCN");
  const int len = static_cast<int>(dtoa.size());

  std::vector<double> scaled(dtoa.size());
  for (std::size_t i = 0; i < dtoa.size(); ++i) scaled[i] = dtoa[i] * spec.input_scale;
  int x = t.leaf({1, len}, std::move(scaled), false);

  std::size_t li = 0;
  auto next_leaf = [&leaves, &li]() { return leaves[li++]; };
  const int lift_w = next_leaf();
  const int lift_b = next_leaf();
  x = ag::add(t, ag::conv1d_dilated(t, x, lift_w, 1), lift_b);
  for (int b = 0; b < spec.residual_blocks; ++b) {
    const int dilation = 1 << b;
    const int w1 = next_leaf();
    const int b1 = next_leaf();
    const int w2 = next_leaf();
    const int b2 = next_leaf();
    int y = ag::relu(t, ag::add(t, ag::conv1d_dilated(t, x, w1, dilation), b1));
    y = ag::add(t, ag::conv1d_dilated(t, y, w2, dilation), b2);
    x = ag::relu(t, ag::add(t, x, y));
  }
  const int out_w = next_leaf();
  const int out_b = next_leaf();
  const int logits_mat = ag::add(t, ag::conv1d_dilated(t, x, out_w, 1), out_b);

  std::vector<int> logits(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i)
    logits[static_cast<std::size_t>(i)] = ag::column(t, logits_mat, i);
  return logits;
}

std::vector<int> model_forward(ag::Tape& t, const ModelSpec& spec,
                               const std::vector<int>& leaves,
                               const std::vector<double>& dtoa) {
  return spec.kind == ModelKind::DCN ? dcn_forward(t, spec, leaves, dtoa)
                                     : bidirectional_forward(t, spec, leaves, dtoa);
}

int build_sample_loss(ag::Tape& t, const ModelSpec& spec, const std::vector<int>& leaves,
                      const std::vector<double>& dtoa, const std::vector<int>& labels) {
  if (dtoa.size() != labels.size())
    throw std::invalid_argument("build_sample_loss: dtoa and labels lengths differ");
  const std::vector<int> logits = model_forward(t, spec, leaves, dtoa);
  std::vector<int> losses(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const int probs = ag::softmax(t, logits[i]);
    losses[i] = ag::cross_entropy(t, probs, labels[i]);
  }
  return ag::sequence_loss(t, ag::concat(t, losses));
}

std::vector<int> predict_labels(const Model& model, const std::vector<double>& dtoa) {
  ag::Tape tape;
  const std::vector<int> leaves = make_param_leaves(tape, model.params, false);
  const std::vector<int> logits = model_forward(tape, model.spec, leaves, dtoa);
  std::vector<int> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto& v = tape.at(logits[i]).value;
    int best = 0;
    for (int c = 1; c < static_cast<int>(v.size()); ++c)
      if (v[static_cast<std::size_t>(c)] > v[static_cast<std::size_t>(best)]) best = c;
    out[i] = best;
  }
  return out;
}

}  // namespace pdl::nn
