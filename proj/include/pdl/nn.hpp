#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdl/rng.hpp"
#include "pdl/tensor.hpp"

namespace pdl::nn {

enum class ModelKind { BLSTM, BGRU, DCN };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct ModelSpec {
  ModelKind kind = ModelKind::BLSTM;
  int hidden = 32;         // recurrent kinds: per-direction state size
  int channels = 14;       // DCN: constant width across blocks
  int kernel = 3;          // DCN: odd
  int residual_blocks = 8; // DCN: block i dilates by 2^i
  int num_classes = 2;
  double input_scale = 0.01; // DTOA is divided by the max PRI before the net
};

/// Fills hidden/channel widths for a named size preset
/// ("desk", "611k", "211k").
ModelSpec make_spec(ModelKind kind, const std::string& preset, int num_classes);

struct Param {
  std::string name;
  ag::Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
};

class ParamStore {
 public:
  int add(std::string name, ag::Shape shape, std::vector<double> value);
  Param& at(int i) { return params_[static_cast<std::size_t>(i)]; }
  const Param& at(int i) const { return params_[static_cast<std::size_t>(i)]; }
  Param* find(const std::string& name);
  int size() const { return static_cast<int>(params_.size()); }
  std::size_t total_values() const;
  void zero_grads();

 private:
  std::vector<Param> params_;
  std::unordered_map<std::string, int> index_;
};

struct Model {
  ModelSpec spec;
  ParamStore params;
};

/// Random initialization: uniform(-s, s) with s = 1/sqrt(fan_in), zero biases,
/// LSTM forget-gate bias +1.
void init_params(const ModelSpec& spec, ParamStore& store, Rng& rng);
Model make_model(const ModelSpec& spec, std::uint64_t seed);

std::size_t param_count(const ModelSpec& spec);
int dcn_receptive_field(const ModelSpec& spec);

/// Leaf nodes for every parameter, in store order.
std::vector<int> make_param_leaves(ag::Tape& tape, const ParamStore& store,
                                   bool requires_grad);

/// Adds each leaf's gradient back into the store.
void accumulate_leaf_grads(const ag::Tape& tape, const std::vector<int>& leaves,
                           ParamStore& store);

struct LstmState {
  int h = -1;
  int c = -1;
};

/// One gated-memory step: i,f,o = sigmoid, g = tanh, c' = f*c + i*g,
/// h' = o*tanh(c'). W is [4h, x+h] with gate rows ordered i,f,g,o.
LstmState lstm_cell(ag::Tape& t, int x, int h, int c, int w, int b, int hidden);

/// One gated step: z,r = sigmoid, hc = tanh(Wc*[x; r*h]), h' = (1-z)*h + z*hc.
int gru_cell(ag::Tape& t, int x, int h, int w_zr, int b_zr, int w_c, int b_c, int hidden);

/// Per-step logits of a bidirectional recurrent model over a DTOA sequence.
std::vector<int> bidirectional_forward(ag::Tape& t, const ModelSpec& spec,
                                       const std::vector<int>& leaves,
                                       const std::vector<double>& dtoa);

/// Per-step logits of the dilated convolutional model.
std::vector<int> dcn_forward(ag::Tape& t, const ModelSpec& spec,
                             const std::vector<int>& leaves,
                             const std::vector<double>& dtoa);

std::vector<int> model_forward(ag::Tape& t, const ModelSpec& spec,
                               const std::vector<int>& leaves,
                               const std::vector<double>& dtoa);

/// Scalar training loss: mean over steps of the per-step cross entropy.
int build_sample_loss(ag::Tape& t, const ModelSpec& spec, const std::vector<int>& leaves,
                      const std::vector<double>& dtoa, const std::vector<int>& labels);

/// Per-step argmax labels; ties resolve to the lower class id.
std::vector<int> predict_labels(const Model& model, const std::vector<double>& dtoa);

}  // namespace pdl::nn
