#pragma once

#include <functional>
#include <string>
#include <vector>

namespace pdl::ag {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
std::size_t shape_size(const Shape& s);

/// Reverse-mode tape. Nodes hold 64-bit values and, once backward() runs,
/// gradients of the root with respect to them. Recording order is the
/// topological order.
class Tape {
 public:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad; // allocated lazily during backward
    std::vector<int> parents;
    std::function<void(Tape&, int)> backprop; // accumulates into parent grads
    const char* op = "leaf";
    bool requires_grad = false;
  };

  int leaf(Shape shape, std::vector<double> value, bool requires_grad);
  int scalar(double v, bool requires_grad = false);
  int record(const char* op, Shape shape, std::vector<double> value,
             std::vector<int> parents, std::function<void(Tape&, int)> backprop);

  Node& at(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& at(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  void clear() { nodes_.clear(); }

  /// Reverse traversal from a scalar root; gradient accumulation is additive
  /// across uses.
  void backward(int root);

  /// Zero-filled gradient storage for a node, created on first touch.
  std::vector<double>& grad_of(int id);

 private:
  std::vector<Node> nodes_;
};

// Core ops. Each checks shapes and registers its backward rule.
int add(Tape& t, int a, int b); // same shape, or b rank-1 row bias for a [R,C]
int mul(Tape& t, int a, int b); // elementwise
int scale_add(Tape& t, int x, double scale, double offset);
int matmul(Tape& t, int a, int b); // [m,k]x[k,n] -> [m,n]; [m,k]x[k] -> [m]
int concat(Tape& t, const std::vector<int>& xs); // rank-1
int slice(Tape& t, int x, int start, int len);   // rank-1
int column(Tape& t, int x, int col);             // [R,C] -> [R]
int sigmoid(Tape& t, int x);
int tanh_op(Tape& t, int x);
int relu(Tape& t, int x);
int softmax(Tape& t, int x, int axis = 0);

/// Dilated 1-D convolution with symmetric zero padding: input [Cin,L],
/// weights [Cout,Cin,K] with K odd, output [Cout,L].
int conv1d_dilated(Tape& t, int input, int weights, int dilation);

/// -log(probs[true_class]) with the log clamped at 1e-12. probs must be a
/// probability vector.
int cross_entropy(Tape& t, int probs, int true_class);

/// Arithmetic mean of all entries (the per-sample loss reduction).
int sequence_loss(Tape& t, int per_step_losses);

}  // namespace pdl::ag
