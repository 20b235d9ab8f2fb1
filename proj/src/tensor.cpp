#include "pdl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdl::ag {

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out + "]";
}

std::size_t shape_size(const Shape& s) {
  std::size_t n = 1;
  for (int e : s) n *= static_cast<std::size_t>(e);
  return n;
}

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                              shape_str(a) + " and " + shape_str(b));
}

void check_value(const char* op, const Shape& shape, std::size_t n) {
  if (shape_size(shape) != n)
    throw std::invalid_argument(std::string(op) + ": value size " + std::to_string(n) +
                                " does not match shape " + shape_str(shape));
}

}  // namespace

int Tape::leaf(Shape shape, std::vector<double> value, bool requires_grad) {
  check_value("leaf", shape, value.size());
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return size() - 1;
}

int Tape::scalar(double v, bool requires_grad) {
  return leaf({1}, {v}, requires_grad);
}

int Tape::record(const char* op, Shape shape, std::vector<double> value,
                 std::vector<int> parents, std::function<void(Tape&, int)> backprop) {
  check_value(op, shape, value.size());
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.op = op;
  for (int p : n.parents)
    if (at(p).requires_grad) n.requires_grad = true;
  if (n.requires_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return size() - 1;
}

std::vector<double>& Tape::grad_of(int id) {
  Node& n = at(id);
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Tape::backward(int root) {
  Node& r = at(root);
  if (r.value.size() != 1)
    throw std::invalid_argument("backward: root must be scalar, got shape " +
                                shape_str(r.shape));
  grad_of(root)[0] = 1.0;
  for (int id = root; id >= 0; --id) {
    Node& n = at(id);
    if (!n.requires_grad || n.grad.empty() || !n.backprop) continue;
    n.backprop(*this, id);
  }
}

// ---------------------------------------------------------------------------

int add(Tape& t, int a, int b) {
  const auto& na = t.at(a);
  const auto& nb = t.at(b);
  if (na.shape == nb.shape) {
    std::vector<double> v(na.value.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = na.value[i] + nb.value[i];
    return t.record("add", na.shape, std::move(v), {a, b}, [a, b](Tape& tp, int self) {
      const auto& g = tp.at(self).grad;
      if (tp.at(a).requires_grad) {
        auto& ga = tp.grad_of(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tp.at(b).requires_grad) {
        auto& gb = tp.grad_of(b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  // Row bias: [R,C] + [R].
  if (na.shape.size() == 2 && nb.shape.size() == 1 && nb.shape[0] == na.shape[0]) {
    const int rows = na.shape[0];
    const int cols = na.shape[1];
    std::vector<double> v(na.value.size());
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        v[r * cols + c] = na.value[r * cols + c] + nb.value[r];
    return t.record("add", na.shape, std::move(v), {a, b},
                    [a, b, rows, cols](Tape& tp, int self) {
                      const auto& g = tp.at(self).grad;
                      if (tp.at(a).requires_grad) {
                        auto& ga = tp.grad_of(a);
                        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                      }
                      if (tp.at(b).requires_grad) {
                        auto& gb = tp.grad_of(b);
                        for (int r = 0; r < rows; ++r) {
                          double s = 0.0;
                          for (int c = 0; c < cols; ++c) s += g[r * cols + c];
                          gb[r] += s;
                        }
                      }
                    });
  }
  shape_error("add", na.shape, nb.shape);
}

int mul(Tape& t, int a, int b) {
  const auto& na = t.at(a);
  const auto& nb = t.at(b);
  if (na.shape != nb.shape) shape_error("mul", na.shape, nb.shape);
  std::vector<double> v(na.value.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = na.value[i] * nb.value[i];
  return t.record("mul", na.shape, std::move(v), {a, b}, [a, b](Tape& tp, int self) {
    const auto& g = tp.at(self).grad;
    const auto& va = tp.at(a).value;
    const auto& vb = tp.at(b).value;
    if (tp.at(a).requires_grad) {
      auto& ga = tp.grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
    }
    if (tp.at(b).requires_grad) {
      auto& gb = tp.grad_of(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
    }
  });
}

int scale_add(Tape& t, int x, double scale, double offset) {
  const auto& nx = t.at(x);
  std::vector<double> v(nx.value.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = scale * nx.value[i] + offset;
  return t.record("scale_add", nx.shape, std::move(v), {x},
                  [x, scale](Tape& tp, int self) {
                    const auto& g = tp.at(self).grad;
                    auto& gx = tp.grad_of(x);
                    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += scale * g[i];
                  });
}

int matmul(Tape& t, int a, int b) {
  const auto& na = t.at(a);
  const auto& nb = t.at(b);
  if (na.shape.size() != 2) shape_error("matmul", na.shape, nb.shape);
  const int m = na.shape[0];
  const int k = na.shape[1];
  const bool vec = nb.shape.size() == 1;
  const int n = vec ? 1 : nb.shape[1];
  if ((vec && nb.shape[0] != k) || (!vec && (nb.shape.size() != 2 || nb.shape[0] != k)))
    shape_error("matmul", na.shape, nb.shape);

  std::vector<double> v(static_cast<std::size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      const double aip = na.value[i * k + p];
      for (int j = 0; j < n; ++j) v[i * n + j] += aip * nb.value[p * n + j];
    }
  Shape out_shape = vec ? Shape{m} : Shape{m, n};
  return t.record("matmul", std::move(out_shape), std::move(v), {a, b},
                  [a, b, m, k, n](Tape& tp, int self) {
                    const auto& g = tp.at(self).grad;
                    const auto& va = tp.at(a).value;
                    const auto& vb = tp.at(b).value;
                    if (tp.at(a).requires_grad) {
                      auto& ga = tp.grad_of(a); // dA = dC * B^T
                      for (int i = 0; i < m; ++i)
                        for (int p = 0; p < k; ++p) {
                          double s = 0.0;
                          for (int j = 0; j < n; ++j) s += g[i * n + j] * vb[p * n + j];
                          ga[i * k + p] += s;
                        }
                    }
                    if (tp.at(b).requires_grad) {
                      auto& gb = tp.grad_of(b); // dB = A^T * dC
                      for (int p = 0; p < k; ++p)
                        for (int i = 0; i < m; ++i) {
                          const double aip = va[i * k + p];
                          for (int j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
                        }
                    }
                  });
}

int concat(Tape& t, const std::vector<int>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat: no inputs");
  std::size_t total = 0;
  for (int x : xs) {
    const auto& n = t.at(x);
    if (n.shape.size() != 1)
      throw std::invalid_argument("concat: rank-1 inputs required, got " +
                                  shape_str(n.shape));
    total += n.value.size();
  }
  std::vector<double> v;
  v.reserve(total);
  for (int x : xs) {
    const auto& n = t.at(x);
    v.insert(v.end(), n.value.begin(), n.value.end());
  }
  std::vector<int> parents = xs;
  return t.record("concat", {static_cast<int>(total)}, std::move(v), std::move(parents),
                  [](Tape& tp, int self) {
                    const auto& node = tp.at(self);
                    const auto& g = node.grad;
                    std::size_t off = 0;
                    for (int p : node.parents) {
                      const std::size_t len = tp.at(p).value.size();
                      if (tp.at(p).requires_grad) {
                        auto& gp = tp.grad_of(p);
                        for (std::size_t i = 0; i < len; ++i) gp[i] += g[off + i];
                      }
                      off += len;
                    }
                  });
}

int slice(Tape& t, int x, int start, int len) {
  const auto& nx = t.at(x);
  if (nx.shape.size() != 1)
    throw std::invalid_argument("slice: rank-1 input required, got " + shape_str(nx.shape));
  if (start < 0 || len < 1 || start + len > nx.shape[0])
    throw std::invalid_argument("slice: range [" + std::to_string(start) + "," +
                                std::to_string(start + len) + ") out of bounds for " +
                                shape_str(nx.shape));
  std::vector<double> v(nx.value.begin() + start, nx.value.begin() + start + len);
  return t.record("slice", {len}, std::move(v), {x}, [x, start, len](Tape& tp, int self) {
    const auto& g = tp.at(self).grad;
    auto& gx = tp.grad_of(x);
    for (int i = 0; i < len; ++i) gx[start + i] += g[i];
  });
}

int column(Tape& t, int x, int col) {
  const auto& nx = t.at(x);
  if (nx.shape.size() != 2)
    throw std::invalid_argument("column: rank-2 input required, got " + shape_str(nx.shape));
  const int rows = nx.shape[0];
  const int cols = nx.shape[1];
  if (col < 0 || col >= cols)
    throw std::invalid_argument("column: index " + std::to_string(col) +
                                " out of bounds for " + shape_str(nx.shape));
  std::vector<double> v(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) v[r] = nx.value[r * cols + col];
  return t.record("column", {rows}, std::move(v), {x},
                  [x, col, rows, cols](Tape& tp, int self) {
                    const auto& g = tp.at(self).grad;
                    auto& gx = tp.grad_of(x);
                    for (int r = 0; r < rows; ++r) gx[r * cols + col] += g[r];
                  });
}

namespace {
inline double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

int sigmoid(Tape& t, int x) {
  const auto& nx = t.at(x);
  std::vector<double> v(nx.value.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = sigmoid_scalar(nx.value[i]);
  return t.record("sigmoid", nx.shape, std::move(v), {x}, [x](Tape& tp, int self) {
    const auto& node = tp.at(self);
    auto& gx = tp.grad_of(x);
    for (std::size_t i = 0; i < node.value.size(); ++i) {
      const double y = node.value[i];
      gx[i] += node.grad[i] * y * (1.0 - y);
    }
  });
}

int tanh_op(Tape& t, int x) {
  const auto& nx = t.at(x);
  std::vector<double> v(nx.value.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(nx.value[i]);
  return t.record("tanh", nx.shape, std::move(v), {x}, [x](Tape& tp, int self) {
    const auto& node = tp.at(self);
    auto& gx = tp.grad_of(x);
    for (std::size_t i = 0; i < node.value.size(); ++i) {
      const double y = node.value[i];
      gx[i] += node.grad[i] * (1.0 - y * y);
    }
  });
}

int relu(Tape& t, int x) {
  const auto& nx = t.at(x);
  std::vector<double> v(nx.value.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = nx.value[i] > 0.0 ? nx.value[i] : 0.0;
  return t.record("relu", nx.shape, std::move(v), {x}, [x](Tape& tp, int self) {
    const auto& node = tp.at(self);
    const auto& vx = tp.at(x).value;
    auto& gx = tp.grad_of(x);
    for (std::size_t i = 0; i < node.value.size(); ++i)
      if (vx[i] > 0.0) gx[i] += node.grad[i];
  });
}

int softmax(Tape& t, int x, int axis) {
  const auto& nx = t.at(x);
  const int rank = static_cast<int>(nx.shape.size());
  if (rank < 1 || rank > 2 || axis < 0 || axis >= rank)
    throw std::invalid_argument("softmax: unsupported shape " + shape_str(nx.shape) +
                                " with axis " + std::to_string(axis));
  // Treat the tensor as [n_slices] groups of length axis_len with a stride.
  const int axis_len = nx.shape[static_cast<std::size_t>(axis)];
  const int other = rank == 1 ? 1 : nx.shape[static_cast<std::size_t>(1 - axis)];
  const int stride = (rank == 2 && axis == 0) ? other : 1;

  std::vector<double> v(nx.value.size());
  for (int s = 0; s < other; ++s) {
    const int base = (rank == 2 && axis == 0) ? s : s * axis_len;
    double mx = -1e300;
    for (int i = 0; i < axis_len; ++i) mx = std::max(mx, nx.value[base + i * stride]);
    double sum = 0.0;
    for (int i = 0; i < axis_len; ++i) {
      const double e = std::exp(nx.value[base + i * stride] - mx);
      v[base + i * stride] = e;
      sum += e;
    }
    for (int i = 0; i < axis_len; ++i) v[base + i * stride] /= sum;
  }
  return t.record("softmax", nx.shape, std::move(v), {x},
                  [x, axis_len, other, stride, rank, axis](Tape& tp, int self) {
                    const auto& node = tp.at(self);
                    auto& gx = tp.grad_of(x);
                    for (int s = 0; s < other; ++s) {
                      const int base = (rank == 2 && axis == 0) ? s : s * axis_len;
                      double dot = 0.0;
                      for (int i = 0; i < axis_len; ++i)
                        dot += node.grad[base + i * stride] * node.value[base + i * stride];
                      for (int i = 0; i < axis_len; ++i) {
                        const std::size_t idx = static_cast<std::size_t>(base + i * stride);
                        gx[idx] += node.value[idx] * (node.grad[idx] - dot);
                      }
                    }
                  });
}

int conv1d_dilated(Tape& t, int input, int weights, int dilation) {
  const auto& ni = t.at(input);
  const auto& nw = t.at(weights);
  if (ni.shape.size() != 2 || nw.shape.size() != 3)
    shape_error("conv1d_dilated", ni.shape, nw.shape);
  const int cin = ni.shape[0];
  const int len = ni.shape[1];
  const int cout = nw.shape[0];
  const int k = nw.shape[2];
  if (nw.shape[1] != cin) shape_error("conv1d_dilated", ni.shape, nw.shape);
  if (k % 2 == 0)
    throw std::invalid_argument("conv1d_dilated: kernel size must be odd, got " +
                                std::to_string(k));
  if (dilation < 1)
    throw std::invalid_argument("conv1d_dilated: dilation must be >= 1, got " +
                                std::to_string(dilation));
  const int center = (k - 1) / 2;

  std::vector<double> v(static_cast<std::size_t>(cout) * len, 0.0);
  for (int o = 0; o < cout; ++o)
    for (int ci = 0; ci < cin; ++ci)
      for (int j = 0; j < k; ++j) {
        const double w = nw.value[(o * cin + ci) * k + j];
        if (w == 0.0) continue;
        const int off = (j - center) * dilation;
        const int t0 = std::max(0, -off);
        const int t1 = std::min(len, len - off);
        const double* in = ni.value.data() + ci * len + off;
        double* out = v.data() + o * len;
        for (int tt = t0; tt < t1; ++tt) out[tt] += w * in[tt];
      }
  return t.record(
      "conv1d_dilated", {cout, len}, std::move(v), {input, weights},
      [input, weights, cin, cout, len, k, center, dilation](Tape& tp, int self) {
        const auto& g = tp.at(self).grad;
        const auto& vi = tp.at(input).value;
        const auto& vw = tp.at(weights).value;
        if (tp.at(input).requires_grad) {
          auto& gi = tp.grad_of(input);
          for (int o = 0; o < cout; ++o)
            for (int ci = 0; ci < cin; ++ci)
              for (int j = 0; j < k; ++j) {
                const double w = vw[(o * cin + ci) * k + j];
                if (w == 0.0) continue;
                const int off = (j - center) * dilation;
                const int t0 = std::max(0, -off);
                const int t1 = std::min(len, len - off);
                const double* go = g.data() + o * len;
                double* gin = gi.data() + ci * len + off;
                for (int tt = t0; tt < t1; ++tt) gin[tt] += w * go[tt];
              }
        }
        if (tp.at(weights).requires_grad) {
          auto& gw = tp.grad_of(weights);
          for (int o = 0; o < cout; ++o)
            for (int ci = 0; ci < cin; ++ci)
              for (int j = 0; j < k; ++j) {
                const int off = (j - center) * dilation;
                const int t0 = std::max(0, -off);
                const int t1 = std::min(len, len - off);
                const double* go = g.data() + o * len;
                const double* in = vi.data() + ci * len + off;
                double s = 0.0;
                for (int tt = t0; tt < t1; ++tt) s += go[tt] * in[tt];
                gw[(o * cin + ci) * k + j] += s;
              }
        }
      });
}

int cross_entropy(Tape& t, int probs, int true_class) {
  const auto& np = t.at(probs);
  if (np.shape.size() != 1 || np.shape[0] < 2)
    throw std::invalid_argument("cross_entropy: probs must be rank-1 with >= 2 classes, got " +
                                shape_str(np.shape));
  if (true_class < 0 || true_class >= np.shape[0])
    throw std::invalid_argument("cross_entropy: class " + std::to_string(true_class) +
                                " out of range for " + shape_str(np.shape));
  double sum = 0.0;
  for (double p : np.value) sum += p;
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("cross_entropy: probs sum to " + std::to_string(sum) +
                                ", expected 1");
  constexpr double kClamp = 1e-12;
  const double p = np.value[static_cast<std::size_t>(true_class)];
  const double loss = -std::log(std::max(p, kClamp));
  return t.record("cross_entropy", {1}, {loss}, {probs},
                  [probs, true_class](Tape& tp, int self) {
                    const double g = tp.at(self).grad[0];
                    const double p = tp.at(probs).value[static_cast<std::size_t>(true_class)];
                    if (p > 1e-12) tp.grad_of(probs)[static_cast<std::size_t>(true_class)] -= g / p;
                  });
}

int sequence_loss(Tape& t, int per_step_losses) {
  const auto& nx = t.at(per_step_losses);
  if (nx.value.empty())
    throw std::invalid_argument("sequence_loss: empty input");
  const std::size_t n = nx.value.size();
  double mean = 0.0;
  for (double v : nx.value) mean += v;
  mean /= static_cast<double>(n);
  return t.record("sequence_loss", {1}, {mean}, {per_step_losses},
                  [per_step_losses, n](Tape& tp, int self) {
                    const double g = tp.at(self).grad[0] / static_cast<double>(n);
                    auto& gx = tp.grad_of(per_step_losses);
                    for (std::size_t i = 0; i < n; ++i) gx[i] += g;
                  });
}

}  // namespace pdl::ag
