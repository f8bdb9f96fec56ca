#include "pnmn/graph.hpp"

#include <algorithm>
#include <cmath>

#include "pnmn/kernels.hpp"

namespace pnmn::ad {

namespace {

Array promote(Array v) {
  if (v.rank() == 1) return v.reshaped({1, v.size()});
  if (v.rank() != 2) throw Error("graph values must be rank 1 or 2, got " + to_string(v.shape()));
  return v;
}

inline double stable_sigmoid(double x) {
  const double e = std::exp(-std::abs(x));
  return x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::kInput: return "input";
    case Op::kConstant: return "constant";
    case Op::kMatMul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kScale: return "scale";
    case Op::kAddScalar: return "add_scalar";
    case Op::kTanh: return "tanh";
    case Op::kSigmoid: return "sigmoid";
    case Op::kSoftmaxRows: return "softmax_rows";
    case Op::kRowSelect: return "row";
    case Op::kConcatRows: return "concat_rows";
    case Op::kTranspose: return "transpose";
    case Op::kBroadcastRows: return "broadcast_rows";
    case Op::kBroadcastCols: return "broadcast_cols";
    case Op::kConvexWrite: return "convex_write";
    case Op::kSum: return "sum";
    case Op::kSoftmaxCrossEntropy: return "softmax_cross_entropy";
  }
  return "unknown";
}

void Graph::shape_error(Op op, const std::string& detail) const {
  throw ShapeError(op_name(op), nodes_.size(), detail);
}

const Graph::Node& Graph::at(Var v, const char* what) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw Error(std::string(what) + ": invalid node handle");
  }
  return nodes_[v.id];
}

Var Graph::input(const std::string& name, Array value) {
  if (input_index_.count(name)) throw Error("duplicate graph input '" + name + "'");
  Node n;
  n.op = Op::kInput;
  n.name = name;
  n.value = promote(std::move(value));
  n.shape = n.value.shape();
  n.requires_grad = true;
  n.has_value = true;
  Var v = push(std::move(n));
  input_index_[name] = v.id;
  return v;
}

Var Graph::input(const std::string& name, const Shape& shape) {
  if (input_index_.count(name)) throw Error("duplicate graph input '" + name + "'");
  Shape s = shape;
  if (s.size() == 1) s = {1, s[0]};
  if (s.size() != 2) throw Error("graph input '" + name + "' must be rank 1 or 2");
  Node n;
  n.op = Op::kInput;
  n.name = name;
  n.shape = s;
  n.requires_grad = true;
  n.has_value = false;
  evaluated_ = false;
  Var v = push(std::move(n));
  input_index_[name] = v.id;
  return v;
}

Var Graph::constant(Array value) {
  Node n;
  n.op = Op::kConstant;
  n.value = promote(std::move(value));
  n.shape = n.value.shape();
  n.has_value = true;
  return push(std::move(n));
}

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  const std::size_t id = nodes_.size() - 1;
  if (evaluated_ && nodes_[id].op != Op::kInput && nodes_[id].op != Op::kConstant) evaluate(id);
  backward_done_ = false;
  return Var{id};
}

Var Graph::matmul(Var a, Var b) {
  const auto& na = at(a, "matmul");
  const auto& nb = at(b, "matmul");
  if (na.shape[1] != nb.shape[0]) {
    shape_error(Op::kMatMul, to_string(na.shape) + " x " + to_string(nb.shape));
  }
  Node n;
  n.op = Op::kMatMul;
  n.a = a.id;
  n.b = b.id;
  n.shape = {na.shape[0], nb.shape[1]};
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

#define PNMN_BINARY_ELEMENTWISE(fn, OPCODE)                                             \
  Var Graph::fn(Var a, Var b) {                                                         \
    const auto& na = at(a, #fn);                                                        \
    const auto& nb = at(b, #fn);                                                        \
    if (na.shape != nb.shape) {                                                         \
      shape_error(OPCODE, to_string(na.shape) + " vs " + to_string(nb.shape));          \
    }                                                                                   \
    Node n;                                                                             \
    n.op = OPCODE;                                                                      \
    n.a = a.id;                                                                         \
    n.b = b.id;                                                                         \
    n.shape = na.shape;                                                                 \
    n.requires_grad = na.requires_grad || nb.requires_grad;                             \
    return push(std::move(n));                                                          \
  }

PNMN_BINARY_ELEMENTWISE(add, Op::kAdd)
PNMN_BINARY_ELEMENTWISE(sub, Op::kSub)
PNMN_BINARY_ELEMENTWISE(mul, Op::kMul)
#undef PNMN_BINARY_ELEMENTWISE

Var Graph::scale(Var a, double s) {
  const auto& na = at(a, "scale");
  Node n;
  n.op = Op::kScale;
  n.a = a.id;
  n.scalar = s;
  n.shape = na.shape;
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Graph::add_scalar(Var a, double s) {
  const auto& na = at(a, "add_scalar");
  Node n;
  n.op = Op::kAddScalar;
  n.a = a.id;
  n.scalar = s;
  n.shape = na.shape;
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Graph::tanh(Var a) {
  const auto& na = at(a, "tanh");
  Node n;
  n.op = Op::kTanh;
  n.a = a.id;
  n.shape = na.shape;
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Graph::sigmoid(Var a) {
  const auto& na = at(a, "sigmoid");
  Node n;
  n.op = Op::kSigmoid;
  n.a = a.id;
  n.shape = na.shape;
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Graph::softmax_rows(Var a) {
  const auto& na = at(a, "softmax_rows");
  if (na.shape[1] == 0) shape_error(Op::kSoftmaxRows, "empty rows " + to_string(na.shape));
  Node n;
  n.op = Op::kSoftmaxRows;
  n.a = a.id;
  n.shape = na.shape;
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Graph::row(Var a, std::size_t r) {
  const auto& na = at(a, "row");
  if (r >= na.shape[0]) {
    shape_error(Op::kRowSelect, "row " + std::to_string(r) + " of " + to_string(na.shape));
  }
  Node n;
  n.op = Op::kRowSelect;
  n.a = a.id;
  n.index = r;
  n.shape = {1, na.shape[1]};
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Graph::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) shape_error(Op::kConcatRows, "no parts");
  Node n;
  n.op = Op::kConcatRows;
  const std::size_t cols = at(parts[0], "concat_rows").shape[1];
  std::size_t rows = 0;
  for (Var p : parts) {
    const auto& np = at(p, "concat_rows");
    if (np.shape[1] != cols) {
      shape_error(Op::kConcatRows, to_string(np.shape) + " does not have " + std::to_string(cols) +
                                       " columns");
    }
    rows += np.shape[0];
    n.requires_grad = n.requires_grad || np.requires_grad;
    n.parts.push_back(p.id);
  }
  n.shape = {rows, cols};
  return push(std::move(n));
}

Var Graph::transpose(Var a) {
  const auto& na = at(a, "transpose");
  Node n;
  n.op = Op::kTranspose;
  n.a = a.id;
  n.shape = {na.shape[1], na.shape[0]};
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Graph::broadcast_rows(Var r, std::size_t count) {
  const auto& na = at(r, "broadcast_rows");
  if (na.shape[0] != 1) shape_error(Op::kBroadcastRows, "expected a row, got " + to_string(na.shape));
  Node n;
  n.op = Op::kBroadcastRows;
  n.a = r.id;
  n.index = count;
  n.shape = {count, na.shape[1]};
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Graph::broadcast_cols(Var c, std::size_t count) {
  const auto& na = at(c, "broadcast_cols");
  if (na.shape[1] != 1) {
    shape_error(Op::kBroadcastCols, "expected a column, got " + to_string(na.shape));
  }
  Node n;
  n.op = Op::kBroadcastCols;
  n.a = c.id;
  n.index = count;
  n.shape = {na.shape[0], count};
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Graph::convex_write(Var memory, Var z, Var update) {
  const auto& nm = at(memory, "convex_write");
  const auto& nz = at(z, "convex_write");
  const auto& nu = at(update, "convex_write");
  if (nz.shape != Shape{1, nm.shape[0]} || nu.shape != Shape{1, nm.shape[1]}) {
    shape_error(Op::kConvexWrite, "memory " + to_string(nm.shape) + ", z " + to_string(nz.shape) + ", update " +
                                      to_string(nu.shape));
  }
  Node n;
  n.op = Op::kConvexWrite;
  n.a = memory.id;
  n.b = z.id;
  n.parts = {update.id};
  n.shape = nm.shape;
  n.requires_grad = nm.requires_grad || nz.requires_grad || nu.requires_grad;
  return push(std::move(n));
}

Var Graph::sum(Var a) {
  const auto& na = at(a, "sum");
  Node n;
  n.op = Op::kSum;
  n.a = a.id;
  n.shape = {1, 1};
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Graph::softmax_cross_entropy(Var logits, std::vector<int> labels) {
  const auto& na = at(logits, "softmax_cross_entropy");
  if (labels.size() != na.shape[0] || na.shape[0] == 0) {
    shape_error(Op::kSoftmaxCrossEntropy, std::to_string(labels.size()) + " labels for logits " +
                                              to_string(na.shape));
  }
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= na.shape[1]) {
      shape_error(Op::kSoftmaxCrossEntropy,
                  "label " + std::to_string(l) + " outside " + std::to_string(na.shape[1]) + " classes");
    }
  }
  Node n;
  n.op = Op::kSoftmaxCrossEntropy;
  n.a = logits.id;
  n.labels = std::move(labels);
  n.shape = {1, 1};
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

void Graph::set_output(const std::string& name, Var v) {
  at(v, "set_output");
  output_index_[name] = v.id;
}

void Graph::evaluate(std::size_t id) {
  Node& n = nodes_[id];
  if (n.op == Op::kInput || n.op == Op::kConstant) return;
  const Array* a = n.a != Var::kNone ? &nodes_[n.a].value : nullptr;
  const Array* b = n.b != Var::kNone ? &nodes_[n.b].value : nullptr;
  Array out(n.shape);
  auto& o = out.values();
  switch (n.op) {
    case Op::kMatMul:
      kernels::gemm_nn(a->data(), b->data(), out.data(), n.shape[0], a->shape()[1], n.shape[1]);
      break;
    case Op::kAdd:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = (*a)[i] + (*b)[i];
      break;
    case Op::kSub:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = (*a)[i] - (*b)[i];
      break;
    case Op::kMul:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = (*a)[i] * (*b)[i];
      break;
    case Op::kScale:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = (*a)[i] * n.scalar;
      break;
    case Op::kAddScalar:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = (*a)[i] + n.scalar;
      break;
    case Op::kTanh:
    {
      const double* x = a->values().data();
      double* y = o.data();
      const std::size_t len = o.size();
      for (std::size_t i = 0; i < len; ++i) y[i] = std::tanh(x[i]);
      break;
    }
    case Op::kSigmoid:
    {
      const double* x = a->values().data();
      double* y = o.data();
      const std::size_t len = o.size();
      for (std::size_t i = 0; i < len; ++i) y[i] = stable_sigmoid(x[i]);
      break;
    }
    case Op::kSoftmaxRows: {
      const std::size_t rows = n.shape[0], cols = n.shape[1];
      for (std::size_t r = 0; r < rows; ++r) {
        const double* in = a->data().data() + r * cols;
        double* po = o.data() + r * cols;
        const double mx = *std::max_element(in, in + cols);
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) total += (po[c] = std::exp(in[c] - mx));
        for (std::size_t c = 0; c < cols; ++c) po[c] /= total;
      }
      break;
    }
    case Op::kRowSelect: {
      const std::size_t cols = n.shape[1];
      std::copy_n(a->data().begin() + n.index * cols, cols, o.begin());
      break;
    }
    case Op::kConcatRows: {
      auto dst = o.begin();
      for (std::size_t p : n.parts) dst = std::copy(nodes_[p].value.values().begin(), nodes_[p].value.values().end(), dst);
      break;
    }
    case Op::kTranspose: {
      const std::size_t rows = n.shape[0], cols = n.shape[1];
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) o[r * cols + c] = (*a)[c * rows + r];
      break;
    }
    case Op::kBroadcastRows: {
      const std::size_t cols = n.shape[1];
      for (std::size_t r = 0; r < n.shape[0]; ++r) std::copy_n(a->data().begin(), cols, o.begin() + r * cols);
      break;
    }
    case Op::kBroadcastCols: {
      const std::size_t cols = n.shape[1];
      for (std::size_t r = 0; r < n.shape[0]; ++r) std::fill_n(o.begin() + r * cols, cols, (*a)[r]);
      break;
    }
    case Op::kConvexWrite: {
      const std::size_t rows = n.shape[0], cols = n.shape[1];
      const auto& u = nodes_[n.parts[0]].value.values();
      for (std::size_t r = 0; r < rows; ++r) {
        const double zr = (*b)[r];
        for (std::size_t c = 0; c < cols; ++c) {
          const double m = (*a)[r * cols + c];
          const double v = (1.0 - zr) * m + zr * u[c];
          o[r * cols + c] = std::clamp(v, std::min(m, u[c]), std::max(m, u[c]));
        }
      }
      break;
    }
    case Op::kSum: {
      double s = 0.0;
      for (double v : a->values()) s += v;
      o[0] = s;
      break;
    }
    case Op::kSoftmaxCrossEntropy: {
      const std::size_t rows = a->shape()[0], cols = a->shape()[1];
      n.aux = Array({rows, cols});
      double loss = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* in = a->data().data() + r * cols;
        double* p = n.aux.values().data() + r * cols;
        const double mx = *std::max_element(in, in + cols);
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) total += (p[c] = std::exp(in[c] - mx));
        for (std::size_t c = 0; c < cols; ++c) p[c] /= total;
        loss += std::log(total) + mx - in[n.labels[r]];
      }
      o[0] = loss / static_cast<double>(rows);
      break;
    }
    case Op::kInput:
    case Op::kConstant:
      break;
  }
  if (checked_ && !out.all_finite()) {
    throw Error(std::string("non-finite value produced by ") + op_name(n.op) + " (node " +
                std::to_string(id) + ")");
  }
  n.value = std::move(out);
  n.has_value = true;
}

std::map<std::string, Array> Graph::forward(const std::map<std::string, Array>& inputs) {
  for (const auto& [name, value] : inputs) {
    auto it = input_index_.find(name);
    if (it == input_index_.end()) throw Error("forward: unknown input '" + name + "'");
    Node& n = nodes_[it->second];
    Array v = promote(value);
    if (v.shape() != n.shape) {
      throw ShapeError("input", it->second,
                       "'" + name + "' declared " + to_string(n.shape) + ", given " + to_string(v.shape()));
    }
    n.value = std::move(v);
    n.has_value = true;
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (n.op == Op::kInput && !n.has_value) throw Error("forward: input '" + n.name + "' has no value");
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) evaluate(id);
  evaluated_ = true;
  backward_done_ = false;
  std::map<std::string, Array> out;
  for (const auto& [name, id] : output_index_) out[name] = nodes_[id].value;
  return out;
}

Array& Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != shape_size(n.shape) || n.grad.shape() != n.shape) n.grad = Array(n.shape);
  return n.grad;
}

void Graph::backward(Var output, const Array& seed) {
  if (!evaluated_) throw Error("backward called before forward");
  const Node& out = at(output, "backward");
  Array s = promote(seed);
  if (s.shape() != out.shape) {
    throw ShapeError("backward", output.id,
                     "seed " + to_string(s.shape()) + " vs output " + to_string(out.shape));
  }
  for (auto& n : nodes_) n.grad = Array();
  zero_grads_.clear();
  nodes_[output.id].grad = std::move(s);
  for (std::size_t id = output.id + 1; id-- > 0;) {
    if (nodes_[id].grad.size() == 0 && shape_size(nodes_[id].shape) != 0) continue;
    if (!nodes_[id].requires_grad) continue;
    propagate(id);
  }
  backward_done_ = true;
}

void Graph::backward(Var scalar_output) {
  const Node& out = at(scalar_output, "backward");
  if (out.shape != Shape{1, 1}) {
    throw ShapeError("backward", scalar_output.id, "expected scalar output, got " + to_string(out.shape));
  }
  backward(scalar_output, Array({1, 1}, 1.0));
}

void Graph::propagate(std::size_t id) {
  const Node& n = nodes_[id];
  const Array& g = n.grad;
  const auto& gv = g.values();
  auto want = [&](std::size_t arg) { return arg != Var::kNone && nodes_[arg].requires_grad; };

  switch (n.op) {
    case Op::kInput:
    case Op::kConstant:
      break;
    case Op::kMatMul: {
      const Array& a = nodes_[n.a].value;
      const Array& b = nodes_[n.b].value;
      const std::size_t m = n.shape[0], k = a.shape()[1], cols = n.shape[1];
      if (want(n.a)) kernels::gemm_nt(g.data(), b.data(), grad_buffer(n.a).data(), m, cols, k);
      if (want(n.b)) kernels::gemm_tn(a.data(), g.data(), grad_buffer(n.b).data(), k, m, cols);
      break;
    }
    case Op::kAdd:
    case Op::kSub: {
      const double sign = n.op == Op::kAdd ? 1.0 : -1.0;
      if (want(n.a)) {
        auto& ga = grad_buffer(n.a).values();
        for (std::size_t i = 0; i < gv.size(); ++i) ga[i] += gv[i];
      }
      if (want(n.b)) {
        auto& gb = grad_buffer(n.b).values();
        for (std::size_t i = 0; i < gv.size(); ++i) gb[i] += sign * gv[i];
      }
      break;
    }
    case Op::kMul: {
      const auto& av = nodes_[n.a].value.values();
      const auto& bv = nodes_[n.b].value.values();
      if (want(n.a)) {
        auto& ga = grad_buffer(n.a).values();
        for (std::size_t i = 0; i < gv.size(); ++i) ga[i] += gv[i] * bv[i];
      }
      if (want(n.b)) {
        auto& gb = grad_buffer(n.b).values();
        for (std::size_t i = 0; i < gv.size(); ++i) gb[i] += gv[i] * av[i];
      }
      break;
    }
    case Op::kScale: {
      auto& ga = grad_buffer(n.a).values();
      for (std::size_t i = 0; i < gv.size(); ++i) ga[i] += gv[i] * n.scalar;
      break;
    }
    case Op::kAddScalar: {
      auto& ga = grad_buffer(n.a).values();
      for (std::size_t i = 0; i < gv.size(); ++i) ga[i] += gv[i];
      break;
    }
    case Op::kTanh: {
      const auto& y = n.value.values();
      auto& ga = grad_buffer(n.a).values();
      for (std::size_t i = 0; i < gv.size(); ++i) ga[i] += gv[i] * (1.0 - y[i] * y[i]);
      break;
    }
    case Op::kSigmoid: {
      const auto& y = n.value.values();
      auto& ga = grad_buffer(n.a).values();
      for (std::size_t i = 0; i < gv.size(); ++i) ga[i] += gv[i] * y[i] * (1.0 - y[i]);
      break;
    }
    case Op::kSoftmaxRows: {
      const auto& y = n.value.values();
      auto& ga = grad_buffer(n.a).values();
      const std::size_t rows = n.shape[0], cols = n.shape[1];
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += gv[r * cols + c] * y[r * cols + c];
        for (std::size_t c = 0; c < cols; ++c) {
          ga[r * cols + c] += y[r * cols + c] * (gv[r * cols + c] - dot);
        }
      }
      break;
    }
    case Op::kRowSelect: {
      auto& ga = grad_buffer(n.a).values();
      const std::size_t cols = n.shape[1];
      for (std::size_t c = 0; c < cols; ++c) ga[n.index * cols + c] += gv[c];
      break;
    }
    case Op::kConcatRows: {
      std::size_t offset = 0;
      for (std::size_t p : n.parts) {
        const std::size_t len = shape_size(nodes_[p].shape);
        if (nodes_[p].requires_grad) {
          auto& gp = grad_buffer(p).values();
          for (std::size_t i = 0; i < len; ++i) gp[i] += gv[offset + i];
        }
        offset += len;
      }
      break;
    }
    case Op::kTranspose: {
      auto& ga = grad_buffer(n.a).values();
      const std::size_t rows = n.shape[0], cols = n.shape[1];
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) ga[c * rows + r] += gv[r * cols + c];
      break;
    }
    case Op::kBroadcastRows: {
      auto& ga = grad_buffer(n.a).values();
      const std::size_t cols = n.shape[1];
      for (std::size_t r = 0; r < n.shape[0]; ++r)
        for (std::size_t c = 0; c < cols; ++c) ga[c] += gv[r * cols + c];
      break;
    }
    case Op::kBroadcastCols: {
      auto& ga = grad_buffer(n.a).values();
      const std::size_t cols = n.shape[1];
      for (std::size_t r = 0; r < n.shape[0]; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += gv[r * cols + c];
        ga[r] += s;
      }
      break;
    }
    case Op::kConvexWrite: {
      const std::size_t rows = n.shape[0], cols = n.shape[1];
      const std::size_t u_id = n.parts[0];
      const auto& m = nodes_[n.a].value.values();
      const auto& z = nodes_[n.b].value.values();
      const auto& u = nodes_[u_id].value.values();
      if (want(n.a)) {
        auto& ga = grad_buffer(n.a).values();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += (1.0 - z[r]) * gv[r * cols + c];
      }
      if (want(n.b)) {
        auto& gz = grad_buffer(n.b).values();
        for (std::size_t r = 0; r < rows; ++r) {
          double s = 0.0;
          for (std::size_t c = 0; c < cols; ++c) s += gv[r * cols + c] * (u[c] - m[r * cols + c]);
          gz[r] += s;
        }
      }
      if (want(u_id)) {
        auto& gu = grad_buffer(u_id).values();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) gu[c] += z[r] * gv[r * cols + c];
      }
      break;
    }
    case Op::kSum: {
      auto& ga = grad_buffer(n.a).values();
      for (double& v : ga) v += gv[0];
      break;
    }
    case Op::kSoftmaxCrossEntropy: {
      auto& ga = grad_buffer(n.a).values();
      const auto& p = n.aux.values();
      const std::size_t rows = n.aux.shape()[0], cols = n.aux.shape()[1];
      const double s = gv[0] / static_cast<double>(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const double target = static_cast<int>(c) == n.labels[r] ? 1.0 : 0.0;
          ga[r * cols + c] += s * (p[r * cols + c] - target);
        }
      }
      break;
    }
  }
}

const Array& Graph::value(Var v) const {
  const Node& n = at(v, "value");
  if (!n.has_value) throw Error("value of node " + std::to_string(v.id) + " requested before forward");
  return n.value;
}

const Array& Graph::grad(Var v) const {
  const Node& n = at(v, "grad");
  if (!backward_done_) throw Error("grad requested before backward");
  if (n.grad.size() == shape_size(n.shape) && n.grad.shape() == n.shape) return n.grad;
  auto it = zero_grads_.find(v.id);
  if (it == zero_grads_.end()) it = zero_grads_.emplace(v.id, Array(n.shape)).first;
  return it->second;
}

const Shape& Graph::shape(Var v) const { return at(v, "shape").shape; }

Op Graph::op(Var v) const { return at(v, "op").op; }

Var Graph::find_input(const std::string& name) const {
  auto it = input_index_.find(name);
  return it == input_index_.end() ? Var{} : Var{it->second};
}

Var Graph::find_output(const std::string& name) const {
  auto it = output_index_.find(name);
  return it == output_index_.end() ? Var{} : Var{it->second};
}

std::vector<std::pair<std::string, Var>> Graph::inputs() const {
  std::vector<std::pair<std::string, Var>> out;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].op == Op::kInput) out.emplace_back(nodes_[id].name, Var{id});
  }
  return out;
}

}  // namespace pnmn::ad
