#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pnmn/array.hpp"

namespace pnmn::ad {

/// Handle to a node in a Graph. Only meaningful for the graph that issued it.
struct Var {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t id = kNone;
  bool valid() const { return id != kNone; }
};

enum class Op : std::uint8_t {
  kInput,
  kConstant,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kTanh,
  kSigmoid,
  kSoftmaxRows,
  kRowSelect,
  kConcatRows,
  kTranspose,
  kBroadcastRows,
  kBroadcastCols,
  kSum,
  kSoftmaxCrossEntropy,
  kConvexWrite,
};

const char* op_name(Op op);

/// Reverse-mode tape over rank-2 arrays.
///
/// Nodes are recorded in insertion order, which is also the topological order.
/// When every input has a value, each op is evaluated as it is recorded, so
/// values can be read back while the graph is still being built. Inputs
/// declared with only a shape defer evaluation until forward() supplies them.
/// forward() re-evaluates every node from the current input values; constants
/// keep the values they were recorded with.
///
/// Rank-1 values passed to input()/constant() are promoted to row vectors.
class Graph {
 public:
  /// Differentiable named leaf with a value.
  Var input(const std::string& name, Array value);
  /// Differentiable named leaf whose value arrives through forward().
  Var input(const std::string& name, const Shape& shape);
  /// Non-differentiable leaf; never receives a gradient.
  Var constant(Array value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var tanh(Var a);
  Var sigmoid(Var a);
  /// Softmax along each row, max-subtracted.
  Var softmax_rows(Var a);
  /// Row r of a as a [1 x cols] array.
  Var row(Var a, std::size_t r);
  Var concat_rows(std::span<const Var> parts);
  Var transpose(Var a);
  /// Duplicates a [1 x n] row `count` times into [count x n].
  Var broadcast_rows(Var row, std::size_t count);
  /// Duplicates an [m x 1] column `count` times into [m x count].
  Var broadcast_cols(Var col, std::size_t count);
  /// Sum of all entries as [1 x 1].
  Var sum(Var a);
  /// memory [l x k], z [1 x l], update [1 x k]. Row i becomes
  /// (1 - z[i]) * memory[i] + z[i] * update, clamped elementwise to the
  /// interval between memory[i][j] and update[j] so rounding never leaves it.
  Var convex_write(Var memory, Var z, Var update);
  /// Mean over rows of -log softmax(logits)[label]; result is [1 x 1].
  Var softmax_cross_entropy(Var logits, std::vector<int> labels);

  void set_output(const std::string& name, Var v);

  /// Replaces the named inputs' values, re-evaluates every node and returns the
  /// named outputs.
  std::map<std::string, Array> forward(const std::map<std::string, Array>& inputs = {});

  /// Accumulates d(output)/d(node) into every node's gradient buffer, starting
  /// from `seed` (same shape as output). Previous gradients are discarded.
  void backward(Var output, const Array& seed);
  /// backward() for a [1 x 1] output with seed 1.
  void backward(Var scalar_output);

  const Array& value(Var v) const;
  /// Gradient buffer of v; zeros if v did not influence the output.
  const Array& grad(Var v) const;
  const Shape& shape(Var v) const;

  Var find_input(const std::string& name) const;
  Var find_output(const std::string& name) const;
  /// Names and handles of differentiable inputs, in insertion order.
  std::vector<std::pair<std::string, Var>> inputs() const;

  bool evaluated() const { return evaluated_; }
  std::size_t size() const { return nodes_.size(); }
  Op op(Var v) const;

  /// When enabled, every evaluated value is checked for NaN/Inf.
  void set_checked(bool on) { checked_ = on; }

 private:
  struct Node {
    Op op = Op::kConstant;
    std::size_t a = Var::kNone;
    std::size_t b = Var::kNone;
    std::vector<std::size_t> parts;
    double scalar = 0.0;
    std::size_t index = 0;
    std::vector<int> labels;
    std::string name;
    Shape shape;
    Array value;
    Array aux;  // op-specific cache (softmax probabilities)
    Array grad;
    bool requires_grad = false;
    bool has_value = false;
  };

  Var push(Node node);
  const Node& at(Var v, const char* what) const;
  void evaluate(std::size_t id);
  void propagate(std::size_t id);
  Array& grad_buffer(std::size_t id);
  [[noreturn]] void shape_error(Op op, const std::string& detail) const;

  std::vector<Node> nodes_;
  std::map<std::string, std::size_t> input_index_;
  std::map<std::string, std::size_t> output_index_;
  mutable std::map<std::size_t, Array> zero_grads_;
  bool evaluated_ = true;
  bool checked_ = false;
  bool backward_done_ = false;
};

}  // namespace pnmn::ad
