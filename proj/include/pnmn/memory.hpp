#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "pnmn/array.hpp"
#include "pnmn/graph.hpp"
#include "pnmn/lstm.hpp"

namespace pnmn {

enum class ControllerMode { kPlastic, kLstm };

/// What the fixed-weight term of the plastic output and update controllers
/// reads. kEncoder: the encoder output x_t (the plastic term still reads c_t or
/// m_t). kOwn: the controller's own input for both terms.
enum class FixedOperand { kEncoder, kOwn };

std::string to_string(FixedOperand operand);
FixedOperand parse_fixed_operand(const std::string& name);

/// y = tanh(x (w + alpha * hebb)), with w and alpha [in x out].
struct PlasticProjection {
  Array w;
  Array alpha;
};

/// Parameters of the input, output and update controllers. Exactly one mode
/// is active; the other mode's members are left empty.
struct ControllerParams {
  ControllerMode mode = ControllerMode::kPlastic;
  FixedOperand fixed_operand = FixedOperand::kEncoder;  // plastic mode only
  std::size_t dim = 0;
  double eta = 0.5;

  PlasticProjection input;
  PlasticProjection output;
  PlasticProjection update;

  LstmParams input_lstm;
  LstmParams output_lstm;
  LstmParams update_lstm;

  static ControllerParams plastic_zeros(std::size_t k, double eta, FixedOperand operand = FixedOperand::kEncoder);
  /// w uniform in +-1/sqrt(k), alpha uniform in +-0.01.
  static ControllerParams plastic_random(std::size_t k, double eta, Rng& rng,
                                         FixedOperand operand = FixedOperand::kEncoder);
  static ControllerParams lstm_random(std::size_t k, Rng& rng);

  void validate() const;

  void for_each(const std::string& prefix, const std::function<void(const std::string&, Array&)>& fn);
  void for_each(const std::string& prefix,
                const std::function<void(const std::string&, const Array&)>& fn) const;
};

/// Memory matrix [slots x k] plus the state the controllers carry between
/// steps: Hebbian traces [k x k] in plastic mode, LSTM states in LSTM mode.
struct MemoryState {
  Array memory;
  Array hebb_input;
  Array hebb_output;
  Array hebb_update;
  LstmState input_lstm;
  LstmState output_lstm;
  LstmState update_lstm;

  static MemoryState zeros(std::size_t slots, std::size_t k);
  /// Memory uniform in +-scale (float-representable), traces and LSTM states zero.
  static MemoryState initial(std::size_t slots, std::size_t k, Rng& rng, double scale = 0.05);

  std::size_t slots() const { return memory.rows(); }
  std::size_t dim() const { return memory.cols(); }
  void validate() const;
};

// Plain-array operations. Vectors are accepted as rank-1 or [1 x n] and
// returned as [1 x n].

Array plastic_projection(const PlasticProjection& p, const Array& hebb, const Array& x);
/// tanh(fixed_in w + plastic_in (alpha * hebb)).
Array plastic_projection(const PlasticProjection& p, const Array& hebb, const Array& fixed_in,
                         const Array& plastic_in);
Array input_controller(const ControllerParams& params, const Array& x, const MemoryState& state);
/// `x` is the step's encoder output; it is required when a plastic
/// controller's fixed term reads the encoder and ignored otherwise.
Array output_controller(const ControllerParams& params, const Array& c, const MemoryState& state,
                        const Array& x = {});
Array update_controller(const ControllerParams& params, const Array& m, const MemoryState& state,
                        const Array& x = {});
/// softmax(memory . q) over slots.
Array attend(const Array& q, const Array& memory);
/// Convex combination of memory rows weighted by z.
Array read(const Array& z, const Array& memory);
/// Row i becomes (1 - z[i]) * memory[i] + z[i] * m_update. z must lie on the
/// simplex within 1e-6.
Array memory_write(const Array& memory, const Array& z, const Array& m_update);
/// hebb'[i][j] = hebb[i][j] + eta * post[j] * (pre[i] - post[j] * hebb[i][j]).
Array hebb_step(const Array& hebb, const Array& pre, const Array& post, double eta);
/// In-place variant used on the training hot path.
void hebb_step_inplace(Array& hebb, std::span<const double> pre, std::span<const double> post, double eta);

struct MemoryStepResult {
  Array m;
  MemoryState state;
};

/// input controller -> attend -> read -> output controller -> update
/// controller -> write -> trace updates.
MemoryStepResult memory_step(const ControllerParams& params, const Array& x, const MemoryState& state);

// Graph-level building blocks.

struct ProjectionVars {
  ad::Var w, alpha;
};

struct ControllerVars {
  ProjectionVars input, output, update;
  LstmVars input_lstm, output_lstm, update_lstm;
};

ControllerVars bind_controllers(ad::Graph& g, const ControllerParams& params, const std::string& prefix);

/// Memory state threaded through a graph. The memory matrix and LSTM states
/// are nodes (gradients flow through them); traces are plain values captured
/// as constants, so they never receive gradients.
struct GraphMemoryState {
  ad::Var memory;
  Array hebb_input;
  Array hebb_output;
  Array hebb_update;
  LstmStateVars input_lstm;
  LstmStateVars output_lstm;
  LstmStateVars update_lstm;

  static GraphMemoryState attach(ad::Graph& g, const MemoryState& state, ControllerMode mode);
  /// Values of the current nodes, detached from the graph.
  MemoryState snapshot(const ad::Graph& g, ControllerMode mode) const;
};

struct MemoryStepVars {
  ad::Var q, z, c, m, m_update;
};

/// Records one memory step for the [1 x k] input x and advances `state`.
/// Trace updates use the values computed while recording.
MemoryStepVars memory_step(ad::Graph& g, const ControllerParams& params, const ControllerVars& vars,
                           GraphMemoryState& state, ad::Var x);

}  // namespace pnmn
