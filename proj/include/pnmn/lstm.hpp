#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <string>

#include "pnmn/array.hpp"
#include "pnmn/graph.hpp"

namespace pnmn {

using Rng = std::mt19937_64;

/// Weights for one LSTM gate: input [in x h], recurrent [h x h], bias [1 x h].
struct GateParams {
  Array input_weights;
  Array recurrent_weights;
  Array bias;
};

struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  GateParams input_gate;
  GateParams forget_gate;
  GateParams output_gate;
  GateParams candidate;

  static LstmParams zeros(std::size_t input_dim, std::size_t hidden);
  /// Uniform in +-1/sqrt(input_dim + hidden), forget-gate bias 1. Values are
  /// representable as float so checkpoints round-trip exactly.
  static LstmParams random(std::size_t input_dim, std::size_t hidden, Rng& rng);

  /// Throws ShapeError/Error if any array disagrees with input_dim/hidden or is non-finite.
  void validate() const;

  void for_each(const std::string& prefix,
                const std::function<void(const std::string&, Array&)>& fn);
  void for_each(const std::string& prefix,
                const std::function<void(const std::string&, const Array&)>& fn) const;
};

/// Hidden and cell activations, each [batch x hidden].
struct LstmState {
  Array h;
  Array c;
  static LstmState zeros(std::size_t hidden, std::size_t batch = 1);
};

/// One LSTM step on plain arrays (input [batch x input_dim] or rank-1).
LstmState lstm_cell_step(const LstmParams& params, const LstmState& state, const Array& input);

// Graph-level building blocks.

struct GateVars {
  ad::Var input_weights, recurrent_weights, bias;
};

struct LstmVars {
  GateVars input_gate, forget_gate, output_gate, candidate;
};

struct LstmStateVars {
  ad::Var h, c;
};

/// Registers every LSTM parameter as a differentiable graph input named
/// "<prefix>.<gate>.<W|U|b>".
LstmVars bind_lstm(ad::Graph& g, const LstmParams& params, const std::string& prefix);

/// i, f, o = sigmoid(...), g = tanh(...), c' = f*c + i*g, h' = o*tanh(c').
LstmStateVars lstm_step(ad::Graph& g, const LstmVars& p, const LstmStateVars& state, ad::Var input);

/// Two stacked LSTM layers; the rows of a sample are the time steps.
struct Encoder {
  LstmParams lower;
  LstmParams upper;

  static Encoder zeros(std::size_t input_dim, std::size_t hidden);
  static Encoder random(std::size_t input_dim, std::size_t hidden, Rng& rng);
  std::size_t output_dim() const { return upper.hidden; }

  void for_each(const std::string& prefix,
                const std::function<void(const std::string&, Array&)>& fn);
  void for_each(const std::string& prefix,
                const std::function<void(const std::string&, const Array&)>& fn) const;
};

struct EncoderVars {
  LstmVars lower, upper;
};

EncoderVars bind_encoder(ad::Graph& g, const Encoder& enc, const std::string& prefix);

/// Runs a batch of [steps x features] samples through both layers from a zero
/// state and returns the top layer's final hidden state, [batch x hidden].
ad::Var encode_batch(ad::Graph& g, const EncoderVars& vars, const Encoder& enc,
                     std::span<const Array* const> samples);

/// Single-sample convenience wrapper; returns a [1 x hidden] array.
Array encode_sample(const Encoder& enc, const Array& sample);

}  // namespace pnmn
