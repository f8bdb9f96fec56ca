#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pnmn/constants.hpp"
#include "pnmn/graph.hpp"
#include "pnmn/lstm.hpp"
#include "pnmn/memory.hpp"
#include "pnmn/signal.hpp"

namespace pnmn {

enum class ModelKind { kPlasticNmn, kFixedNmn, kLstmBaseline };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct ModelConfig {
  ModelKind kind = ModelKind::kPlasticNmn;
  std::size_t input_dim = kBands;
  std::size_t steps = kChannels;
  std::size_t k = 80;
  std::size_t slots = 25;
  std::size_t classes = kClasses;
  double eta = 0.5;
  FixedOperand fixed_operand = FixedOperand::kEncoder;
};

/// Per-feature standardization fitted on training windows.
struct Normalizer {
  Array mean;
  Array scale;  // 1 / std, floored

  static Normalizer identity(std::size_t rows, std::size_t cols);
  static Normalizer fit(std::span<const Sample> samples);
  Array apply(const Array& features) const;
};

/// Stacked-LSTM encoder, optional external memory, dense softmax head.
struct Model {
  ModelConfig config;
  Encoder encoder;
  ControllerParams controllers;
  Array head_w;  // [k x classes]
  Array head_b;  // [1 x classes]
  MemoryState initial_memory;
  Normalizer normalizer;

  static Model create(const ModelConfig& config, std::uint64_t seed);

  bool has_memory() const { return config.kind != ModelKind::kLstmBaseline; }
  ControllerMode controller_mode() const {
    return config.kind == ModelKind::kFixedNmn ? ControllerMode::kLstm : ControllerMode::kPlastic;
  }
  MemoryState reset_state() const { return initial_memory; }

  /// Trainable parameters, in a fixed order.
  void for_each_param(const std::function<void(const std::string&, Array&)>& fn);
  void for_each_param(const std::function<void(const std::string&, const Array&)>& fn) const;
};

struct BoundModel {
  EncoderVars encoder;
  ControllerVars controllers;
  ad::Var head_w;
  ad::Var head_b;
  std::vector<std::pair<std::string, ad::Var>> params;
};

BoundModel bind_model(ad::Graph& g, const Model& model);

struct BatchResult {
  ad::Var logits;      // [batch x classes]
  ad::Var embeddings;  // [batch x k]: memory output for NMNs, top hidden state for the baseline
  MemoryState next_state;
};

/// Encodes a batch of standardized samples, then (for NMNs) feeds them through
/// the memory in order, starting from `state`.
BatchResult run_batch(ad::Graph& g, const Model& model, const BoundModel& bound,
                      std::span<const Array* const> inputs, const MemoryState& state);

}  // namespace pnmn
