#include "pnmn/model.hpp"

#include <cmath>

namespace pnmn {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kPlasticNmn: return "plastic-nmn";
    case ModelKind::kFixedNmn: return "nmn-fixed";
    case ModelKind::kLstmBaseline: return "lstm-baseline";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "plastic-nmn") return ModelKind::kPlasticNmn;
  if (name == "nmn-fixed") return ModelKind::kFixedNmn;
  if (name == "lstm-baseline") return ModelKind::kLstmBaseline;
  throw Error("unknown model '" + name + "' (expected plastic-nmn, nmn-fixed or lstm-baseline)");
}

Normalizer Normalizer::identity(std::size_t rows, std::size_t cols) {
  return {Array::matrix(rows, cols, 0.0), Array::matrix(rows, cols, 1.0)};
}

Normalizer Normalizer::fit(std::span<const Sample> samples) {
  if (samples.empty()) throw Error("Normalizer::fit: no samples");
  const Shape shape = samples.front().features.shape();
  Array mean(shape), sq(shape);
  for (const auto& s : samples) {
    if (s.features.shape() != shape) throw ShapeError("normalizer", 0, "inconsistent sample shapes");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += s.features[i];
  }
  const double n = static_cast<double>(samples.size());
  for (auto& v : mean.values()) v /= n;
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < sq.size(); ++i) {
      const double d = s.features[i] - mean[i];
      sq[i] += d * d;
    }
  }
  Array scale(shape);
  for (std::size_t i = 0; i < scale.size(); ++i) scale[i] = 1.0 / std::max(std::sqrt(sq[i] / n), 1e-6);
  return {round_to_float(mean), round_to_float(scale)};
}

Array Normalizer::apply(const Array& features) const {
  if (features.shape() != mean.shape()) {
    throw ShapeError("normalize", 0, to_string(features.shape()) + " vs " + to_string(mean.shape()));
  }
  Array out = features;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - mean[i]) * scale[i];
  return out;
}

Model Model::create(const ModelConfig& config, std::uint64_t seed) {
  if (config.k == 0 || config.slots == 0 || config.classes < 2) throw Error("model: invalid dimensions");
  Rng rng(seed);
  Model m;
  m.config = config;
  m.encoder = Encoder::random(config.input_dim, config.k, rng);
  if (config.kind == ModelKind::kPlasticNmn) {
    m.controllers = ControllerParams::plastic_random(config.k, config.eta, rng, config.fixed_operand);
  } else if (config.kind == ModelKind::kFixedNmn) {
    m.controllers = ControllerParams::lstm_random(config.k, rng);
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.k));
  std::uniform_real_distribution<double> dist(-bound, bound);
  m.head_w = Array::matrix(config.k, config.classes);
  for (auto& v : m.head_w.values()) v = static_cast<float>(dist(rng));
  m.head_b = Array::matrix(1, config.classes);
  m.initial_memory = MemoryState::initial(config.slots, config.k, rng);
  m.normalizer = Normalizer::identity(config.steps, config.input_dim);
  return m;
}

void Model::for_each_param(const std::function<void(const std::string&, Array&)>& fn) {
  encoder.for_each("encoder", fn);
  if (has_memory()) controllers.for_each("controller", fn);
  fn("head.w", head_w);
  fn("head.b", head_b);
}

void Model::for_each_param(const std::function<void(const std::string&, const Array&)>& fn) const {
  encoder.for_each("encoder", fn);
  if (has_memory()) controllers.for_each("controller", fn);
  fn("head.w", head_w);
  fn("head.b", head_b);
}

BoundModel bind_model(ad::Graph& g, const Model& model) {
  BoundModel b;
  b.encoder = bind_encoder(g, model.encoder, "encoder");
  if (model.has_memory()) b.controllers = bind_controllers(g, model.controllers, "controller");
  b.head_w = g.input("head.w", model.head_w);
  b.head_b = g.input("head.b", model.head_b);
  b.params = g.inputs();
  return b;
}

BatchResult run_batch(ad::Graph& g, const Model& model, const BoundModel& bound,
                      std::span<const Array* const> inputs, const MemoryState& state) {
  BatchResult r;
  ad::Var encoded = encode_batch(g, bound.encoder, model.encoder, inputs);
  if (model.has_memory()) {
    GraphMemoryState gs = GraphMemoryState::attach(g, state, model.controller_mode());
    std::vector<ad::Var> outputs;
    outputs.reserve(inputs.size());
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      const MemoryStepVars step = memory_step(g, model.controllers, bound.controllers, gs, g.row(encoded, t));
      outputs.push_back(step.m);
    }
    r.embeddings = g.concat_rows(outputs);
    r.next_state = gs.snapshot(g, model.controller_mode());
  } else {
    r.embeddings = encoded;
    r.next_state = state;
  }
  const std::size_t batch = inputs.size();
  r.logits = g.add(g.matmul(r.embeddings, bound.head_w), g.broadcast_rows(bound.head_b, batch));
  return r;
}

}  // namespace pnmn
