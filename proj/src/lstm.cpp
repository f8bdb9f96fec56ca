#include "pnmn/lstm.hpp"

#include <cmath>
#include <vector>

#include "pnmn/constants.hpp"

namespace pnmn {

namespace {

Array uniform(Shape shape, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Array a(std::move(shape));
  for (auto& v : a.values()) v = static_cast<float>(dist(rng));
  return a;
}

GateParams zero_gate(std::size_t in, std::size_t h) {
  return {Array::matrix(in, h), Array::matrix(h, h), Array::matrix(1, h)};
}

GateParams random_gate(std::size_t in, std::size_t h, double bound, Rng& rng) {
  return {uniform({in, h}, bound, rng), uniform({h, h}, bound, rng), Array::matrix(1, h)};
}

void check_gate(const GateParams& g, std::size_t in, std::size_t h, const char* name) {
  auto expect = [&](const Array& a, Shape s, const char* what) {
    if (a.shape() != s) {
      throw ShapeError(std::string("lstm.") + name + "." + what, 0,
                       "expected " + to_string(s) + ", got " + to_string(a.shape()));
    }
    if (!a.all_finite()) throw Error(std::string("lstm.") + name + "." + what + " is not finite");
  };
  expect(g.input_weights, {in, h}, "W");
  expect(g.recurrent_weights, {h, h}, "U");
  expect(g.bias, {1, h}, "b");
}

template <typename Params, typename Fn>
void visit_gates(Params& p, const std::string& prefix, const Fn& fn) {
  auto gate = [&](auto& g, const char* name) {
    fn(prefix + "." + name + ".W", g.input_weights);
    fn(prefix + "." + name + ".U", g.recurrent_weights);
    fn(prefix + "." + name + ".b", g.bias);
  };
  gate(p.input_gate, "i");
  gate(p.forget_gate, "f");
  gate(p.output_gate, "o");
  gate(p.candidate, "g");
}

}  // namespace

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  p.input_gate = zero_gate(input_dim, hidden);
  p.forget_gate = zero_gate(input_dim, hidden);
  p.output_gate = zero_gate(input_dim, hidden);
  p.candidate = zero_gate(input_dim, hidden);
  return p;
}

LstmParams LstmParams::random(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim + hidden));
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  p.input_gate = random_gate(input_dim, hidden, bound, rng);
  p.forget_gate = random_gate(input_dim, hidden, bound, rng);
  p.output_gate = random_gate(input_dim, hidden, bound, rng);
  p.candidate = random_gate(input_dim, hidden, bound, rng);
  p.forget_gate.bias.fill(1.0);
  return p;
}

void LstmParams::validate() const {
  check_gate(input_gate, input_dim, hidden, "i");
  check_gate(forget_gate, input_dim, hidden, "f");
  check_gate(output_gate, input_dim, hidden, "o");
  check_gate(candidate, input_dim, hidden, "g");
}

void LstmParams::for_each(const std::string& prefix,
                          const std::function<void(const std::string&, Array&)>& fn) {
  visit_gates(*this, prefix, fn);
}

void LstmParams::for_each(const std::string& prefix,
                          const std::function<void(const std::string&, const Array&)>& fn) const {
  visit_gates(*this, prefix, fn);
}

LstmState LstmState::zeros(std::size_t hidden, std::size_t batch) {
  return {Array::matrix(batch, hidden), Array::matrix(batch, hidden)};
}

LstmVars bind_lstm(ad::Graph& g, const LstmParams& params, const std::string& prefix) {
  params.validate();
  auto gate = [&](const GateParams& p, const char* name) {
    const std::string base = prefix + "." + name;
    return GateVars{g.input(base + ".W", p.input_weights), g.input(base + ".U", p.recurrent_weights),
                    g.input(base + ".b", p.bias)};
  };
  LstmVars v;
  v.input_gate = gate(params.input_gate, "i");
  v.forget_gate = gate(params.forget_gate, "f");
  v.output_gate = gate(params.output_gate, "o");
  v.candidate = gate(params.candidate, "g");
  return v;
}

LstmStateVars lstm_step(ad::Graph& g, const LstmVars& p, const LstmStateVars& state, ad::Var input) {
  const std::size_t batch = g.shape(input)[0];
  auto pre = [&](const GateVars& gate) {
    ad::Var wx = g.matmul(input, gate.input_weights);
    ad::Var uh = g.matmul(state.h, gate.recurrent_weights);
    return g.add(g.add(wx, uh), g.broadcast_rows(gate.bias, batch));
  };
  ad::Var i = g.sigmoid(pre(p.input_gate));
  ad::Var f = g.sigmoid(pre(p.forget_gate));
  ad::Var o = g.sigmoid(pre(p.output_gate));
  ad::Var cand = g.tanh(pre(p.candidate));
  ad::Var c = g.add(g.mul(f, state.c), g.mul(i, cand));
  ad::Var h = g.mul(o, g.tanh(c));
  return {h, c};
}

LstmState lstm_cell_step(const LstmParams& params, const LstmState& state, const Array& input) {
  ad::Graph g;
  const LstmVars p = bind_lstm(g, params, "cell");
  ad::Var x = g.constant(input);
  if (g.shape(x)[1] != params.input_dim) {
    throw ShapeError("lstm_cell_step", 0,
                     "input " + to_string(g.shape(x)) + " for input_dim " + std::to_string(params.input_dim));
  }
  const std::size_t batch = g.shape(x)[0];
  if (state.h.shape() != Shape{batch, params.hidden} || state.c.shape() != Shape{batch, params.hidden}) {
    throw ShapeError("lstm_cell_step", 0,
                     "state " + to_string(state.h.shape()) + "/" + to_string(state.c.shape()) +
                         " for batch " + std::to_string(batch) + ", hidden " + std::to_string(params.hidden));
  }
  const LstmStateVars next = lstm_step(g, p, {g.constant(state.h), g.constant(state.c)}, x);
  return {g.value(next.h), g.value(next.c)};
}

Encoder Encoder::zeros(std::size_t input_dim, std::size_t hidden) {
  return {LstmParams::zeros(input_dim, hidden), LstmParams::zeros(hidden, hidden)};
}

Encoder Encoder::random(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  Encoder e;
  e.lower = LstmParams::random(input_dim, hidden, rng);
  e.upper = LstmParams::random(hidden, hidden, rng);
  return e;
}

void Encoder::for_each(const std::string& prefix,
                       const std::function<void(const std::string&, Array&)>& fn) {
  lower.for_each(prefix + ".lower", fn);
  upper.for_each(prefix + ".upper", fn);
}

void Encoder::for_each(const std::string& prefix,
                       const std::function<void(const std::string&, const Array&)>& fn) const {
  lower.for_each(prefix + ".lower", fn);
  upper.for_each(prefix + ".upper", fn);
}

EncoderVars bind_encoder(ad::Graph& g, const Encoder& enc, const std::string& prefix) {
  if (enc.upper.input_dim != enc.lower.hidden) {
    throw ShapeError("encoder", 0,
                     "upper input_dim " + std::to_string(enc.upper.input_dim) + " vs lower hidden " +
                         std::to_string(enc.lower.hidden));
  }
  return {bind_lstm(g, enc.lower, prefix + ".lower"), bind_lstm(g, enc.upper, prefix + ".upper")};
}

ad::Var encode_batch(ad::Graph& g, const EncoderVars& vars, const Encoder& enc,
                     std::span<const Array* const> samples) {
  if (samples.empty()) throw Error("encode_batch: empty batch");
  const Shape step_shape = samples[0]->shape();
  if (step_shape.size() != 2 || step_shape[1] != enc.lower.input_dim) {
    throw ShapeError("encode_batch", 0,
                     "sample " + to_string(step_shape) + " for input_dim " + std::to_string(enc.lower.input_dim));
  }
  const std::size_t steps = step_shape[0];
  const std::size_t features = step_shape[1];
  const std::size_t batch = samples.size();
  for (const Array* s : samples) {
    if (s->shape() != step_shape) {
      throw ShapeError("encode_batch", 0, "sample " + to_string(s->shape()) + " vs " + to_string(step_shape));
    }
  }

  LstmStateVars lower{g.constant(Array::matrix(batch, enc.lower.hidden)),
                      g.constant(Array::matrix(batch, enc.lower.hidden))};
  LstmStateVars upper{g.constant(Array::matrix(batch, enc.upper.hidden)),
                      g.constant(Array::matrix(batch, enc.upper.hidden))};
  for (std::size_t t = 0; t < steps; ++t) {
    Array x = Array::matrix(batch, features);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t f = 0; f < features; ++f) x(b, f) = (*samples[b])(t, f);
    }
    lower = lstm_step(g, vars.lower, lower, g.constant(std::move(x)));
    upper = lstm_step(g, vars.upper, upper, lower.h);
  }
  return upper.h;
}

Array encode_sample(const Encoder& enc, const Array& sample) {
  if (sample.rank() != 2 || sample.rows() == 0 || sample.cols() != enc.lower.input_dim) {
    throw ShapeError("encode_sample", 0,
                     "expected [steps x " + std::to_string(enc.lower.input_dim) + "], got " +
                         to_string(sample.shape()));
  }
  ad::Graph g;
  const EncoderVars vars = bind_encoder(g, enc, "encoder");
  const Array* one[] = {&sample};
  return g.value(encode_batch(g, vars, enc, one));
}

}  // namespace pnmn
