#include "pnmn/memory.hpp"

#include <cmath>

namespace pnmn {

namespace {

Array as_row(const Array& v) {
  if (v.rank() == 1) return v.reshaped({1, v.size()});
  if (v.rank() == 2 && v.rows() == 1) return v;
  throw ShapeError("vector", 0, "expected a vector, got " + to_string(v.shape()));
}

Array uniform_float(Shape shape, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Array a(std::move(shape));
  for (auto& v : a.values()) v = static_cast<float>(dist(rng));
  return a;
}

void expect_shape(const Array& a, const Shape& s, const std::string& what) {
  if (a.shape() != s) throw ShapeError(what, 0, "expected " + to_string(s) + ", got " + to_string(a.shape()));
  if (!a.all_finite()) throw Error(what + " is not finite");
}

ad::Var project(ad::Graph& g, const ProjectionVars& p, const Array& hebb, ad::Var x) {
  ad::Var effective = g.add(p.w, g.mul(p.alpha, g.constant(hebb)));
  return g.tanh(g.matmul(x, effective));
}

ad::Var project(ad::Graph& g, const ProjectionVars& p, const Array& hebb, ad::Var fixed_in, ad::Var plastic_in) {
  if (fixed_in.id == plastic_in.id) return project(g, p, hebb, fixed_in);
  ad::Var plastic = g.mul(p.alpha, g.constant(hebb));
  return g.tanh(g.add(g.matmul(fixed_in, p.w), g.matmul(plastic_in, plastic)));
}

void check_projection(const PlasticProjection& p, const Array& hebb) {
  if (p.alpha.shape() != p.w.shape() || hebb.shape() != p.w.shape()) {
    throw ShapeError("plastic_projection", 0,
                     "w " + to_string(p.w.shape()) + ", alpha " + to_string(p.alpha.shape()) + ", hebb " +
                         to_string(hebb.shape()));
  }
}

template <typename Self, typename Fn>
void visit_controllers(Self& self, const std::string& prefix, const Fn& fn) {
  if (self.mode == ControllerMode::kPlastic) {
    fn(prefix + ".input.w", self.input.w);
    fn(prefix + ".input.alpha", self.input.alpha);
    fn(prefix + ".output.w", self.output.w);
    fn(prefix + ".output.alpha", self.output.alpha);
    fn(prefix + ".update.w", self.update.w);
    fn(prefix + ".update.alpha", self.update.alpha);
  } else {
    self.input_lstm.for_each(prefix + ".input", fn);
    self.output_lstm.for_each(prefix + ".output", fn);
    self.update_lstm.for_each(prefix + ".update", fn);
  }
}

}  // namespace

std::string to_string(FixedOperand operand) { return operand == FixedOperand::kEncoder ? "encoder" : "own"; }

FixedOperand parse_fixed_operand(const std::string& name) {
  if (name == "encoder") return FixedOperand::kEncoder;
  if (name == "own") return FixedOperand::kOwn;
  throw Error("unknown fixed operand '" + name + "' (expected encoder or own)");
}

ControllerParams ControllerParams::plastic_zeros(std::size_t k, double eta, FixedOperand operand) {
  ControllerParams p;
  p.mode = ControllerMode::kPlastic;
  p.fixed_operand = operand;
  p.dim = k;
  p.eta = eta;
  p.input = {Array::matrix(k, k), Array::matrix(k, k)};
  p.output = p.input;
  p.update = p.input;
  return p;
}

ControllerParams ControllerParams::plastic_random(std::size_t k, double eta, Rng& rng, FixedOperand operand) {
  ControllerParams p = plastic_zeros(k, eta, operand);
  const double bound = 1.0 / std::sqrt(static_cast<double>(k));
  for (PlasticProjection* proj : {&p.input, &p.output, &p.update}) {
    proj->w = uniform_float({k, k}, bound, rng);
    proj->alpha = uniform_float({k, k}, 0.01, rng);
  }
  return p;
}

ControllerParams ControllerParams::lstm_random(std::size_t k, Rng& rng) {
  ControllerParams p;
  p.mode = ControllerMode::kLstm;
  p.dim = k;
  p.eta = 0.0;
  p.input_lstm = LstmParams::random(k, k, rng);
  p.output_lstm = LstmParams::random(k, k, rng);
  p.update_lstm = LstmParams::random(k, k, rng);
  return p;
}

void ControllerParams::validate() const {
  if (!(eta >= 0.0 && eta <= 1.0)) throw Error("plasticity rate eta must lie in [0, 1]");
  if (mode == ControllerMode::kPlastic) {
    for (const PlasticProjection* proj : {&input, &output, &update}) {
      expect_shape(proj->w, {dim, dim}, "controller w");
      expect_shape(proj->alpha, {dim, dim}, "controller alpha");
    }
  } else {
    for (const LstmParams* l : {&input_lstm, &output_lstm, &update_lstm}) {
      if (l->input_dim != dim || l->hidden != dim) throw ShapeError("controller lstm", 0, "width mismatch");
      l->validate();
    }
  }
}

void ControllerParams::for_each(const std::string& prefix,
                                const std::function<void(const std::string&, Array&)>& fn) {
  visit_controllers(*this, prefix, fn);
}

void ControllerParams::for_each(const std::string& prefix,
                                const std::function<void(const std::string&, const Array&)>& fn) const {
  visit_controllers(*this, prefix, fn);
}

MemoryState MemoryState::zeros(std::size_t slots, std::size_t k) {
  MemoryState s;
  s.memory = Array::matrix(slots, k);
  s.hebb_input = Array::matrix(k, k);
  s.hebb_output = Array::matrix(k, k);
  s.hebb_update = Array::matrix(k, k);
  s.input_lstm = LstmState::zeros(k);
  s.output_lstm = LstmState::zeros(k);
  s.update_lstm = LstmState::zeros(k);
  return s;
}

MemoryState MemoryState::initial(std::size_t slots, std::size_t k, Rng& rng, double scale) {
  MemoryState s = zeros(slots, k);
  s.memory = uniform_float({slots, k}, scale, rng);
  return s;
}

void MemoryState::validate() const {
  const std::size_t k = dim();
  if (memory.rank() != 2 || slots() == 0 || k == 0) throw ShapeError("memory", 0, "empty memory matrix");
  expect_shape(memory, {slots(), k}, "memory");
  expect_shape(hebb_input, {k, k}, "hebb_input");
  expect_shape(hebb_output, {k, k}, "hebb_output");
  expect_shape(hebb_update, {k, k}, "hebb_update");
}

Array plastic_projection(const PlasticProjection& p, const Array& hebb, const Array& x) {
  ad::Graph g;
  ad::Var xv = g.constant(as_row(x));
  ad::Var w = g.constant(p.w);
  check_projection(p, hebb);
  return g.value(project(g, {w, g.constant(p.alpha)}, hebb, xv));
}

Array plastic_projection(const PlasticProjection& p, const Array& hebb, const Array& fixed_in,
                         const Array& plastic_in) {
  ad::Graph g;
  ad::Var fv = g.constant(as_row(fixed_in));
  ad::Var pv = g.constant(as_row(plastic_in));
  check_projection(p, hebb);
  return g.value(project(g, {g.constant(p.w), g.constant(p.alpha)}, hebb, fv, pv));
}

namespace {

Array lstm_controller(const LstmParams& p, const LstmState& s, const Array& x) {
  return lstm_cell_step(p, s, as_row(x)).h;
}

}  // namespace

Array input_controller(const ControllerParams& params, const Array& x, const MemoryState& state) {
  if (params.mode == ControllerMode::kPlastic) return plastic_projection(params.input, state.hebb_input, x);
  return lstm_controller(params.input_lstm, state.input_lstm, x);
}

namespace {

const Array& fixed_input(const ControllerParams& params, const Array& own, const Array& x) {
  if (params.fixed_operand == FixedOperand::kOwn) return own;
  if (x.size() == 0) throw Error("controller reads the encoder output but none was given");
  return x;
}

}  // namespace

Array output_controller(const ControllerParams& params, const Array& c, const MemoryState& state, const Array& x) {
  if (params.mode == ControllerMode::kPlastic) {
    return plastic_projection(params.output, state.hebb_output, fixed_input(params, c, x), c);
  }
  return lstm_controller(params.output_lstm, state.output_lstm, c);
}

Array update_controller(const ControllerParams& params, const Array& m, const MemoryState& state, const Array& x) {
  if (params.mode == ControllerMode::kPlastic) {
    return plastic_projection(params.update, state.hebb_update, fixed_input(params, m, x), m);
  }
  return lstm_controller(params.update_lstm, state.update_lstm, m);
}

Array attend(const Array& q, const Array& memory) {
  ad::Graph g;
  ad::Var qv = g.constant(as_row(q));
  ad::Var mv = g.constant(memory);
  return g.value(g.softmax_rows(g.matmul(qv, g.transpose(mv))));
}

Array read(const Array& z, const Array& memory) {
  ad::Graph g;
  return g.value(g.matmul(g.constant(as_row(z)), g.constant(memory)));
}

namespace {

void check_simplex(const Array& z) {
  double total = 0.0;
  for (double v : z.values()) {
    if (!(v >= -1e-6)) throw Error("attention weights are not on the simplex (negative entry)");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw Error("attention weights are not on the simplex (sum " + std::to_string(total) + ")");
  }
}

ad::Var write_node(ad::Graph& g, ad::Var memory, ad::Var z, ad::Var m_update) {
  return g.convex_write(memory, z, m_update);
}

}  // namespace

Array memory_write(const Array& memory, const Array& z, const Array& m_update) {
  const Array zr = as_row(z);
  check_simplex(zr);
  ad::Graph g;
  ad::Var mv = g.constant(memory);
  if (zr.cols() != g.shape(mv)[0]) {
    throw ShapeError("memory_write", 0, "z " + to_string(zr.shape()) + " for memory " + to_string(memory.shape()));
  }
  return g.value(write_node(g, mv, g.constant(zr), g.constant(as_row(m_update))));
}

void hebb_step_inplace(Array& hebb, std::span<const double> pre, std::span<const double> post, double eta) {
  if (hebb.shape() != Shape{pre.size(), post.size()}) {
    throw ShapeError("hebb_step", 0,
                     "trace " + to_string(hebb.shape()) + " for pre " + std::to_string(pre.size()) + ", post " +
                         std::to_string(post.size()));
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw Error("hebb_step: eta must lie in [0, 1]");
  if (eta == 0.0) return;
  const std::size_t cols = post.size();
  for (std::size_t i = 0; i < pre.size(); ++i) {
    double* row = hebb.values().data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += eta * post[j] * (pre[i] - post[j] * row[j]);
  }
}

Array hebb_step(const Array& hebb, const Array& pre, const Array& post, double eta) {
  Array out = hebb;
  hebb_step_inplace(out, pre.data(), post.data(), eta);
  return out;
}

ControllerVars bind_controllers(ad::Graph& g, const ControllerParams& params, const std::string& prefix) {
  params.validate();
  ControllerVars v;
  if (params.mode == ControllerMode::kPlastic) {
    auto bind = [&](const PlasticProjection& p, const char* name) {
      return ProjectionVars{g.input(prefix + "." + name + ".w", p.w),
                            g.input(prefix + "." + name + ".alpha", p.alpha)};
    };
    v.input = bind(params.input, "input");
    v.output = bind(params.output, "output");
    v.update = bind(params.update, "update");
  } else {
    v.input_lstm = bind_lstm(g, params.input_lstm, prefix + ".input");
    v.output_lstm = bind_lstm(g, params.output_lstm, prefix + ".output");
    v.update_lstm = bind_lstm(g, params.update_lstm, prefix + ".update");
  }
  return v;
}

GraphMemoryState GraphMemoryState::attach(ad::Graph& g, const MemoryState& state, ControllerMode mode) {
  state.validate();
  GraphMemoryState s;
  s.memory = g.constant(state.memory);
  if (mode == ControllerMode::kPlastic) {
    s.hebb_input = state.hebb_input;
    s.hebb_output = state.hebb_output;
    s.hebb_update = state.hebb_update;
  } else {
    auto lstm = [&](const LstmState& ls) { return LstmStateVars{g.constant(ls.h), g.constant(ls.c)}; };
    s.input_lstm = lstm(state.input_lstm);
    s.output_lstm = lstm(state.output_lstm);
    s.update_lstm = lstm(state.update_lstm);
  }
  return s;
}

MemoryState GraphMemoryState::snapshot(const ad::Graph& g, ControllerMode mode) const {
  const Array& mem = g.value(memory);
  MemoryState s = MemoryState::zeros(mem.rows(), mem.cols());
  s.memory = mem;
  if (mode == ControllerMode::kPlastic) {
    s.hebb_input = hebb_input;
    s.hebb_output = hebb_output;
    s.hebb_update = hebb_update;
  } else {
    auto lstm = [&](const LstmStateVars& v) { return LstmState{g.value(v.h), g.value(v.c)}; };
    s.input_lstm = lstm(input_lstm);
    s.output_lstm = lstm(output_lstm);
    s.update_lstm = lstm(update_lstm);
  }
  return s;
}

MemoryStepVars memory_step(ad::Graph& g, const ControllerParams& params, const ControllerVars& vars,
                           GraphMemoryState& state, ad::Var x) {
  if (!g.evaluated()) throw Error("memory_step needs an evaluated graph (traces depend on values)");
  const std::size_t k = params.dim;
  if (g.shape(x) != Shape{1, k}) {
    throw ShapeError("memory_step", g.size(), "input " + to_string(g.shape(x)) + " for k=" + std::to_string(k));
  }
  if (g.shape(state.memory)[1] != k) {
    throw ShapeError("memory_step", g.size(), "memory " + to_string(g.shape(state.memory)) + " for k=" + std::to_string(k));
  }
  MemoryStepVars out;
  const bool plastic = params.mode == ControllerMode::kPlastic;
  if (plastic) {
    out.q = project(g, vars.input, state.hebb_input, x);
  } else {
    state.input_lstm = lstm_step(g, vars.input_lstm, state.input_lstm, x);
    out.q = state.input_lstm.h;
  }
  out.z = g.softmax_rows(g.matmul(out.q, g.transpose(state.memory)));
  out.c = g.matmul(out.z, state.memory);
  if (plastic) {
    const bool from_encoder = params.fixed_operand == FixedOperand::kEncoder;
    out.m = project(g, vars.output, state.hebb_output, from_encoder ? x : out.c, out.c);
    out.m_update = project(g, vars.update, state.hebb_update, from_encoder ? x : out.m, out.m);
  } else {
    state.output_lstm = lstm_step(g, vars.output_lstm, state.output_lstm, out.c);
    out.m = state.output_lstm.h;
    state.update_lstm = lstm_step(g, vars.update_lstm, state.update_lstm, out.m);
    out.m_update = state.update_lstm.h;
  }
  state.memory = write_node(g, state.memory, out.z, out.m_update);
  if (plastic) {
    hebb_step_inplace(state.hebb_input, g.value(x).data(), g.value(out.q).data(), params.eta);
    hebb_step_inplace(state.hebb_output, g.value(out.c).data(), g.value(out.m).data(), params.eta);
    hebb_step_inplace(state.hebb_update, g.value(out.m).data(), g.value(out.m_update).data(), params.eta);
  }
  return out;
}

MemoryStepResult memory_step(const ControllerParams& params, const Array& x, const MemoryState& state) {
  ad::Graph g;
  const ControllerVars vars = bind_controllers(g, params, "controller");
  GraphMemoryState gs = GraphMemoryState::attach(g, state, params.mode);
  const MemoryStepVars out = memory_step(g, params, vars, gs, g.constant(as_row(x)));
  return {g.value(out.m), gs.snapshot(g, params.mode)};
}

}  // namespace pnmn
