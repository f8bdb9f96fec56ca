// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
//
//   acceptance [work_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "pnmn/checkpoint.hpp"
#include "pnmn/config.hpp"
#include "pnmn/dataset.hpp"
#include "pnmn/gradcheck.hpp"
#include "pnmn/memory.hpp"
#include "pnmn/metrics.hpp"
#include "pnmn/report.hpp"
#include "pnmn/signal.hpp"
#include "pnmn/synth.hpp"
#include "pnmn/train.hpp"

using namespace pnmn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& name, Outcome& o) {
  std::printf("%s %d %s:%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.str().c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

Array random_array(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Array a = Array::matrix(r, c);
  for (auto& v : a.values()) v = u(rng);
  return a;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

std::vector<Sample> features_of(const std::vector<RawRecording>& recs) {
  std::vector<Sample> out;
  for (const auto& r : recs) {
    for (auto& s : preprocess(r)) out.push_back(std::move(s));
  }
  return out;
}

// ---- 1. gradients -----------------------------------------------------------

double op_composition_check(Rng& rng, int trial, double step) {
  std::uniform_int_distribution<std::size_t> dim(1, 4);
  const std::size_t m = dim(rng), k = dim(rng), n = dim(rng);
  ad::Graph g;
  ad::Var a = g.input("a", random_array(rng, m, k));
  ad::Var b = g.input("b", random_array(rng, k, n));
  ad::Var r = g.input("r", random_array(rng, 1, n));
  ad::Var col = g.input("col", random_array(rng, m, 1));
  ad::Var mat = g.matmul(a, b);
  ad::Var t1 = g.tanh(g.add(mat, g.broadcast_rows(r, m)));
  ad::Var t2 = g.sigmoid(g.sub(mat, g.broadcast_cols(col, n)));
  ad::Var t3 = g.mul(t1, g.add_scalar(g.scale(t2, 1.5), -0.25));
  ad::Var sm = g.softmax_rows(t3);
  ad::Var picked = g.row(sm, static_cast<std::size_t>(trial) % m);
  ad::Var stacked = g.concat_rows(std::vector<ad::Var>{picked, t3});
  ad::Var logits = g.matmul(g.transpose(stacked), g.constant(random_array(rng, m + 1, 3)));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>((trial + i) % 3);
  ad::Var written = g.convex_write(t3, g.softmax_rows(g.transpose(col)), picked);
  ad::Var loss = g.add(g.softmax_cross_entropy(logits, labels), g.scale(g.sum(g.mul(t2, written)), 0.1));
  return ad::finite_difference_check(g, loss, step).max_relative_error;
}

double memory_step_check(Rng& rng, ControllerMode mode, FixedOperand operand, double step) {
  const std::size_t k = 3, l = 3;
  ControllerParams p = mode == ControllerMode::kLstm ? ControllerParams::lstm_random(k, rng)
                                                     : ControllerParams::plastic_random(k, 0.5, rng, operand);
  for (auto* proj : {&p.input, &p.output, &p.update}) {
    for (auto& v : proj->alpha.values()) v *= 40.0;
  }
  MemoryState s = MemoryState::initial(l, k, rng, 0.5);
  if (mode == ControllerMode::kPlastic) {
    s.hebb_input = random_array(rng, k, k);
    s.hebb_output = random_array(rng, k, k);
    s.hebb_update = random_array(rng, k, k);
  }
  ad::Graph g;
  auto vars = bind_controllers(g, p, "mem");
  auto gs = GraphMemoryState::attach(g, s, p.mode);
  ad::Var x1 = g.input("x1", random_array(rng, 1, k));
  ad::Var x2 = g.input("x2", random_array(rng, 1, k));
  memory_step(g, p, vars, gs, x1);
  auto out = memory_step(g, p, vars, gs, x2);
  ad::Var loss = g.softmax_cross_entropy(out.m, {static_cast<int>(rng() % k)});
  return ad::finite_difference_check(g, loss, step).max_relative_error;
}

double encoder_check(Rng& rng, double step) {
  auto enc = Encoder::random(3, 3, rng);
  Array s1 = random_array(rng, 4, 3, 2.0), s2 = random_array(rng, 4, 3, 2.0);
  ad::Graph g;
  auto vars = bind_encoder(g, enc, "enc");
  const Array* samples[] = {&s1, &s2};
  ad::Var z = encode_batch(g, vars, enc, samples);
  ad::Var loss = g.softmax_cross_entropy(z, {0, 2});
  return ad::finite_difference_check(g, loss, step).max_relative_error;
}

void criterion_gradients() {
  const auto t0 = Clock::now();
  Rng rng(101);
  const double step = 1e-5;
  double worst = 0.0;
  std::size_t instances = 0;
  for (int trial = 0; trial < 100; ++trial, ++instances) worst = std::max(worst, op_composition_check(rng, trial, step));
  for (int trial = 0; trial < 10; ++trial, instances += 3) {
    worst = std::max(worst, memory_step_check(rng, ControllerMode::kPlastic, FixedOperand::kEncoder, step));
    worst = std::max(worst, memory_step_check(rng, ControllerMode::kPlastic, FixedOperand::kOwn, step));
    worst = std::max(worst, memory_step_check(rng, ControllerMode::kLstm, FixedOperand::kEncoder, step));
  }
  for (int trial = 0; trial < 10; ++trial, ++instances) worst = std::max(worst, encoder_check(rng, step));
  const double secs = seconds_since(t0);
  Outcome o;
  o.detail << " instances=" << instances << " max_rel_err=" << worst << " runtime_s=" << secs;
  o.require(instances >= 100, "at least 100 instances");
  o.require(worst <= 1e-4, "max relative error <= 1e-4");
  o.require(secs <= 120.0, "runtime <= 2 min");
  report(1, "gradient suite", o);
}

// ---- 2. memory algebra ------------------------------------------------------

void criterion_memory_algebra() {
  const auto t0 = Clock::now();
  Rng rng(202);
  Outcome o;
  double worst_simplex = 0.0;
  bool positive = true, convex = true, onehot = true, fixed_point = true, plastic_off = true;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 1 + rng() % 8, l = 1 + rng() % 8;
    Array q = random_array(rng, 1, k, 1.0 + trial % 50);
    Array mem = random_array(rng, l, k, 3.0);
    Array z = attend(q, mem);
    double total = 0.0;
    for (double v : z.values()) total += v, positive = positive && v > 0.0;
    worst_simplex = std::max(worst_simplex, std::abs(total - 1.0));

    Array mu = random_array(rng, 1, k);
    Array next = memory_write(mem, z, mu);
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double lo = std::min(mem(i, j), mu[j]), hi = std::max(mem(i, j), mu[j]);
        convex = convex && next(i, j) >= lo && next(i, j) <= hi;
      }
    }
    const std::size_t slot = rng() % l;
    Array hot = Array::matrix(1, l);
    hot[slot] = 1.0;
    Array replaced = memory_write(mem, hot, mu);
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < k; ++j) onehot = onehot && replaced(i, j) == (i == slot ? mu[j] : mem(i, j));
    }

    // Hebb fixed point: post * (pre - post * H) = 0 when H = pre / post.
    const double post = 0.1 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng);
    const double pre = std::uniform_real_distribution<double>(-1, 1)(rng);
    Array h = Array::from_rows({{pre / post}});
    Array h2 = hebb_step(h, Array::from_rows({{pre}}), Array::from_rows({{post}}), 0.5);
    fixed_point = fixed_point && std::abs(h2[0] - h[0]) <= 1e-15 * std::max(1.0, std::abs(h[0]));
    Array zero = hebb_step(Array::from_rows({{0.3}}), Array::from_rows({{pre}}), Array::from_rows({{post}}), 0.0);
    fixed_point = fixed_point && zero[0] == 0.3;
  }
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng() % 6;
    ControllerParams p =
        ControllerParams::plastic_random(k, 0.0, rng, trial % 2 ? FixedOperand::kOwn : FixedOperand::kEncoder);
    for (auto* proj : {&p.input, &p.output, &p.update}) proj->alpha.fill(0.0);
    MemoryState s = MemoryState::initial(3, k, rng, 0.5);
    Array x = random_array(rng, 1, k);
    Array q = input_controller(p, x, s);
    for (std::size_t j = 0; j < k; ++j) {
      double a = 0.0;
      for (std::size_t i = 0; i < k; ++i) a += x[i] * p.input.w(i, j);
      plastic_off = plastic_off && std::abs(q[j] - std::tanh(a)) <= 1e-14;
    }
    auto r = memory_step(p, x, s);
    for (const Array* h : {&r.state.hebb_input, &r.state.hebb_output, &r.state.hebb_update}) {
      for (double v : h->values()) plastic_off = plastic_off && v == 0.0;
    }
  }
  const double secs = seconds_since(t0);
  o.detail << " max|sum z - 1|=" << worst_simplex << " runtime_s=" << secs;
  o.require(worst_simplex <= 1e-9 && positive, "attention simplex");
  o.require(onehot, "one-hot slot replacement");
  o.require(convex, "write convexity");
  o.require(fixed_point, "Hebb fixed points");
  o.require(plastic_off, "plastic-off equivalence");
  o.require(secs <= 60.0, "runtime <= 1 min");
  report(2, "memory algebra suite", o);
}

// ---- 3. oracle equivalence ----------------------------------------------------

using Vec = std::vector<double>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct OracleLstm {
  const LstmParams& p;
  Vec gate(const GateParams& g, const Vec& x, const Vec& h) const {
    Vec out(p.hidden);
    for (std::size_t j = 0; j < p.hidden; ++j) {
      long double s = g.bias(0, j);
      for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x[i]) * g.input_weights(i, j);
      for (std::size_t i = 0; i < h.size(); ++i) s += static_cast<long double>(h[i]) * g.recurrent_weights(i, j);
      out[j] = static_cast<double>(s);
    }
    return out;
  }
  Vec step(const Vec& x, const LstmState& s) const {
    const Vec h = s.h.values(), c = s.c.values();
    Vec i = gate(p.input_gate, x, h), f = gate(p.forget_gate, x, h), o = gate(p.output_gate, x, h),
        g = gate(p.candidate, x, h);
    Vec out(p.hidden);
    for (std::size_t j = 0; j < p.hidden; ++j) {
      const double cn = sigmoid(f[j]) * c[j] + sigmoid(i[j]) * std::tanh(g[j]);
      out[j] = sigmoid(o[j]) * std::tanh(cn);
    }
    return out;
  }
};

struct Oracle {
  const ControllerParams& p;

  Vec project(const PlasticProjection& proj, const Array& hebb, const Vec& fixed_in, const Vec& plastic_in) const {
    Vec y(p.dim);
    for (std::size_t j = 0; j < p.dim; ++j) {
      long double s = 0;
      for (std::size_t i = 0; i < p.dim; ++i) {
        s += static_cast<long double>(fixed_in[i]) * proj.w(i, j) +
             static_cast<long double>(plastic_in[i]) * proj.alpha(i, j) * hebb(i, j);
      }
      y[j] = std::tanh(static_cast<double>(s));
    }
    return y;
  }

  // Returns m_t and the new memory matrix.
  std::pair<Vec, Array> step(const Vec& x, const MemoryState& s) const {
    const std::size_t l = s.slots(), k = p.dim;
    const bool plastic = p.mode == ControllerMode::kPlastic;
    const bool enc = p.fixed_operand == FixedOperand::kEncoder;
    Vec q = plastic ? project(p.input, s.hebb_input, x, x) : OracleLstm{p.input_lstm}.step(x, s.input_lstm);
    Vec score(l), z(l), c(k, 0.0);
    double mx = -INFINITY, total = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
      long double d = 0;
      for (std::size_t j = 0; j < k; ++j) d += static_cast<long double>(s.memory(i, j)) * q[j];
      mx = std::max(mx, score[i] = static_cast<double>(d));
    }
    for (std::size_t i = 0; i < l; ++i) total += (z[i] = std::exp(score[i] - mx));
    for (auto& v : z) v /= total;
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < k; ++j) c[j] += z[i] * s.memory(i, j);
    }
    Vec m = plastic ? project(p.output, s.hebb_output, enc ? x : c, c) : OracleLstm{p.output_lstm}.step(c, s.output_lstm);
    Vec mu = plastic ? project(p.update, s.hebb_update, enc ? x : m, m) : OracleLstm{p.update_lstm}.step(m, s.update_lstm);
    Array next = s.memory;
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < k; ++j) next(i, j) = (1.0 - z[i]) * s.memory(i, j) + z[i] * mu[j];
    }
    return {m, next};
  }
};

void criterion_oracle() {
  Rng rng(303);
  Outcome o;
  double worst = 0.0;
  std::size_t states = 0;
  const std::pair<ControllerMode, FixedOperand> variants[] = {{ControllerMode::kPlastic, FixedOperand::kEncoder},
                                                              {ControllerMode::kPlastic, FixedOperand::kOwn},
                                                              {ControllerMode::kLstm, FixedOperand::kEncoder}};
  for (const auto& [mode, operand] : variants) {
    for (int trial = 0; trial < 1000; ++trial, ++states) {
      const std::size_t k = 2 + rng() % 9, l = 2 + rng() % 9;
      ControllerParams p = mode == ControllerMode::kLstm ? ControllerParams::lstm_random(k, rng)
                                                         : ControllerParams::plastic_random(k, 0.5, rng, operand);
      for (auto* proj : {&p.input, &p.output, &p.update}) {
        for (auto& v : proj->alpha.values()) v *= 50.0;
      }
      MemoryState s = MemoryState::initial(l, k, rng, 1.0);
      if (mode == ControllerMode::kPlastic) {
        s.hebb_input = random_array(rng, k, k);
        s.hebb_output = random_array(rng, k, k);
        s.hebb_update = random_array(rng, k, k);
      } else {
        for (LstmState* ls : {&s.input_lstm, &s.output_lstm, &s.update_lstm}) {
          ls->h = random_array(rng, 1, k);
          ls->c = random_array(rng, 1, k, 2.0);
        }
      }
      Array x = random_array(rng, 1, k, 2.0);
      auto got = memory_step(p, x, s);
      auto [m, next] = Oracle{p}.step(x.values(), s);
      for (std::size_t j = 0; j < k; ++j) worst = std::max(worst, std::abs(got.m[j] - m[j]));
      worst = std::max(worst, max_abs_diff(got.state.memory, next));
    }
  }
  o.detail << " states=" << states << " max_abs_diff=" << worst;
  o.require(worst <= 1e-12, "agreement to 1e-12");
  report(3, "oracle equivalence", o);
}

// ---- 4. preprocessing golden values ----------------------------------------

void criterion_preprocess(const fs::path& work) {
  Outcome o;
  const auto plan = plan_windows(2500, 250.0);
  std::vector<double> sine(250);
  for (std::size_t i = 0; i < 250; ++i) sine[i] = std::sin(2.0 * std::numbers::pi * 10.0 * i / 250.0);
  const auto bands = fft_bands(sine);
  double off_max = -INFINITY;
  for (std::size_t b = 0; b < 24; ++b) {
    if (b != 9) off_max = std::max(off_max, bands[b]);
  }
  SynthSettings settings;
  settings.target_windows = 600;
  auto run = [&](const fs::path& dir) {
    auto recs = synth_generate(settings.resolved_classes(), settings.resolved_counts(), 9, settings.options());
    write_raw_dataset(dir / "raw", recs);
    write_feature_dataset(dir / "feat", features_of(read_raw_dataset(dir / "raw")));
  };
  fs::remove_all(work / "pre_a");
  fs::remove_all(work / "pre_b");
  run(work / "pre_a");
  run(work / "pre_b");
  const bool identical = dir_contents(work / "pre_a") == dir_contents(work / "pre_b");
  const auto samples = read_feature_dataset(work / "pre_a" / "feat");
  const bool per_rec = !samples.empty() && samples.size() % 37 == 0;
  o.detail << " windows=" << plan.count << " band10=" << bands[9] << " off_band_max=" << off_max
           << " byte_identical=" << identical;
  o.require(plan.count == 37 && per_rec, "37 windows per 10 s recording");
  o.require(std::abs(bands[9] - 2.0969) <= 1e-3, "band-10 value");
  o.require(off_max <= -7.9, "off-band floor");
  o.require(identical, "byte-identical reruns");
  report(4, "preprocessing golden tests", o);
}

// ---- 5 and 8. synthetic end to end -------------------------------------------

struct Dataset {
  std::vector<Sample> samples;
};

std::vector<Sample> synthetic(const std::string& preset, std::uint64_t seed) {
  SynthSettings settings;
  settings.preset = preset;
  return features_of(synth_generate(settings.resolved_classes(), settings.resolved_counts(), seed, settings.options()));
}

TrainConfig accept_config(ModelKind kind, std::size_t epochs) {
  TrainConfig c;
  c.model = kind;
  c.epochs = epochs;
  c.baseline_epochs = epochs;
  c.seed = 1;
  return c;
}

void criterion_end_to_end_and_embedding() {
  const auto t0 = Clock::now();
  constexpr std::size_t kDefaultEpochs = 3, kHardNmnEpochs = 5, kHardBaselineEpochs = 15;

  const auto easy = synthetic("default", 11);
  auto easy_cv = cross_validate(accept_config(ModelKind::kPlasticNmn, kDefaultEpochs), easy);
  const double easy_f1 = easy_cv.report.mean_weighted_f1;
  std::printf("  default nmn: windows=%zu epochs=%zu mean_weighted_f1=%.4f (%.0f s)\n", easy.size(), kDefaultEpochs,
              easy_f1, seconds_since(t0));

  const auto hard = synthetic("hard", 12);
  auto hard_nmn = cross_validate(accept_config(ModelKind::kPlasticNmn, kHardNmnEpochs), hard).report;
  std::printf("  hard nmn: epochs=%zu mean_weighted_f1=%.4f (%.0f s)\n", kHardNmnEpochs, hard_nmn.mean_weighted_f1,
              seconds_since(t0));
  auto hard_base = cross_validate(accept_config(ModelKind::kLstmBaseline, kHardBaselineEpochs), hard).report;
  std::printf("  hard baseline: epochs=%zu mean_weighted_f1=%.4f (%.0f s)\n", kHardBaselineEpochs,
              hard_base.mean_weighted_f1, seconds_since(t0));
  const double margin = hard_nmn.mean_weighted_f1 - hard_base.mean_weighted_f1;
  const double secs = seconds_since(t0);

  Outcome o5;
  o5.detail << " default_f1=" << easy_f1 << " hard_nmn_f1=" << hard_nmn.mean_weighted_f1
            << " hard_baseline_f1=" << hard_base.mean_weighted_f1 << " margin=" << margin << " runtime_s=" << secs;
  o5.require(easy_f1 >= 0.95, "default weighted-F1 >= 0.95");
  o5.require(margin >= 0.02, "hard-variant margin >= 0.02");
  o5.require(secs <= 1800.0, "runtime <= 30 min");
  report(5, "synthetic end-to-end", o5);

  // Embedding separability on the fold-0 model's held-out windows.
  const auto& fold0 = easy_cv.report.folds.at(0);
  const auto test = gather(easy, fold0.test_indices);
  auto table = extract_embeddings(easy_cv.models.at(0), test, 500, 1);
  Array pts = Array::matrix(table.rows.size(), 2);
  std::vector<int> labels;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    pts(i, 0) = table.rows[i].pc1;
    pts(i, 1) = table.rows[i].pc2;
    labels.push_back(table.rows[i].label);
  }
  const double nc = nearest_centroid_accuracy(pts, labels, kClasses);
  Outcome o8;
  o8.detail << " rows=" << table.rows.size() << " nearest_centroid_accuracy=" << nc
            << " explained=" << table.pca.explained[0] << "," << table.pca.explained[1];
  o8.require(table.rows.size() == 500, "500 sampled rows");
  o8.require(nc >= 0.9, "nearest-centroid accuracy >= 0.9");
  report(8, "embedding export", o8);
}

// ---- 6. metrics -----------------------------------------------------------------

void criterion_metrics() {
  Outcome o;
  std::vector<int> labels{0, 0, 0, 1}, preds{0, 0, 0, 0};
  const double f1 = weighted_f1(preds, labels, 2);
  const auto pc = per_class_metrics(preds, labels, 2);
  const Array cm = confusion_matrix(preds, labels, 2);
  const std::vector<double> uniform(7, 0.0);
  const double ce = cross_entropy(uniform, 3);
  o.detail << " weighted_f1=" << format_double(f1) << " cross_entropy=" << format_double(ce);
  o.require(std::abs(f1 - 4.5 / 7.0) <= 1e-9 && std::abs(f1 - 0.642857) <= 1e-6, "weighted F1 0.642857");
  o.require(std::abs(pc[0].f1 - 6.0 / 7.0) <= 1e-9 && pc[1].f1 == 0.0, "per-class F1");
  o.require(std::abs(cm(0, 0) - 1.0) <= 1e-9 && std::abs(cm(0, 1)) <= 1e-9 && std::abs(cm(1, 0) - 1.0) <= 1e-9 &&
                std::abs(cm(1, 1)) <= 1e-9,
            "confusion matrix");
  o.require(std::abs(ce - std::log(7.0)) <= 1e-9, "cross entropy ln 7");
  report(6, "metric correctness", o);
}

// ---- 7. reproducibility ------------------------------------------------------------

void criterion_reproducibility(const fs::path& work) {
  Outcome o;
  SynthSettings settings;
  settings.target_windows = 1500;
  const auto samples =
      features_of(synth_generate(settings.resolved_classes(), settings.resolved_counts(), 21, settings.options()));
  TrainConfig cfg = accept_config(ModelKind::kPlasticNmn, 1);
  auto a = cross_validate(cfg, samples);
  auto b = cross_validate(cfg, samples);
  const std::string ja = to_json(a.report).dump(), jb = to_json(b.report).dump();

  const auto split = split_fold(stratified_folds(std::vector<int>([&] {
                                                   std::vector<int> l;
                                                   for (const auto& s : samples) l.push_back(s.label);
                                                   return l;
                                                 }()),
                                                 cfg.folds, cfg.seed),
                                0);
  const auto test = gather(samples, split.test);
  save_checkpoint(work / "ckpt", a.models[0], {{"fold", 0}});
  const Checkpoint ck = load_checkpoint(work / "ckpt");
  const auto before = infer(a.models[0], test);
  const auto after = infer(ck.model, test);
  std::vector<int> labels;
  for (const auto& s : test) labels.push_back(s.label);
  const double f_before = weighted_f1(before.predictions, labels, kClasses);
  const double f_after = weighted_f1(after.predictions, labels, kClasses);
  o.detail << " report_bytes=" << ja.size() << " fold0_f1=" << f_before << " reloaded_f1=" << f_after;
  o.require(ja == jb, "identical EvalReport JSON");
  o.require(f_before == a.report.folds[0].weighted_f1, "fold 0 metrics recomputed");
  o.require(before.logits == after.logits && f_before == f_after, "checkpoint round-trip exact");
  report(7, "reproducibility", o);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "pnmn_acceptance";
  fs::create_directories(work);
  try {
    criterion_gradients();
    criterion_memory_algebra();
    criterion_oracle();
    criterion_preprocess(work);
    criterion_metrics();
    criterion_reproducibility(work);
    criterion_end_to_end_and_embedding();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
