#include "pnmn/train.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "pnmn/graph.hpp"

namespace pnmn {

ModelConfig TrainConfig::model_config() const {
  ModelConfig m;
  m.kind = model;
  m.k = k;
  m.slots = slots;
  m.eta = eta;
  m.fixed_operand = fixed_operand;
  return m;
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw Error("config: lr must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw Error("config: betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw Error("config: eps must be positive");
  if (batch == 0 || k == 0 || slots == 0) throw Error("config: batch, k and slots must be positive");
  if (folds < 2) throw Error("config: folds must be at least 2");
  if (!(eta >= 0.0 && eta <= 1.0)) throw Error("config: eta must lie in [0, 1]");
}

// ---- Adam -------------------------------------------------------------------

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 std::uint64_t t, const TrainConfig& config) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw Error("adam_update: size mismatch");
  }
  if (t == 0) throw Error("adam_update: step counter starts at 1");
  const double b1 = config.beta1, b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = b1 * m[i] + (1.0 - b1) * g;
    v[i] = b2 * v[i] + (1.0 - b2) * g * g;
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    param[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
  }
}

namespace {

template <typename GradFn>
void adam_apply(Model& model, AdamState& state, const TrainConfig& config, const GradFn& grad_of) {
  ++state.t;
  model.for_each_param([&](const std::string& name, Array& p) {
    const Array* g = grad_of(name);
    if (!g) return;
    if (g->shape() != p.shape()) throw ShapeError("adam", 0, name + ": gradient " + to_string(g->shape()));
    auto [mit, fresh] = state.m.try_emplace(name, p.shape());
    auto vit = state.v.try_emplace(name, p.shape()).first;
    adam_update(p.data(), g->data(), mit->second.data(), vit->second.data(), state.t, config);
  });
}

}  // namespace

void adam_step(Model& model, const std::map<std::string, Array>& grads, AdamState& state, const TrainConfig& config) {
  adam_apply(model, state, config, [&](const std::string& name) -> const Array* {
    auto it = grads.find(name);
    return it == grads.end() ? nullptr : &it->second;
  });
}

// ---- Data handling ----------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(splitmix(a) ^ b) ^ c);
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error("stratified_folds: need at least two folds");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<std::size_t> assignment(labels.size());
  Rng rng(seed);
  for (auto& [label, idx] : by_class) {
    shuffle_indices(idx, rng);
    const std::size_t base = idx.size() / folds, extra = idx.size() % folds;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds; ++f) {
      const std::size_t len = base + (f < extra ? 1 : 0);
      for (std::size_t j = 0; j < len; ++j) assignment[idx[pos++]] = f;
    }
  }
  return assignment;
}

FoldSplit split_fold(std::span<const std::size_t> assignment, std::size_t fold) {
  FoldSplit s;
  for (std::size_t i = 0; i < assignment.size(); ++i) (assignment[i] == fold ? s.test : s.train).push_back(i);
  return s;
}

std::vector<Sample> gather(std::span<const Sample> samples, std::span<const std::size_t> idx) {
  std::vector<Sample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(samples[i]);
  return out;
}

// ---- Training and inference -------------------------------------------------

namespace {

std::vector<Array> standardized(const Model& model, std::span<const Sample> samples) {
  const Shape expected{model.config.steps, model.config.input_dim};
  std::vector<Array> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.features.shape() != expected) {
      throw ShapeError("sample", 0, "expected " + to_string(expected) + ", got " + to_string(s.features.shape()));
    }
    out.push_back(model.normalizer.apply(s.features));
  }
  return out;
}

void round_state(Model& model, AdamState& adam) {
  model.for_each_param([](const std::string&, Array& p) { p = round_to_float(p); });
  for (auto& [name, a] : adam.m) a = round_to_float(a);
  for (auto& [name, a] : adam.v) a = round_to_float(a);
}

}  // namespace

TrainResult train_fold(const TrainConfig& config, Model model, std::span<const Sample> train, std::size_t fold,
                       TrainResume resume, const EpochHook& hook) {
  config.validate();
  if (train.empty()) throw Error("train_fold: empty training set");
  if (resume.epoch == 0) model.normalizer = Normalizer::fit(train);
  const std::vector<Array> inputs = standardized(model, train);

  TrainResult result;
  result.loss_curve = std::move(resume.loss_curve);
  AdamState adam = std::move(resume.adam);
  const std::size_t epochs = config.epochs_for_model();
  for (std::size_t epoch = resume.epoch; epoch < epochs; ++epoch) {
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(config.seed, fold, epoch));
    shuffle_indices(order, rng);

    MemoryState state = model.reset_state();
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      std::vector<const Array*> batch;
      std::vector<int> labels;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&inputs[order[i]]);
        labels.push_back(train[order[i]].label);
      }
      ad::Graph g;
      const BoundModel bound = bind_model(g, model);
      BatchResult out = run_batch(g, model, bound, batch, state);
      const ad::Var loss = g.softmax_cross_entropy(out.logits, labels);
      const double value = g.value(loss)[0];
      if (!std::isfinite(value)) {
        throw DivergenceError("training diverged: non-finite loss at fold " + std::to_string(fold) + ", epoch " +
                              std::to_string(epoch + 1) + ", batch " + std::to_string(batches + 1));
      }
      g.backward(loss);
      adam_apply(model, adam, config, [&](const std::string& name) -> const Array* {
        const ad::Var v = g.find_input(name);
        return v.valid() ? &g.grad(v) : nullptr;
      });
      state = std::move(out.next_state);
      loss_sum += value;
      ++batches;
    }
    round_state(model, adam);
    result.loss_curve.push_back(loss_sum / static_cast<double>(batches));
    if (hook.on_epoch) hook.on_epoch(model, adam, epoch + 1, result.loss_curve);
  }
  result.model = std::move(model);
  result.adam = std::move(adam);
  return result;
}

Inference infer(const Model& model, std::span<const Sample> samples, std::size_t batch) {
  if (batch == 0) throw Error("infer: batch must be positive");
  const std::vector<Array> inputs = standardized(model, samples);
  Inference out;
  out.logits = Array::matrix(samples.size(), model.config.classes);
  out.embeddings = Array::matrix(samples.size(), model.config.k);
  MemoryState state = model.reset_state();
  for (std::size_t start = 0; start < samples.size(); start += batch) {
    const std::size_t end = std::min(samples.size(), start + batch);
    std::vector<const Array*> ptrs;
    for (std::size_t i = start; i < end; ++i) ptrs.push_back(&inputs[i]);
    ad::Graph g;
    const BoundModel bound = bind_model(g, model);
    BatchResult r = run_batch(g, model, bound, ptrs, state);
    const Array& logits = g.value(r.logits);
    const Array& emb = g.value(r.embeddings);
    std::copy(logits.values().begin(), logits.values().end(),
              out.logits.values().begin() + static_cast<std::ptrdiff_t>(start * model.config.classes));
    std::copy(emb.values().begin(), emb.values().end(),
              out.embeddings.values().begin() + static_cast<std::ptrdiff_t>(start * model.config.k));
    state = std::move(r.next_state);
  }
  out.predictions = argmax_rows(out.logits);
  return out;
}

// ---- Cross validation and reporting ----------------------------------------

EvalReport summarize(const std::string& model, std::vector<FoldReport> folds, std::span<const Sample> samples,
                     std::size_t classes) {
  EvalReport r;
  r.model = model;
  std::vector<int> preds, labels;
  double total = 0.0;
  for (const auto& f : folds) {
    total += f.weighted_f1;
    for (std::size_t i = 0; i < f.test_indices.size(); ++i) {
      preds.push_back(f.predictions[i]);
      labels.push_back(samples[f.test_indices[i]].label);
    }
  }
  r.mean_weighted_f1 = folds.empty() ? 0.0 : total / static_cast<double>(folds.size());
  if (!labels.empty()) {
    r.per_class = per_class_metrics(preds, labels, classes);
    r.confusion = confusion_matrix(preds, labels, classes);
  }
  r.folds = std::move(folds);
  return r;
}

CrossValidation cross_validate(const TrainConfig& config, std::span<const Sample> samples,
                               std::vector<std::size_t> folds, const FoldHooks& hooks) {
  config.validate();
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  const std::vector<std::size_t> assignment = stratified_folds(labels, config.folds, config.seed);
  if (folds.empty()) {
    folds.resize(config.folds);
    std::iota(folds.begin(), folds.end(), 0);
  }
  for (std::size_t f : folds) {
    if (f >= config.folds) throw Error("fold " + std::to_string(f) + " out of range");
  }

  std::vector<FoldReport> reports(folds.size());
  std::vector<Model> models(folds.size());
  std::vector<std::exception_ptr> errors(folds.size());
  const auto count = static_cast<std::ptrdiff_t>(folds.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      const std::size_t fold = folds[i];
      const FoldSplit split = split_fold(assignment, fold);
      const std::vector<Sample> train = gather(samples, split.train);
      const std::vector<Sample> test = gather(samples, split.test);
      Model model = Model::create(config.model_config(), mix_seed(config.seed, fold, 0x5eed));
      TrainResume resume;
      if (hooks.resume) {
        if (auto saved = hooks.resume(fold)) {
          model = std::move(saved->first);
          resume = std::move(saved->second);
        }
      }
      EpochHook hook;
      if (hooks.on_epoch) {
        hook.on_epoch = [&](const Model& m, const AdamState& a, std::size_t epoch, const std::vector<double>& curve) {
          hooks.on_epoch(fold, m, a, epoch, curve);
        };
      }
      TrainResult trained = train_fold(config, std::move(model), train, fold, std::move(resume), hook);
      const Inference inf = infer(trained.model, test, config.batch);
      std::vector<int> test_labels;
      for (const auto& s : test) test_labels.push_back(s.label);
      FoldReport& rep = reports[i];
      rep.fold = fold;
      rep.loss_curve = trained.loss_curve;
      rep.test_indices = split.test;
      rep.predictions = inf.predictions;
      rep.weighted_f1 = weighted_f1(inf.predictions, test_labels, trained.model.config.classes);
      rep.accuracy = accuracy(inf.predictions, test_labels);
      models[i] = std::move(trained.model);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  CrossValidation cv;
  cv.report = summarize(to_string(config.model), std::move(reports), samples, config.model_config().classes);
  cv.models = std::move(models);
  return cv;
}

// ---- Embeddings -------------------------------------------------------------

EmbeddingTable extract_embeddings(const Model& model, std::span<const Sample> samples, std::size_t n,
                                  std::uint64_t seed) {
  if (samples.size() < 2) throw Error("extract_embeddings: need at least two samples");
  const Inference inf = infer(model, samples);
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  EmbeddingTable table;
  if (n >= samples.size()) {
    table.truncated = n > samples.size();
  } else {
    Rng rng(seed);
    shuffle_indices(idx, rng);
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
  }
  const std::size_t k = model.config.k;
  Array chosen = Array::matrix(idx.size(), k);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t j = 0; j < k; ++j) chosen(r, j) = inf.embeddings(idx[r], j);
  }
  table.pca = pca_top2(chosen);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    table.rows.push_back({idx[r], samples[idx[r]].label, table.pca.coordinates(r, 0), table.pca.coordinates(r, 1)});
  }
  return table;
}

double nearest_centroid_accuracy(const Array& points, std::span<const int> labels, std::size_t classes) {
  if (points.rows() != labels.size() || labels.empty()) throw Error("nearest_centroid_accuracy: size mismatch");
  const std::size_t d = points.cols();
  Array centroid = Array::matrix(classes, d);
  std::vector<std::size_t> count(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++count[labels[i]];
    for (std::size_t j = 0; j < d; ++j) centroid(labels[i], j) += points(i, j);
  }
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t j = 0; j < d; ++j)
      if (count[c]) centroid(c, j) /= static_cast<double>(count[c]);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double best = INFINITY;
    int arg = -1;
    for (std::size_t c = 0; c < classes; ++c) {
      if (!count[c]) continue;
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = points(i, j) - centroid(c, j);
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        arg = static_cast<int>(c);
      }
    }
    hit += arg == labels[i];
  }
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

}  // namespace pnmn
