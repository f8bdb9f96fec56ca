#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pnmn/gradcheck.hpp"
#include "pnmn/signal.hpp"
#include "pnmn/synth.hpp"
#include "pnmn/train.hpp"

using namespace pnmn;

namespace {

std::vector<Sample> toy_samples(std::size_t classes, std::size_t per_class, double noise, std::uint64_t seed,
                                double seconds = 2.0) {
  auto specs = default_class_specs();
  specs.resize(classes);
  for (auto& s : specs) s.noise = noise;
  auto recs = synth_generate(specs, std::vector<std::size_t>(classes, per_class), seed, {seconds, 250.0});
  std::vector<Sample> out;
  for (const auto& r : recs) {
    for (auto& s : preprocess(r)) out.push_back(std::move(s));
  }
  return out;
}

TrainConfig small_config(ModelKind kind, std::size_t epochs) {
  TrainConfig c;
  c.model = kind;
  c.k = 8;
  c.slots = 4;
  c.batch = 8;
  c.epochs = epochs;
  c.baseline_epochs = epochs;
  c.lr = 1e-2;
  c.seed = 3;
  return c;
}

std::vector<double> flat_params(const Model& m) {
  std::vector<double> out;
  m.for_each_param([&](const std::string&, const Array& a) { out.insert(out.end(), a.values().begin(), a.values().end()); });
  return out;
}

class AllKinds : public ::testing::TestWithParam<ModelKind> {};

}  // namespace

TEST(ModelKindNames, RoundTrip) {
  for (ModelKind k : {ModelKind::kPlasticNmn, ModelKind::kFixedNmn, ModelKind::kLstmBaseline}) {
    EXPECT_EQ(parse_model_kind(to_string(k)), k);
  }
  EXPECT_EQ(to_string(ModelKind::kPlasticNmn), "plastic-nmn");
  EXPECT_EQ(to_string(ModelKind::kFixedNmn), "nmn-fixed");
  EXPECT_EQ(to_string(ModelKind::kLstmBaseline), "lstm-baseline");
  EXPECT_THROW(parse_model_kind("rcnn"), Error);
}

TEST(Model, DefaultsAndEmbeddingWidth) {
  TrainConfig cfg;
  EXPECT_EQ(cfg.k, 80u);
  EXPECT_EQ(cfg.slots, 25u);
  EXPECT_EQ(cfg.batch, 32u);
  EXPECT_EQ(cfg.epochs, 50u);
  EXPECT_EQ(cfg.baseline_epochs, 150u);
  EXPECT_DOUBLE_EQ(cfg.lr, 1e-3);
  EXPECT_DOUBLE_EQ(cfg.eta, 0.5);
  Model m = Model::create(cfg.model_config(), 1);
  auto samples = toy_samples(2, 1, 1.0, 1, 1.0);
  auto inf = infer(m, samples);
  EXPECT_EQ(inf.embeddings.shape(), (Shape{samples.size(), 80}));
  EXPECT_EQ(inf.logits.shape(), (Shape{samples.size(), 7}));
}

TEST(Normalizer, StandardizesTrainingFeatures) {
  auto samples = toy_samples(3, 2, 1.0, 2);
  Normalizer n = Normalizer::fit(samples);
  std::vector<double> mean(20 * 24, 0.0), sq(20 * 24, 0.0);
  for (const auto& s : samples) {
    Array z = n.apply(s.features);
    for (std::size_t i = 0; i < z.size(); ++i) mean[i] += z[i], sq[i] += z[i] * z[i];
  }
  for (std::size_t i = 0; i < mean.size(); ++i) {
    mean[i] /= samples.size();
    // statistics are stored at float precision
    EXPECT_NEAR(mean[i], 0.0, 1e-6);
    EXPECT_NEAR(sq[i] / samples.size() - mean[i] * mean[i], 1.0, 1e-6);
  }
}

TEST_P(AllKinds, ZeroLearningRateLeavesParametersBitIdentical) {
  auto samples = toy_samples(2, 1, 1.0, 4);
  TrainConfig cfg = small_config(GetParam(), 2);
  cfg.lr = 0.0;
  Model m = Model::create(cfg.model_config(), 9);
  auto before = flat_params(m);
  auto result = train_fold(cfg, m, samples, 0);
  EXPECT_EQ(flat_params(result.model), before);
  EXPECT_EQ(result.loss_curve.size(), 2u);
}

TEST_P(AllKinds, LossDecreasesOnSyntheticData) {
  auto samples = toy_samples(3, 2, 1.0, 5);
  TrainConfig cfg = small_config(GetParam(), 6);
  auto result = train_fold(cfg, Model::create(cfg.model_config(), 1), samples, 0);
  ASSERT_EQ(result.loss_curve.size(), 6u);
  EXPECT_LT(result.loss_curve.back(), result.loss_curve.front());
}

TEST_P(AllKinds, SeededTrainingIsDeterministic) {
  auto samples = toy_samples(2, 2, 1.0, 6);
  TrainConfig cfg = small_config(GetParam(), 2);
  auto a = train_fold(cfg, Model::create(cfg.model_config(), 1), samples, 0);
  auto b = train_fold(cfg, Model::create(cfg.model_config(), 1), samples, 0);
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  EXPECT_EQ(flat_params(a.model), flat_params(b.model));
}

TEST_P(AllKinds, BatchGradientsMatchFiniteDifferences) {
  auto samples = toy_samples(3, 1, 1.0, 7, 1.0);
  TrainConfig cfg = small_config(GetParam(), 1);
  cfg.k = 3;
  cfg.slots = 2;
  Model m = Model::create(cfg.model_config(), 2);
  m.normalizer = Normalizer::fit(samples);
  std::vector<Array> inputs;
  std::vector<int> labels;
  for (const auto& s : samples) inputs.push_back(m.normalizer.apply(s.features)), labels.push_back(s.label);
  std::vector<const Array*> ptrs;
  for (const auto& a : inputs) ptrs.push_back(&a);
  ad::Graph g;
  auto bound = bind_model(g, m);
  auto out = run_batch(g, m, bound, ptrs, m.reset_state());
  ad::Var loss = g.softmax_cross_entropy(out.logits, labels);
  // Encoder weights are exercised by the LSTM tests; here check the memory and head.
  std::vector<std::string> names;
  for (const auto& [name, v] : bound.params) {
    if (name.rfind("encoder", 0) != 0) names.push_back(name);
  }
  ASSERT_FALSE(names.empty());
  auto r = ad::finite_difference_check(g, loss, 1e-6, names);
  EXPECT_LE(r.max_relative_error, 1e-4) << r.worst_input;
}

INSTANTIATE_TEST_SUITE_P(Kinds, AllKinds,
                         ::testing::Values(ModelKind::kPlasticNmn, ModelKind::kFixedNmn, ModelKind::kLstmBaseline),
                         [](const auto& info) {
                           std::string s = to_string(info.param);
                           std::erase(s, '-');
                           return s;
                         });

TEST(Train, TwoClassNoiseFreeToyIsLearned) {
  auto samples = toy_samples(2, 4, 0.0, 8);
  TrainConfig cfg = small_config(ModelKind::kPlasticNmn, 10);
  auto result = train_fold(cfg, Model::create(cfg.model_config(), 1), samples, 0);
  auto inf = infer(result.model, samples);
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  EXPECT_GE(accuracy(inf.predictions, labels), 0.99);
}

TEST(Train, DivergenceIsReported) {
  auto samples = toy_samples(2, 1, 1.0, 9);
  TrainConfig cfg = small_config(ModelKind::kLstmBaseline, 1);
  Model m = Model::create(cfg.model_config(), 1);
  m.head_b[0] = std::nan("");
  EXPECT_THROW(train_fold(cfg, m, samples, 0), DivergenceError);
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.folds = 1;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.eta = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.batch = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Train, InferenceIsOrderDeterministic) {
  auto samples = toy_samples(2, 2, 1.0, 10);
  TrainConfig cfg = small_config(ModelKind::kPlasticNmn, 1);
  Model m = Model::create(cfg.model_config(), 1);
  m.normalizer = Normalizer::fit(samples);
  auto a = infer(m, samples);
  auto b = infer(m, samples, 5);
  EXPECT_EQ(a.logits, b.logits);  // batch size does not change the memory sequence
  EXPECT_EQ(a.predictions, b.predictions);
}

TEST(CrossValidation, EveryFoldEvaluatedOnce) {
  auto samples = toy_samples(3, 2, 1.0, 11);
  TrainConfig cfg = small_config(ModelKind::kLstmBaseline, 1);
  auto cv = cross_validate(cfg, samples);
  ASSERT_EQ(cv.report.folds.size(), 5u);
  std::set<std::size_t> seen;
  double mean = 0.0;
  for (const auto& f : cv.report.folds) {
    for (auto i : f.test_indices) EXPECT_TRUE(seen.insert(i).second);
    mean += f.weighted_f1;
  }
  EXPECT_EQ(seen.size(), samples.size());
  EXPECT_NEAR(cv.report.mean_weighted_f1, mean / 5.0, 1e-12);
  for (std::size_t r = 0; r < 7; ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < 7; ++c) row += cv.report.confusion(r, c);
    if (cv.report.per_class[r].support > 0) {
      EXPECT_NEAR(row, 1.0, 1e-9);
    }
  }
  auto one = cross_validate(cfg, samples, {2});
  ASSERT_EQ(one.report.folds.size(), 1u);
  EXPECT_EQ(one.report.folds[0].fold, 2u);
  EXPECT_EQ(one.report.folds[0].predictions, cv.report.folds[2].predictions);
}

TEST(Embeddings, SampledRowsAndTruncation) {
  auto samples = toy_samples(3, 2, 1.0, 12);
  TrainConfig cfg = small_config(ModelKind::kPlasticNmn, 1);
  Model m = Model::create(cfg.model_config(), 1);
  m.normalizer = Normalizer::fit(samples);
  auto t = extract_embeddings(m, samples, 20, 5);
  EXPECT_EQ(t.rows.size(), 20u);
  EXPECT_FALSE(t.truncated);
  std::set<std::size_t> ids;
  for (const auto& r : t.rows) {
    EXPECT_TRUE(ids.insert(r.sample).second);
    EXPECT_EQ(r.label, samples[r.sample].label);
  }
  auto again = extract_embeddings(m, samples, 20, 5);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(again.rows[i].sample, t.rows[i].sample);
    EXPECT_EQ(again.rows[i].pc1, t.rows[i].pc1);
  }
  auto all = extract_embeddings(m, samples, samples.size() + 10, 5);
  EXPECT_TRUE(all.truncated);
  EXPECT_EQ(all.rows.size(), samples.size());
}
