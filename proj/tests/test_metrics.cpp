#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "pnmn/metrics.hpp"
#include "pnmn/pca.hpp"
#include "pnmn/train.hpp"

using namespace pnmn;

TEST(CrossEntropy, KnownValues) {
  std::vector<double> uniform(7, 0.3);
  for (int c = 0; c < 7; ++c) EXPECT_NEAR(cross_entropy(uniform, c), std::log(7.0), 1e-9);
  EXPECT_NEAR(cross_entropy(uniform, 0), 1.945910, 1e-6);
  std::vector<double> two{2, 0, 0, 0, 0, 0, 0};
  EXPECT_NEAR(cross_entropy(two, 0), std::log(std::exp(2.0) + 6.0) - 2.0, 1e-12);
  EXPECT_NEAR(cross_entropy(two, 0), 0.594438, 1e-6);
}

TEST(CrossEntropy, RaisingTrueLogitLowersLoss) {
  std::vector<double> logits{0.1, -0.4, 0.7};
  double prev = cross_entropy(logits, 1);
  for (int i = 0; i < 50; ++i) {
    logits[1] += 0.5;
    const double now = cross_entropy(logits, 1);
    EXPECT_LT(now, prev);
    prev = now;
  }
  logits[1] = 800.0;
  EXPECT_TRUE(std::isfinite(cross_entropy(logits, 0)));
}

TEST(WeightedF1, WorkedTwoClassExample) {
  std::vector<int> labels{0, 0, 0, 1}, preds{0, 0, 0, 0};
  auto pc = per_class_metrics(preds, labels, 2);
  EXPECT_NEAR(pc[0].precision, 0.75, 1e-12);
  EXPECT_NEAR(pc[0].recall, 1.0, 1e-12);
  EXPECT_NEAR(pc[0].f1, 6.0 / 7.0, 1e-9);
  EXPECT_NEAR(pc[0].f1, 0.857143, 1e-6);
  EXPECT_EQ(pc[1].f1, 0.0);
  EXPECT_EQ(pc[0].support, 3u);
  EXPECT_EQ(pc[1].support, 1u);
  EXPECT_NEAR(weighted_f1(preds, labels, 2), 0.642857, 1e-6);
  EXPECT_NEAR(weighted_f1(preds, labels, 2), 4.5 / 7.0, 1e-9);
  EXPECT_DOUBLE_EQ(weighted_f1(labels, labels, 2), 1.0);
}

TEST(WeightedF1, InvariantToConsistentRelabelling) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> cls(0, 6);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> labels(200), preds(200);
    for (auto& v : labels) v = cls(rng);
    for (std::size_t i = 0; i < preds.size(); ++i) preds[i] = (rng() % 3 == 0) ? cls(rng) : labels[i];
    std::vector<int> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> pl(200), pp(200);
    for (std::size_t i = 0; i < 200; ++i) pl[i] = perm[labels[i]], pp[i] = perm[preds[i]];
    const double f = weighted_f1(preds, labels, 7);
    EXPECT_NEAR(weighted_f1(pp, pl, 7), f, 1e-12);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(Confusion, WorkedExampleAndShapes) {
  std::vector<int> labels{0, 0, 0, 1}, preds{0, 0, 0, 0};
  Array cm = confusion_matrix(preds, labels, 2);
  EXPECT_NEAR(cm(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(cm(0, 1), 0.0, 1e-9);
  EXPECT_NEAR(cm(1, 0), 1.0, 1e-9);
  EXPECT_NEAR(cm(1, 1), 0.0, 1e-9);
  Array counts = confusion_counts(preds, labels, 2);
  EXPECT_EQ(counts, Array::from_rows({{3, 0}, {1, 0}}));

  std::vector<int> perfect{0, 1, 2, 2, 1};
  Array id = confusion_matrix(perfect, perfect, 3);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(id(r, c), r == c ? 1.0 : 0.0);
  }
  std::vector<int> all_two(5, 2);
  Array col = confusion_matrix(all_two, perfect, 4);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(col(r, c), (c == 2 && r < 3) ? 1.0 : 0.0);
  }
  EXPECT_THROW(confusion_matrix(std::vector<int>{7}, std::vector<int>{0}, 7), Error);
}

// Uniform random predictions: each cell within 3 binomial standard deviations.
TEST(Confusion, UniformPredictionsBinomialBound) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> cls(0, 6);
  const std::size_t n = 70000;
  std::vector<int> labels(n), preds(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = cls(rng), preds[i] = cls(rng);
  Array cm = confusion_matrix(preds, labels, 7);
  Array counts = confusion_counts(preds, labels, 7);
  for (std::size_t r = 0; r < 7; ++r) {
    double row_n = 0.0, row_sum = 0.0;
    for (std::size_t c = 0; c < 7; ++c) row_n += counts(r, c), row_sum += cm(r, c);
    EXPECT_NEAR(row_sum, 1.0, 1e-9);
    const double sigma = std::sqrt((1.0 / 7.0) * (6.0 / 7.0) / row_n);
    for (std::size_t c = 0; c < 7; ++c) EXPECT_NEAR(cm(r, c), 1.0 / 7.0, 3.0 * sigma);
  }
}

TEST(Metrics, AccuracyAndArgmax) {
  EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{1, 2, 3, 4}, std::vector<int>{1, 2, 0, 4}), 0.75);
  Array s = Array::from_rows({{0.1, 0.5, 0.2}, {3, -1, 2}});
  EXPECT_EQ(argmax_rows(s), (std::vector<int>{1, 0}));
}

TEST(Folds, BalancedSizes) {
  std::vector<int> ten(10, 0);
  auto a = stratified_folds(ten, 5, 3);
  std::vector<int> sizes(5, 0);
  for (auto f : a) ++sizes[f];
  EXPECT_EQ(sizes, (std::vector<int>{2, 2, 2, 2, 2}));

  std::vector<int> seven(7, 4);
  auto b = stratified_folds(seven, 5, 3);
  std::vector<int> s7(5, 0);
  for (auto f : b) ++s7[f];
  EXPECT_EQ(s7, (std::vector<int>{2, 2, 1, 1, 1}));
  EXPECT_EQ(stratified_folds(seven, 5, 3), b);
}

TEST(Folds, ExactPartitionProperty) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> cls(0, 6);
  for (int t = 0; t < 20; ++t) {
    std::vector<int> labels(100 + t * 13);
    for (auto& v : labels) v = cls(rng);
    auto assign = stratified_folds(labels, 5, t);
    std::vector<int> seen(labels.size(), 0);
    std::map<int, std::vector<int>> per_class;
    for (std::size_t f = 0; f < 5; ++f) {
      auto split = split_fold(assign, f);
      EXPECT_EQ(split.train.size() + split.test.size(), labels.size());
      for (auto i : split.test) ++seen[i];
    }
    for (int v : seen) EXPECT_EQ(v, 1);
    for (int c = 0; c < 7; ++c) {
      std::vector<int> sizes(5, 0);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == c) ++sizes[assign[i]];
      }
      auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      EXPECT_LE(*hi - *lo, 1);
    }
  }
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  TrainConfig cfg;
  std::vector<double> p{1.0, -2.0, 0.5}, g{0.3, -4.0, 0.0}, m(3, 0.0), v(3, 0.0);
  adam_update(p, g, m, v, 1, cfg);
  EXPECT_NEAR(p[0], 1.0 - 1e-3 * 0.3 / (0.3 + 1e-8), 1e-15);
  EXPECT_NEAR(p[1], -2.0 + 1e-3 * 4.0 / (4.0 + 1e-8), 1e-15);
  EXPECT_EQ(p[2], 0.5);
}

TEST(Adam, ZeroGradientsLeaveParametersAlone) {
  TrainConfig cfg;
  std::vector<double> p{1.0, -2.0}, g{0.0, 0.0}, m(2, 0.0), v(2, 0.0);
  for (std::uint64_t t = 1; t <= 100; ++t) adam_update(p, g, m, v, t, cfg);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
}

TEST(Adam, MatchesScriptedReference) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  TrainConfig cfg;
  cfg.lr = 0.01;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 9;
    std::vector<double> p(n), m(n, 0.0), v(n, 0.0);
    for (auto& x : p) x = d(rng);
    std::vector<double> rp = p, rm = m, rv = v;
    for (std::uint64_t t = 1; t <= 20; ++t) {
      std::vector<double> g(n);
      for (auto& x : g) x = d(rng);
      adam_update(p, g, m, v, t, cfg);
      for (std::size_t i = 0; i < n; ++i) {
        rm[i] = 0.9 * rm[i] + 0.1 * g[i];
        rv[i] = 0.999 * rv[i] + 0.001 * g[i] * g[i];
        const double mh = rm[i] / (1.0 - std::pow(0.9, static_cast<double>(t)));
        const double vh = rv[i] / (1.0 - std::pow(0.999, static_cast<double>(t)));
        rp[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      }
    }
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(p[i], rp[i], 1e-12);
  }
}

TEST(Adam, EqualGradientsEqualUpdates) {
  TrainConfig cfg;
  std::vector<double> p{0.2, 0.2}, g{0.7, 0.7}, m(2, 0.0), v(2, 0.0);
  for (std::uint64_t t = 1; t <= 5; ++t) adam_update(p, g, m, v, t, cfg);
  EXPECT_EQ(p[0], p[1]);
}

TEST(Pca, CollinearDataHasOneComponent) {
  Array data = Array::matrix(50, 3);
  for (std::size_t i = 0; i < 50; ++i) {
    const double t = static_cast<double>(i) - 20.0;
    data(i, 0) = t;
    data(i, 1) = -2.0 * t;
    data(i, 2) = 0.5 * t;
  }
  auto r = pca_top2(data);
  EXPECT_NEAR(r.explained[0], 1.0, 1e-9);
  EXPECT_LE(r.explained[1], 1e-9);
  // sign convention: largest-magnitude loading positive
  EXPECT_GT(r.components(0, 1), 0.0);
}

TEST(Pca, IsotropicGaussianSplitsVarianceEvenly) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> d;
  Array data = Array::matrix(20000, 2);
  for (auto& v : data.values()) v = d(rng);
  auto r = pca_top2(data);
  EXPECT_NEAR(r.explained[0], 0.5, 0.05);
  EXPECT_NEAR(r.explained[1], 0.5, 0.05);
}

TEST(Pca, ReconstructionErrorEqualsTrailingEigenvalues) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d;
  const std::size_t n = 400, dim = 5;
  const double sd[dim] = {5.0, 3.0, 1.0, 0.5, 0.2};
  Array data = Array::matrix(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) data(i, j) = sd[j] * d(rng) + 1.0;
  }
  auto r = pca_top(data, dim);
  auto top = pca_top2(data);
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      double rec = top.mean[j];
      for (std::size_t c = 0; c < 2; ++c) rec += top.coordinates(i, c) * top.components(c, j);
      residual += (data(i, j) - rec) * (data(i, j) - rec);
    }
  }
  const double trailing = (r.eigenvalues[2] + r.eigenvalues[3] + r.eigenvalues[4]) * (n - 1);
  EXPECT_NEAR(residual, trailing, 1e-6 * trailing);
  // components are orthonormal
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b < dim; ++b) {
      double dot = 0.0;
      for (std::size_t j = 0; j < dim; ++j) dot += r.components(a, j) * r.components(b, j);
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-6);
    }
  }
  // inner products of projected points match those of the rank-2 reconstruction
  for (std::size_t i = 0; i < 5; ++i) {
    double proj = top.coordinates(i, 0) * top.coordinates(i + 1, 0) + top.coordinates(i, 1) * top.coordinates(i + 1, 1);
    double recon = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      double ri = 0.0, rj = 0.0;
      for (std::size_t c = 0; c < 2; ++c) {
        ri += top.coordinates(i, c) * top.components(c, j);
        rj += top.coordinates(i + 1, c) * top.components(c, j);
      }
      recon += ri * rj;
    }
    EXPECT_NEAR(proj, recon, 1e-9 * (1.0 + std::abs(recon)));
  }
}

TEST(Pca, NearestCentroidOnSeparatedClusters) {
  Array pts = Array::from_rows({{0, 0}, {0.1, 0}, {5, 5}, {5.1, 5}, {-5, 5}, {-5, 5.2}});
  std::vector<int> labels{0, 0, 1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(nearest_centroid_accuracy(pts, labels, 3), 1.0);
  std::vector<int> mixed{0, 1, 0, 1, 0, 1};
  EXPECT_LT(nearest_centroid_accuracy(pts, mixed, 2), 1.0);
}
