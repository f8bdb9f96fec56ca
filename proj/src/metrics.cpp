#include "pnmn/metrics.hpp"

#include <algorithm>

#include "pnmn/graph.hpp"

namespace pnmn {

namespace {

void check_pair(std::span<const int> predictions, std::span<const int> labels, std::size_t classes) {
  if (predictions.size() != labels.size()) throw Error("metrics: predictions and labels differ in length");
  auto in_range = [&](int v) { return v >= 0 && static_cast<std::size_t>(v) < classes; };
  if (!std::all_of(predictions.begin(), predictions.end(), in_range) ||
      !std::all_of(labels.begin(), labels.end(), in_range)) {
    throw Error("metrics: class id out of range");
  }
}

}  // namespace

double cross_entropy(std::span<const double> logits, int label) {
  ad::Graph g;
  ad::Var l = g.constant(Array::row(std::vector<double>(logits.begin(), logits.end())));
  return g.value(g.softmax_cross_entropy(l, {label}))[0];
}

std::vector<ClassMetrics> per_class_metrics(std::span<const int> predictions, std::span<const int> labels,
                                            std::size_t classes) {
  check_pair(predictions, labels, classes);
  std::vector<std::size_t> tp(classes), predicted(classes), support(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++support[labels[i]];
    ++predicted[predictions[i]];
    if (labels[i] == predictions[i]) ++tp[labels[i]];
  }
  std::vector<ClassMetrics> out(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    auto& m = out[c];
    m.support = support[c];
    m.precision = predicted[c] ? static_cast<double>(tp[c]) / static_cast<double>(predicted[c]) : 0.0;
    m.recall = support[c] ? static_cast<double>(tp[c]) / static_cast<double>(support[c]) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  }
  return out;
}

double weighted_f1(std::span<const int> predictions, std::span<const int> labels, std::size_t classes) {
  if (labels.empty()) throw Error("weighted_f1: no samples");
  const auto per_class = per_class_metrics(predictions, labels, classes);
  double total = 0.0;
  for (const auto& m : per_class) total += m.f1 * static_cast<double>(m.support);
  return total / static_cast<double>(labels.size());
}

Array confusion_counts(std::span<const int> predictions, std::span<const int> labels, std::size_t classes) {
  check_pair(predictions, labels, classes);
  Array counts = Array::matrix(classes, classes);
  for (std::size_t i = 0; i < labels.size(); ++i) counts(labels[i], predictions[i]) += 1.0;
  return counts;
}

Array confusion_matrix(std::span<const int> predictions, std::span<const int> labels, std::size_t classes) {
  Array m = confusion_counts(predictions, labels, classes);
  for (std::size_t r = 0; r < classes; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) total += m(r, c);
    if (total > 0.0) {
      for (std::size_t c = 0; c < classes; ++c) m(r, c) /= total;
    }
  }
  return m;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size() || labels.empty()) throw Error("accuracy: bad input lengths");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predictions[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

std::vector<int> argmax_rows(const Array& scores) {
  std::vector<int> out(scores.rows());
  const std::size_t cols = scores.cols();
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    const auto row = scores.data().subspan(r * cols, cols);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace pnmn
