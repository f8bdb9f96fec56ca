#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pnmn/array.hpp"

namespace pnmn {

/// -log softmax(logits)[label].
double cross_entropy(std::span<const double> logits, int label);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// Precision, recall and F1 per class. Undefined ratios (no predictions or no
/// support) are reported as 0.
std::vector<ClassMetrics> per_class_metrics(std::span<const int> predictions, std::span<const int> labels,
                                            std::size_t classes);

/// Support-weighted mean of per-class F1.
double weighted_f1(std::span<const int> predictions, std::span<const int> labels, std::size_t classes);

/// Counts, rows = actual class, columns = predicted class.
Array confusion_counts(std::span<const int> predictions, std::span<const int> labels, std::size_t classes);
/// Row-normalized confusion matrix; rows without support stay zero.
Array confusion_matrix(std::span<const int> predictions, std::span<const int> labels, std::size_t classes);

double accuracy(std::span<const int> predictions, std::span<const int> labels);

/// Index of the largest entry of each row.
std::vector<int> argmax_rows(const Array& scores);

}  // namespace pnmn
