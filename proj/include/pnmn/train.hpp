#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnmn/metrics.hpp"
#include "pnmn/model.hpp"
#include "pnmn/pca.hpp"
#include "pnmn/signal.hpp"

namespace pnmn {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch = 32;
  std::size_t epochs = 50;
  std::size_t baseline_epochs = 150;
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  ModelKind model = ModelKind::kPlasticNmn;
  std::size_t k = 80;
  std::size_t slots = 25;
  double eta = 0.5;
  FixedOperand fixed_operand = FixedOperand::kEncoder;

  std::size_t epochs_for_model() const {
    return model == ModelKind::kLstmBaseline ? baseline_epochs : epochs;
  }
  ModelConfig model_config() const;
  void validate() const;
};

// ---- Adam -------------------------------------------------------------------

/// First/second moments keyed by parameter name, plus the step counter.
struct AdamState {
  std::map<std::string, Array> m;
  std::map<std::string, Array> v;
  std::uint64_t t = 0;
};

/// One bias-corrected Adam update for a single tensor at step t (t >= 1):
/// m = b1 m + (1-b1) g, v = b2 v + (1-b2) g^2, p -= lr mhat / (sqrt(vhat) + eps).
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 std::uint64_t t, const TrainConfig& config);

/// Advances state.t and updates every parameter of the model that has a gradient.
void adam_step(Model& model, const std::map<std::string, Array>& grads, AdamState& state, const TrainConfig& config);

// ---- Data handling ----------------------------------------------------------

/// Fisher-Yates shuffle driven by the raw generator output, so the permutation
/// only depends on the seed.
void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng);

/// Fold id for every sample. Within each class the samples are shuffled and
/// dealt into `folds` parts whose sizes differ by at most one (earlier folds
/// take the remainder).
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed);

/// Deterministic 64-bit mix of several seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

// ---- Training and inference -------------------------------------------------

struct EpochHook {
  /// Called after every completed epoch with the model, optimizer state, the
  /// 1-based epoch count and the loss curve so far.
  std::function<void(const Model&, const AdamState&, std::size_t, const std::vector<double>&)> on_epoch;
};

/// Where an interrupted run left off.
struct TrainResume {
  AdamState adam;
  std::size_t epoch = 0;  // completed epochs
  std::vector<double> loss_curve;
};

struct TrainResult {
  Model model;
  AdamState adam;
  std::vector<double> loss_curve;  // mean training loss per epoch
};

/// Error raised when the loss becomes non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Trains `model` on `train` for config.epochs_for_model() epochs, starting
/// after resume.epoch completed epochs. The normalizer is fitted only on a
/// fresh start. Memory is reset at every epoch start;
/// batches flow through it in order and gradients stop at batch boundaries.
/// Parameters and moments are rounded to float at every epoch end so that a
/// checkpointed run resumes bit-exactly.
TrainResult train_fold(const TrainConfig& config, Model model, std::span<const Sample> train, std::size_t fold,
                       TrainResume resume = {}, const EpochHook& hook = {});

struct Inference {
  std::vector<int> predictions;
  Array logits;      // [n x classes]
  Array embeddings;  // [n x k]
};

/// Runs the samples through the model in the given order from a reset memory.
Inference infer(const Model& model, std::span<const Sample> samples, std::size_t batch = 32);

// ---- Cross validation and reporting ----------------------------------------

struct FoldReport {
  std::size_t fold = 0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<double> loss_curve;
  std::vector<std::size_t> test_indices;
  std::vector<int> predictions;
};

struct EvalReport {
  std::string model;
  std::vector<FoldReport> folds;
  double mean_weighted_f1 = 0.0;
  std::vector<ClassMetrics> per_class;  // pooled over all folds
  Array confusion;                      // pooled, row-normalized
};

EvalReport summarize(const std::string& model, std::vector<FoldReport> folds, std::span<const Sample> samples,
                     std::size_t classes);

/// Sample indices of one fold's training and test parts, in dataset order.
struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
FoldSplit split_fold(std::span<const std::size_t> assignment, std::size_t fold);
std::vector<Sample> gather(std::span<const Sample> samples, std::span<const std::size_t> idx);

struct CrossValidation {
  EvalReport report;
  std::vector<Model> models;
};

struct FoldHooks {
  /// Optional saved progress for a fold; the model must carry its normalizer.
  std::function<std::optional<std::pair<Model, TrainResume>>(std::size_t fold)> resume;
  std::function<void(std::size_t fold, const Model&, const AdamState&, std::size_t epoch,
                     const std::vector<double>& loss_curve)>
      on_epoch;
};

/// Trains and evaluates the selected folds (all when empty). Folds run in
/// parallel on OpenMP threads, each owning its model; hooks may be called
/// concurrently for different folds.
CrossValidation cross_validate(const TrainConfig& config, std::span<const Sample> samples,
                               std::vector<std::size_t> folds = {}, const FoldHooks& hooks = {});

// ---- Embeddings -------------------------------------------------------------

struct EmbeddingRow {
  std::size_t sample = 0;
  int label = 0;
  double pc1 = 0.0;
  double pc2 = 0.0;
};

struct EmbeddingTable {
  std::vector<EmbeddingRow> rows;
  PcaResult pca;
  bool truncated = false;  // fewer samples than requested were available
};

/// Runs all samples through the model in order, draws n of them without
/// replacement (seeded) and projects their embeddings on the top two
/// principal components.
EmbeddingTable extract_embeddings(const Model& model, std::span<const Sample> samples, std::size_t n,
                                  std::uint64_t seed);

/// Accuracy of a nearest-class-centroid classifier evaluated on its own
/// training points.
double nearest_centroid_accuracy(const Array& points, std::span<const int> labels, std::size_t classes);

}  // namespace pnmn
