// pnmn: synth | preprocess | train | eval | embed
//
// Errors are reported as one line on stderr:
//   pnmn: error: <kind>: <message>
// with exit code 2 for bad input (config, dataset, checkpoint, usage) and 1
// for anything else.

#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pnmn/checkpoint.hpp"
#include "pnmn/config.hpp"
#include "pnmn/dataset.hpp"
#include "pnmn/report.hpp"
#include "pnmn/synth.hpp"
#include "pnmn/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pnmn;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string in;
  std::string data;
  std::string model;
  std::string fold = "all";
  std::string checkpoint;
  std::string split = "auto";
  std::optional<std::uint64_t> seed;
  std::size_t n = 500;
  bool resume = false;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

RunConfig resolve_config(const Options& o) {
  RunConfig rc = load_run_config(o.config);
  apply_env_overrides(rc);
  if (o.seed) rc.train.seed = *o.seed;
  if (!o.model.empty()) rc.train.model = parse_model_kind(o.model);
  if (!o.data.empty()) rc.data_dir = o.data;
  if (!o.in.empty()) rc.data_dir = o.in;
  if (!o.out.empty()) rc.out_dir = o.out;
  if (rc.out_dir.empty()) throw UsageError("--out is required");
  rc.train.validate();
  return rc;
}

std::vector<Sample> load_samples(const RunConfig& rc) {
  if (rc.data_dir.empty()) throw UsageError("--data is required");
  return read_feature_dataset(rc.data_dir);
}

std::vector<std::size_t> parse_folds(const std::string& spec, std::size_t folds) {
  if (spec == "all") return {};
  std::size_t pos = 0;
  unsigned long f = 0;
  try {
    f = std::stoul(spec, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != spec.size() || spec.empty()) throw UsageError("--fold must be 'all' or a fold index, got '" + spec + "'");
  if (f >= folds) throw UsageError("--fold " + spec + " out of range for " + std::to_string(folds) + " folds");
  return {f};
}

// ---- synth / preprocess -----------------------------------------------------

void cmd_synth(const Options& o) {
  const RunConfig rc = resolve_config(o);
  const auto recordings = synth_generate(rc.synth.resolved_classes(), rc.synth.resolved_counts(), rc.train.seed,
                                         rc.synth.options());
  write_raw_dataset(rc.out_dir, recordings);
  write_config_echo(rc.out_dir, rc);
}

void cmd_preprocess(const Options& o) {
  if (o.in.empty()) throw UsageError("--in is required");
  RunConfig rc = resolve_config(o);
  const auto recordings = read_raw_dataset(o.in);
  std::vector<Sample> samples;
  for (const auto& r : recordings) {
    auto s = preprocess(r);
    samples.insert(samples.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  write_feature_dataset(rc.out_dir, samples);
  write_config_echo(rc.out_dir, rc);
}

// ---- train ------------------------------------------------------------------

fs::path fold_dir(const fs::path& out, std::size_t fold) { return out / ("fold_" + std::to_string(fold)); }

json checkpoint_metadata(const RunConfig& rc, std::size_t fold, std::size_t epoch, const std::vector<double>& curve) {
  return {{"model", to_string(rc.train.model)},
          {"seed", rc.train.seed},
          {"fold", fold},
          {"folds", rc.train.folds},
          {"epoch", epoch},
          {"epochs", rc.train.epochs_for_model()},
          {"loss_curve", curve},
          {"config", to_json(rc)}};
}

// Training settings that must agree for a checkpoint to be resumable.
json resume_signature(const json& config) {
  json sig = config;
  sig.erase("out_dir");
  sig.erase("data_dir");
  sig.erase("epochs");
  sig.erase("baseline_epochs");
  return sig;
}

void cmd_train(const Options& o) {
  const RunConfig rc = resolve_config(o);
  const auto samples = load_samples(rc);
  const auto folds = parse_folds(o.fold, rc.train.folds);
  const fs::path out = rc.out_dir;
  write_config_echo(out, rc);

  FoldHooks hooks;
  std::mutex io;
  hooks.on_epoch = [&](std::size_t fold, const Model& m, const AdamState& a, std::size_t epoch,
                       const std::vector<double>& curve) {
    const fs::path dir = fold_dir(out, fold);
    save_checkpoint(dir / "checkpoint", m, checkpoint_metadata(rc, fold, epoch, curve), &a);
    write_loss_curve(dir / "loss_curve.csv", curve);
    std::lock_guard lock(io);
    std::cerr << "fold " << fold << " epoch " << epoch << "/" << rc.train.epochs_for_model() << " loss "
              << format_double(curve.back()) << "\n";
  };
  if (o.resume) {
    hooks.resume = [&](std::size_t fold) -> std::optional<std::pair<Model, TrainResume>> {
      const fs::path dir = fold_dir(out, fold) / "checkpoint";
      if (!fs::exists(dir / "checkpoint.json")) return std::nullopt;
      Checkpoint ck = load_checkpoint(dir);
      const json& meta = ck.metadata;
      if (resume_signature(meta.at("config")) != resume_signature(to_json(rc))) {
        throw ConfigError("checkpoint " + dir.string() + " was written with a different configuration");
      }
      if (!ck.adam) throw CheckpointError("checkpoint " + dir.string() + " has no optimizer state");
      TrainResume r;
      r.adam = std::move(*ck.adam);
      r.epoch = meta.at("epoch").get<std::size_t>();
      r.loss_curve = meta.at("loss_curve").get<std::vector<double>>();
      if (r.epoch > rc.train.epochs_for_model()) {
        throw ConfigError("checkpoint " + dir.string() + " is past the configured epoch count");
      }
      return std::make_pair(std::move(ck.model), std::move(r));
    };
  }

  const CrossValidation cv = cross_validate(rc.train, samples, folds, hooks);
  for (const auto& f : cv.report.folds) {
    write_loss_curve(fold_dir(out, f.fold) / "loss_curve.csv", f.loss_curve);
  }
  write_report(out, cv.report);
  std::cout << "mean_weighted_f1 " << format_double(cv.report.mean_weighted_f1) << "\n";
}

// ---- eval / embed -----------------------------------------------------------

struct LoadedModel {
  Model model;
  json metadata;
  std::vector<std::size_t> test;  // indices into the dataset
};

// A checkpoint directory, or a train output directory holding fold_*/checkpoint.
std::vector<fs::path> checkpoint_dirs(const fs::path& path) {
  if (fs::exists(path / "checkpoint.json")) return {path};
  if (fs::exists(path / "checkpoint" / "checkpoint.json")) return {path / "checkpoint"};
  std::vector<fs::path> dirs;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.path().filename().string().rfind("fold_", 0) == 0 && fs::exists(e.path() / "checkpoint" / "checkpoint.json")) {
        dirs.push_back(e.path() / "checkpoint");
      }
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw CheckpointError("no checkpoint found at " + path.string());
  return dirs;
}

std::vector<LoadedModel> load_models(const Options& o, std::span<const Sample> samples) {
  if (o.checkpoint.empty()) throw UsageError("--checkpoint is required");
  if (o.split != "auto" && o.split != "all" && o.split != "test") {
    throw UsageError("--split must be auto, all or test");
  }
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  std::vector<LoadedModel> out;
  for (const auto& dir : checkpoint_dirs(o.checkpoint)) {
    Checkpoint ck = load_checkpoint(dir);
    LoadedModel lm{std::move(ck.model), std::move(ck.metadata), {}};
    const bool has_fold = lm.metadata.contains("fold") && lm.metadata.contains("folds") && lm.metadata.contains("seed");
    if (o.split == "test" && !has_fold) throw CheckpointError(dir.string() + " records no fold to take a test split from");
    if (has_fold && o.split != "all") {
      const auto assignment = stratified_folds(labels, lm.metadata.at("folds").get<std::size_t>(),
                                               lm.metadata.at("seed").get<std::uint64_t>());
      lm.test = split_fold(assignment, lm.metadata.at("fold").get<std::size_t>()).test;
    } else {
      lm.test.resize(samples.size());
      std::iota(lm.test.begin(), lm.test.end(), 0);
    }
    out.push_back(std::move(lm));
  }
  return out;
}

void cmd_eval(const Options& o) {
  const RunConfig rc = resolve_config(o);
  const auto samples = load_samples(rc);
  const auto models = load_models(o, samples);
  std::vector<FoldReport> folds;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& lm = models[i];
    const auto test = gather(samples, lm.test);
    const Inference inf = infer(lm.model, test, rc.train.batch);
    std::vector<int> labels;
    for (const auto& s : test) labels.push_back(s.label);
    FoldReport rep;
    rep.fold = lm.metadata.value("fold", i);
    rep.test_indices = lm.test;
    rep.predictions = inf.predictions;
    rep.weighted_f1 = weighted_f1(inf.predictions, labels, lm.model.config.classes);
    rep.accuracy = accuracy(inf.predictions, labels);
    if (lm.metadata.contains("loss_curve")) rep.loss_curve = lm.metadata.at("loss_curve").get<std::vector<double>>();
    folds.push_back(std::move(rep));
  }
  const EvalReport report =
      summarize(to_string(models.front().model.config.kind), std::move(folds), samples, models.front().model.config.classes);
  write_config_echo(rc.out_dir, rc);
  write_report(rc.out_dir, report);
  std::cout << "mean_weighted_f1 " << format_double(report.mean_weighted_f1) << "\n";
}

void cmd_embed(const Options& o) {
  const RunConfig rc = resolve_config(o);
  const auto samples = load_samples(rc);
  const auto models = load_models(o, samples);
  if (models.size() != 1) throw UsageError("embed needs a single checkpoint, found " + std::to_string(models.size()));
  const auto& lm = models.front();
  const auto subset = gather(samples, lm.test);
  const EmbeddingTable table = extract_embeddings(lm.model, subset, o.n, rc.train.seed);
  write_config_echo(rc.out_dir, rc);
  write_embeddings(fs::path(rc.out_dir) / "embeddings.csv", table, subset);
  json info = {{"requested", o.n},
               {"rows", table.rows.size()},
               {"truncated", table.truncated},
               {"explained_variance", table.pca.explained.values()},
               {"nearest_centroid_accuracy", 0.0}};
  Array points = Array::matrix(table.rows.size(), 2);
  std::vector<int> labels;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    points(i, 0) = table.rows[i].pc1;
    points(i, 1) = table.rows[i].pc2;
    labels.push_back(table.rows[i].label);
  }
  info["nearest_centroid_accuracy"] = nearest_centroid_accuracy(points, labels, lm.model.config.classes);
  std::ofstream(fs::path(rc.out_dir) / "embeddings.json", std::ios::trunc) << info.dump(2) << "\n";
  if (table.truncated) std::cerr << "pnmn: warning: only " << table.rows.size() << " samples available\n";
}

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int fail(const std::string& kind, const std::string& what, int code) {
  std::cerr << "pnmn: error: " << kind << ": " << one_line(what) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plastic neural memory network: synthesis, preprocessing, training and evaluation"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "RunConfig JSON file")->check(CLI::ExistingFile);
    c->add_option("--out", o.out, "Output directory");
    c->add_option("--seed", o.seed, "Seed (overrides config and PLASTIC_NMN_SEED)");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic raw dataset");
  add_common(synth);

  auto* prep = app.add_subcommand("preprocess", "Window and FFT a raw dataset into features");
  add_common(prep);
  prep->add_option("--in", o.in, "Raw dataset directory")->required();

  auto* train = app.add_subcommand("train", "Cross-validated training");
  add_common(train);
  train->add_option("--data", o.data, "Feature dataset directory");
  train->add_option("--model", o.model, "plastic-nmn | nmn-fixed | lstm-baseline");
  train->add_option("--fold", o.fold, "all or a fold index");
  train->add_flag("--resume", o.resume, "Continue from checkpoints in --out");

  auto* eval = app.add_subcommand("eval", "Evaluate checkpoints");
  add_common(eval);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint or train output directory")->required();
  eval->add_option("--data", o.data, "Feature dataset directory");
  eval->add_option("--split", o.split, "auto | all | test");

  auto* embed = app.add_subcommand("embed", "Export 2D PCA of memory outputs");
  add_common(embed);
  embed->add_option("--checkpoint", o.checkpoint, "Checkpoint directory")->required();
  embed->add_option("--data", o.data, "Feature dataset directory");
  embed->add_option("--n", o.n, "Number of samples")->check(CLI::PositiveNumber);
  embed->add_option("--split", o.split, "auto | all | test");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*synth) cmd_synth(o);
    if (*prep) cmd_preprocess(o);
    if (*train) cmd_train(o);
    if (*eval) cmd_eval(o);
    if (*embed) cmd_embed(o);
  } catch (const UsageError& e) {
    return fail("usage", e.what(), 2);
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const DatasetError& e) {
    return fail("dataset", e.what(), 2);
  } catch (const CheckpointError& e) {
    return fail("checkpoint", e.what(), 2);
  } catch (const DivergenceError& e) {
    return fail("divergence", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 0;
}
