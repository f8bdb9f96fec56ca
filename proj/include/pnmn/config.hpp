#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pnmn/synth.hpp"
#include "pnmn/train.hpp"

namespace pnmn {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SynthSettings {
  std::string preset = "default";  // "default" or "hard"; ignored when classes is set
  std::vector<ClassSpec> classes;
  std::vector<std::size_t> counts;  // per class; empty = proportional to target_windows
  std::size_t target_windows = 10000;
  double duration_seconds = 10.0;
  double sample_rate = 250.0;

  std::vector<ClassSpec> resolved_classes() const;
  std::vector<std::size_t> resolved_counts() const;
  SynthOptions options() const { return {duration_seconds, sample_rate}; }
};

/// Everything a command needs to run, as read from --config.
///
///   {"lr", "beta1", "beta2", "eps", "batch", "epochs", "baseline_epochs",
///    "folds", "seed", "model", "k", "l", "eta", "fixed_operand",
///    "data_dir", "out_dir",
///    "synth": {"preset", "classes", "counts", "target_windows",
///              "duration_seconds", "sample_rate"}}
///
/// Every key is optional; unknown keys are rejected.
struct RunConfig {
  TrainConfig train;
  std::string data_dir;
  std::string out_dir;
  SynthSettings synth;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const ClassSpec& spec);

/// Reads a config file; an empty path yields the defaults.
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies PLASTIC_NMN_SEED if it is set.
void apply_env_overrides(RunConfig& config);

/// Writes <dir>/config.json with the fully resolved config.
void write_config_echo(const std::filesystem::path& dir, const RunConfig& config);

}  // namespace pnmn
