#include "pnmn/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>

namespace pnmn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "': " + j.at(key).dump());
  }
}

ClassSpec class_from_json(const json& j) {
  reject_unknown(j, {"name", "center_hz", "topography", "amplitude", "noise", "freq_jitter_hz"}, "synth.classes[]");
  ClassSpec s;
  read(j, "name", s.name);
  read(j, "center_hz", s.center_hz);
  read(j, "topography", s.topography);
  read(j, "amplitude", s.amplitude);
  read(j, "noise", s.noise);
  read(j, "freq_jitter_hz", s.freq_jitter_hz);
  if (s.topography.empty()) s.topography.assign(kChannels, 1.0);
  return s;
}

SynthSettings synth_from_json(const json& j) {
  reject_unknown(j, {"preset", "classes", "counts", "target_windows", "duration_seconds", "sample_rate"}, "synth");
  SynthSettings s;
  read(j, "preset", s.preset);
  if (j.contains("classes")) {
    if (!j.at("classes").is_array()) throw ConfigError("synth.classes must be an array");
    for (const auto& c : j.at("classes")) s.classes.push_back(class_from_json(c));
  }
  read(j, "counts", s.counts);
  read(j, "target_windows", s.target_windows);
  read(j, "duration_seconds", s.duration_seconds);
  read(j, "sample_rate", s.sample_rate);
  if (s.preset != "default" && s.preset != "hard") throw ConfigError("unknown synth preset '" + s.preset + "'");
  return s;
}

}  // namespace

std::vector<ClassSpec> SynthSettings::resolved_classes() const {
  if (!classes.empty()) return classes;
  return preset == "hard" ? hard_class_specs() : default_class_specs();
}

std::vector<std::size_t> SynthSettings::resolved_counts() const {
  if (!counts.empty()) return counts;
  const auto plan = plan_windows(static_cast<std::size_t>(duration_seconds * sample_rate), sample_rate);
  return proportional_counts(target_windows, plan.count);
}

RunConfig run_config_from_json(const json& j) {
  reject_unknown(j,
                 {"lr", "beta1", "beta2", "eps", "batch", "epochs", "baseline_epochs", "folds", "seed", "model", "k",
                  "l", "eta", "fixed_operand", "data_dir", "out_dir", "synth"},
                 "config");
  RunConfig c;
  auto& t = c.train;
  read(j, "lr", t.lr);
  read(j, "beta1", t.beta1);
  read(j, "beta2", t.beta2);
  read(j, "eps", t.eps);
  read(j, "batch", t.batch);
  read(j, "epochs", t.epochs);
  read(j, "baseline_epochs", t.baseline_epochs);
  read(j, "folds", t.folds);
  read(j, "seed", t.seed);
  if (j.contains("model")) {
    try {
      t.model = parse_model_kind(j.at("model").get<std::string>());
    } catch (const std::exception&) {
      throw ConfigError("bad value for 'model': " + j.at("model").dump());
    }
  }
  read(j, "k", t.k);
  read(j, "l", t.slots);
  read(j, "eta", t.eta);
  if (j.contains("fixed_operand")) {
    try {
      t.fixed_operand = parse_fixed_operand(j.at("fixed_operand").get<std::string>());
    } catch (const std::exception&) {
      throw ConfigError("bad value for 'fixed_operand': " + j.at("fixed_operand").dump());
    }
  }
  read(j, "data_dir", c.data_dir);
  read(j, "out_dir", c.out_dir);
  if (j.contains("synth")) c.synth = synth_from_json(j.at("synth"));
  try {
    t.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json to_json(const ClassSpec& s) {
  return {{"name", s.name},
          {"center_hz", s.center_hz},
          {"topography", s.topography},
          {"amplitude", s.amplitude},
          {"noise", s.noise},
          {"freq_jitter_hz", s.freq_jitter_hz}};
}

json to_json(const RunConfig& c) {
  const auto& t = c.train;
  json classes = json::array();
  for (const auto& s : c.synth.resolved_classes()) classes.push_back(to_json(s));
  return {{"lr", t.lr},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"eps", t.eps},
          {"batch", t.batch},
          {"epochs", t.epochs},
          {"baseline_epochs", t.baseline_epochs},
          {"folds", t.folds},
          {"seed", t.seed},
          {"model", to_string(t.model)},
          {"k", t.k},
          {"l", t.slots},
          {"eta", t.eta},
          {"fixed_operand", to_string(t.fixed_operand)},
          {"data_dir", c.data_dir},
          {"out_dir", c.out_dir},
          {"synth",
           {{"preset", c.synth.preset},
            {"classes", classes},
            {"counts", c.synth.resolved_counts()},
            {"target_windows", c.synth.target_windows},
            {"duration_seconds", c.synth.duration_seconds},
            {"sample_rate", c.synth.sample_rate}}}};
}

RunConfig load_run_config(const fs::path& path) {
  if (path.empty()) return {};
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

void apply_env_overrides(RunConfig& config) {
  const char* env = std::getenv("PLASTIC_NMN_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno || *end || *env == '-') throw ConfigError(std::string("PLASTIC_NMN_SEED is not a seed: ") + env);
  config.train.seed = v;
}

void write_config_echo(const fs::path& dir, const RunConfig& config) {
  fs::create_directories(dir);
  std::ofstream os(dir / "config.json", std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + (dir / "config.json").string());
  os << to_json(config).dump(2) << "\n";
}

}  // namespace pnmn
