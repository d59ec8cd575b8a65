#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uaix/spray.hpp"
#include "uaix/synth.hpp"
#include "uaix/trainer.hpp"

namespace uaix {

// Flat sectioned key-value text:
//   # comment
//   [section]
//   key = value
using ConfigFile = std::map<std::string, std::map<std::string, std::string>>;

ConfigFile parse_config(const std::string& text);
ConfigFile read_config(const std::filesystem::path& path);

// "section.key=value".
void apply_override(ConfigFile& file, const std::string& assignment);

struct RunConfig {
  // [run]
  std::uint64_t seed = 0;
  std::string out = "out";
  unsigned threads = 1;

  // [data]
  std::size_t train_size = 5000;
  SynthConfig synth;  // seed is derived from run.seed

  // [net]
  std::string arch = "lenet";  // lenet | mlp
  std::size_t hidden = 64;      // mlp width
  float conv_dropout = 0.25f;
  float dense_dropout = 0.5f;

  // [trainer]; trainer.seed is derived from run.seed
  TrainConfig trainer;

  // [posterior]
  std::string variant = "dropout";  // dropout | ensemble | laplace
  std::size_t members = 10;
  std::size_t member_epochs = 5;
  std::size_t member_lr_step = 3;
  double prior_precision = 0.1;
  std::size_t laplace_examples = 500;

  // [attribution]
  std::string method = "lrp-eps";
  double lrp_epsilon = 1e-6;
  std::size_t ig_steps = 32;

  // [uai]
  std::size_t samples = 50;
  std::vector<double> alphas{5.0, 95.0};
  double epsilon = 0.05;
  bool literal_less_than = false;
  bool enumerate_members = false;

  // [spray]
  SprayParams spray;
  std::size_t spray_samples = 100;

  // [eval]
  std::size_t test_size = 500;
  std::size_t image = 0;  // test image explained by explain/cluster
  std::vector<std::string> demo_variants{"dropout", "ensemble"};
};

// "tiny", "small" (the default) or "paper".
RunConfig preset(const std::string& scale);

// Applies every entry of `file`; unknown sections or keys are errors.
void apply_config(RunConfig& cfg, const ConfigFile& file);

// Preset named by `scale`, else by the file's run.scale, else "small";
// then every other entry of `file` on top.
RunConfig resolve_config(const ConfigFile& file, const std::optional<std::string>& scale = std::nullopt);

// Effective configuration in the same text format, every key listed.
std::string dump_config(const RunConfig& cfg);

void validate(const RunConfig& cfg);

}  // namespace uaix
