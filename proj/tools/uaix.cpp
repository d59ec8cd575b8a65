#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uaix/error.hpp"
#include "uaix/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string scale;
  std::vector<double> alphas;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool alphas) {
  cmd->add_option("--config", f.config, "Configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", f.sets, "Override a config entry, section.key=value (repeatable)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--seed", f.seed, "Global seed");
  cmd->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--scale", f.scale, "Preset: tiny, small or paper");
  if (alphas) cmd->add_option("--alpha", f.alphas, "Percentile to aggregate, in percent (repeatable)");
}

uaix::RunConfig resolve(const CommonFlags& f) {
  uaix::ConfigFile file = f.config.empty() ? uaix::ConfigFile{} : uaix::read_config(f.config);
  for (const auto& s : f.sets) uaix::apply_override(file, s);
  uaix::RunConfig cfg =
      uaix::resolve_config(file, f.scale.empty() ? std::nullopt : std::optional<std::string>(f.scale));
  if (!f.out.empty()) cfg.out = f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (!f.alphas.empty()) cfg.alphas = f.alphas;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-aware relevance maps for Bayesian neural networks"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string posterior, relevance, data;

  auto* train = app.add_subcommand("train", "Train a posterior on synthetic data");
  add_common(train, flags, false);

  auto* explain = app.add_subcommand("explain", "Sample relevance maps for one test image and aggregate them");
  add_common(explain, flags, true);
  explain->add_option("--posterior", posterior, "Posterior file")->required()->check(CLI::ExistingFile);

  auto* aggregate = app.add_subcommand("aggregate", "Aggregate a saved relevance set");
  add_common(aggregate, flags, true);
  aggregate->add_option("--relevance", relevance, "Relevance set file")->required()->check(CLI::ExistingFile);

  auto* cluster = app.add_subcommand("cluster", "Cluster sampled relevance maps with SpRAy");
  add_common(cluster, flags, false);
  auto* cluster_post = cluster->add_option("--posterior", posterior, "Posterior file")->check(CLI::ExistingFile);
  auto* cluster_rel = cluster->add_option("--relevance", relevance, "Relevance set file")->check(CLI::ExistingFile);
  cluster_post->excludes(cluster_rel);
  cluster_rel->excludes(cluster_post);

  auto* evaluate = app.add_subcommand("evaluate", "Localization metrics of every aggregate on a test set");
  add_common(evaluate, flags, true);
  evaluate->add_option("--posterior", posterior, "Posterior file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", data, "Dataset file (default: the configured test split)")->check(CLI::ExistingFile);

  auto* demo = app.add_subcommand("demo", "Train, evaluate, explain and cluster end to end");
  add_common(demo, flags, true);

  CLI11_PARSE(app, argc, argv);

  try {
    const uaix::RunConfig cfg = resolve(flags);
    std::ostream* log = &std::cerr;
    if (*train) {
      uaix::run_train(cfg, log);
    } else if (*explain) {
      uaix::run_explain(cfg, posterior, log);
    } else if (*aggregate) {
      uaix::run_aggregate(cfg, relevance, log);
    } else if (*cluster) {
      if (posterior.empty() && relevance.empty()) throw uaix::InvalidArgument("cluster needs --posterior or --relevance");
      uaix::run_cluster(cfg, posterior,
                        relevance.empty() ? std::nullopt : std::optional<std::filesystem::path>(relevance), log);
    } else if (*evaluate) {
      uaix::run_evaluate(cfg, posterior, data.empty() ? std::nullopt : std::optional<std::filesystem::path>(data), log);
    } else if (*demo) {
      uaix::run_demo(cfg, log);
    }
  } catch (const uaix::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
