#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uaix/config.hpp"
#include "uaix/eval.hpp"
#include "uaix/serialize.hpp"
#include "uaix/spray.hpp"

namespace uaix {

// Seed layout for a run with global seed s:
//   data          derive_seed(s, Data)            train images 0..train_size-1,
//                                                 test images after them
//   MAP network   derive_seed(s, Posterior) -> init via Init, batches via Shuffle
//   member m      derive_seed(s, Ensemble, m) -> init via Init, batches via Shuffle
//   test image i  sampling derive_seed(s, Relevance, i), random baseline
//                 derive_seed(s, RandomBaseline, i)
//   clustering    k-means derive_seed(s, Cluster)

// LeNet: conv(5)-relu-avgpool-conv(5)-relu-avgpool-fc120-fc84-fc; mlp: one
// hidden layer. Dropout layers are inserted only when `with_dropout`.
Network build_network(const RunConfig& cfg, bool with_dropout);

Dataset train_split(const RunConfig& cfg);
Dataset test_split(const RunConfig& cfg);

struct TrainedPosterior {
  Network net;
  WeightPosterior posterior;
  std::vector<TrainHistory> histories;  // one per trained network
};

TrainedPosterior train_posterior(const RunConfig& cfg, const std::string& variant, const Dataset& train,
                                 std::ostream* log = nullptr);

AttributionMethod configured_method(const RunConfig& cfg);
EvalConfig configured_eval(const RunConfig& cfg);

// Commands. Each writes only into cfg.out, which is created if missing.
void run_train(const RunConfig& cfg, std::ostream* log = nullptr);
RelevanceSet run_explain(const RunConfig& cfg, const std::filesystem::path& posterior_path, std::ostream* log = nullptr);
void run_aggregate(const RunConfig& cfg, const std::filesystem::path& relevance_path, std::ostream* log = nullptr);
SpectralResult run_cluster(const RunConfig& cfg, const std::filesystem::path& posterior_path,
                           const std::optional<std::filesystem::path>& relevance_path, std::ostream* log = nullptr);
MetricReport run_evaluate(const RunConfig& cfg, const std::filesystem::path& posterior_path,
                          const std::optional<std::filesystem::path>& data_path, std::ostream* log = nullptr);

struct DemoResult {
  std::vector<MetricReport> reports;  // one per demo variant
  std::vector<SpectralResult> clusters;
};

// Trains every demo variant, evaluates it on the test split and writes
// reports, posteriors, heatmaps and SpRAy output.
DemoResult run_demo(const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace uaix
