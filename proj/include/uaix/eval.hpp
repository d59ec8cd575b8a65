#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uaix/attribution.hpp"
#include "uaix/dataset.hpp"
#include "uaix/posterior.hpp"
#include "uaix/uai.hpp"

namespace uaix {

// Mann-Whitney U of object-pixel scores against background scores, with
// midranks for ties.
struct RankStatistic {
  double u = 0.0;
  double positives = 0.0;
  double negatives = 0.0;

  double auc() const { return u / (positives * negatives); }
};

RankStatistic rank_statistic(const Tensor& relevance, const ObjectMask& mask);
double auc_localization(const Tensor& relevance, const ObjectMask& mask);
double auc_localization(const AggregateMap& relevance, const ObjectMask& mask);

// Positive relevance mass inside the object over total positive mass;
// nullopt when there is no positive mass at all.
std::optional<double> mass_accuracy(const Tensor& relevance, const ObjectMask& mask);
std::optional<double> mass_accuracy(const AggregateMap& relevance, const ObjectMask& mask);

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;     // images contributing
  std::size_t excluded = 0;  // images where the metric is undefined
};

MetricSummary summarize(std::span<const std::optional<double>> values);

struct MetricRow {
  std::string name;
  bool available = true;
  std::vector<std::optional<double>> auc;
  std::vector<std::optional<double>> ma;
  MetricSummary auc_summary;
  MetricSummary ma_summary;
};

struct MetricReport {
  std::string posterior;
  std::string method;
  std::size_t images = 0;
  std::size_t samples = 0;
  double mean_mask_fraction = 0.0;
  std::vector<MetricRow> rows;

  const MetricRow& row(const std::string& name) const;
};

struct EvalConfig {
  std::vector<double> alphas{5.0, 95.0};
  double uai_epsilon = 0.05;
  bool literal_less_than = false;
  std::size_t samples = 50;
  std::uint64_t seed = 0;
  bool enumerate_members = false;
  unsigned threads = 1;
};

// Row label for a percentile: Intersection below 50, Union above, Median at 50.
std::string percentile_row_name(double alpha);

// Scores Random, Baseline (MAP weights), Average, each percentile and UAI+
// on every image, all aggregates of one image sharing one relevance set.
// Image i samples with derive_seed(seed, Stream::Relevance, i); the class
// explained is the image label.
MetricReport evaluate_suite(const WeightPosterior& posterior, const Network& net, const AttributionMethod& method,
                            std::span<const LabeledImage> data, const EvalConfig& cfg);

}  // namespace uaix
