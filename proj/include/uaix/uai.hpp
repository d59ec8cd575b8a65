#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "uaix/attribution.hpp"
#include "uaix/posterior.hpp"

namespace uaix {

// N sampled relevance maps for one input: the empirical relevance
// distribution under the weight posterior.
struct RelevanceSet {
  std::vector<Tensor> samples;
  Tensor input;
  std::size_t class_index = 0;
  std::string method;
  std::string posterior;
  // Per-sample posterior seed, or the member index under enumeration.
  std::vector<std::uint64_t> seeds;
  bool group_normalized = false;

  std::size_t size() const noexcept { return samples.size(); }
  const Shape& map_shape() const { return samples.at(0).shape(); }
  // Throws unless N >= 1, all maps share a shape and seeds match samples.
  void validate() const;

  friend bool operator==(const RelevanceSet&, const RelevanceSet&) = default;
};

enum class AggregateKind { Mean, Percentile, UaiPlus };
enum class Normalization { Raw, Group, MinMax };

struct AggregateMap {
  Tensor values;
  AggregateKind kind = AggregateKind::Mean;
  // alpha in percent for Percentile, epsilon for UaiPlus.
  double parameter = 0.0;
  Normalization normalization = Normalization::Raw;
};

// "mean", "p5", "p95", "uai+" ...
std::string aggregate_label(const AggregateMap& map);

struct SamplingOptions {
  // Ensemble only: sample i uses member i mod M instead of a random draw.
  bool enumerate_members = false;
  unsigned threads = 1;
};

// Sample i draws its weights with seed derive_seed(seed, i).
RelevanceSet sample_relevances(const WeightPosterior& posterior, const Network& net, const AttributionMethod& method,
                               const Tensor& x, std::size_t class_index, std::size_t n, std::uint64_t seed,
                               const SamplingOptions& options = {});

AggregateMap mean_explanation(const RelevanceSet& set);

// Pixelwise alpha-th percentile (alpha in [0,100]) with linear
// interpolation between order statistics.
AggregateMap uai_percentile(const RelevanceSet& set, double alpha);

// Interpolated percentile of an already sorted sample.
double interpolated_percentile(const std::vector<float>& sorted, double alpha);

// Divides every map by the largest entry across all samples. Throws when no
// entry is strictly positive.
RelevanceSet group_normalize(const RelevanceSet& set);

// Pixelwise fraction of samples with relevance > epsilon (or < epsilon with
// `literal_less_than`). Requires a group-normalized set.
AggregateMap uai_plus(const RelevanceSet& set, double epsilon, bool literal_less_than = false);

// Positive values scaled by the largest positive value, negative values by
// the magnitude of the most negative one.
Tensor minmax_normalize(const Tensor& values);
AggregateMap minmax_normalize(const AggregateMap& map);

}  // namespace uaix
