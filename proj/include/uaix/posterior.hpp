#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "uaix/dataset.hpp"
#include "uaix/network.hpp"

namespace uaix {

using WeightsPtr = std::shared_ptr<const WeightSet>;

// Independently trained members, sampled uniformly with replacement.
struct EnsemblePosterior {
  std::vector<WeightsPtr> members;
};

// MAP weights with test-time dropout. Rates default to the topology's
// Dropout layers; entries here override them per layer index.
struct McDropoutPosterior {
  WeightsPtr map;
  std::map<std::size_t, float> rates;
};

// Factorized Gaussian centred on the MAP weights.
struct LaplacePosterior {
  WeightsPtr map;
  WeightsPtr variance;
};

using WeightPosterior = std::variant<EnsemblePosterior, McDropoutPosterior, LaplacePosterior>;

// "ensemble", "dropout" or "laplace".
std::string posterior_tag(const WeightPosterior& posterior);

// Throws when the posterior is not usable with `net`.
void check_posterior(const Network& net, const WeightPosterior& posterior);

struct PosteriorSample {
  WeightsPtr weights;
  std::optional<DropoutMask> mask;

  const WeightSet& w() const { return *weights; }
  const DropoutMask* mask_ptr() const { return mask ? &*mask : nullptr; }
};

// One weight draw; a pure function of (posterior, seed).
PosteriorSample sample(const WeightPosterior& posterior, const Network& net, std::uint64_t seed);

// The m-th ensemble member as a sample; used for exact enumeration.
PosteriorSample ensemble_member(const WeightPosterior& posterior, std::size_t m);

std::size_t ensemble_size(const WeightPosterior& posterior);

// Expected weights where the family exposes them; absent for ensembles.
std::optional<WeightsPtr> map_weights(const WeightPosterior& posterior);

// Per-parameter 1 / (F + prior_precision), with F the sum over examples of
// squared per-example gradients. `example_gradient(n, out)` writes the
// gradient of example n into `out` (size num_params).
std::vector<double> diagonal_laplace_variance(
    std::size_t num_params, std::size_t num_examples,
    const std::function<void(std::size_t, std::span<double>)>& example_gradient, double prior_precision);

// Diagonal Laplace around `map_w` from the empirical Fisher of the
// cross-entropy loss over `data` (inference mode, no dropout).
WeightPosterior fit_diagonal_laplace(const Network& net, const WeightSet& map_w, std::span<const LabeledImage> data,
                                     double prior_precision);

struct PredictiveStats {
  Tensor mean;
  Tensor variance;
};

// Monte-Carlo mean and unbiased variance of softmax outputs over n_samples
// posterior draws; sample i uses derive_seed(seed, i).
PredictiveStats predictive_stats(const WeightPosterior& posterior, const Network& net, const Tensor& x,
                                 std::size_t n_samples, std::uint64_t seed);

}  // namespace uaix
