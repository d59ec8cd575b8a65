#include "uaix/posterior.hpp"

#include <cmath>

#include "uaix/error.hpp"
#include "uaix/trainer.hpp"

namespace uaix {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string posterior_tag(const WeightPosterior& posterior) {
  return std::visit(overloaded{
                        [](const EnsemblePosterior&) { return std::string("ensemble"); },
                        [](const McDropoutPosterior&) { return std::string("dropout"); },
                        [](const LaplacePosterior&) { return std::string("laplace"); },
                    },
                    posterior);
}

void check_posterior(const Network& net, const WeightPosterior& posterior) {
  std::visit(overloaded{
                 [&](const EnsemblePosterior& e) {
                   if (e.members.empty()) throw InvalidArgument("ensemble posterior has no members");
                   for (const auto& m : e.members) check_weights(net, *m);
                 },
                 [&](const McDropoutPosterior& d) {
                   if (!d.map) throw InvalidArgument("dropout posterior without weights");
                   check_weights(net, *d.map);
                   if (!net.has_dropout()) throw InvalidArgument("dropout posterior needs a network with dropout layers");
                   for (const auto& [layer, rate] : d.rates) {
                     if (layer >= net.num_layers() || !std::holds_alternative<Dropout>(net.layers()[layer]))
                       throw ShapeError("dropout rate for a non-dropout layer", layer);
                     if (!(rate >= 0.0f && rate < 1.0f)) throw ShapeError("dropout rate must lie in [0,1)", layer);
                   }
                 },
                 [&](const LaplacePosterior& l) {
                   if (!l.map || !l.variance) throw InvalidArgument("laplace posterior without mean or variance");
                   check_weights(net, *l.map);
                   check_weights(net, *l.variance);
                   for (float v : l.variance->flatten())
                     if (!(v >= 0.0f) || !std::isfinite(v)) throw InvalidArgument("laplace variances must be finite and >= 0");
                 },
             },
             posterior);
}

PosteriorSample sample(const WeightPosterior& posterior, const Network& net, std::uint64_t seed) {
  Rng rng(seed);
  return std::visit(overloaded{
                        [&](const EnsemblePosterior& e) {
                          std::uniform_int_distribution<std::size_t> pick(0, e.members.size() - 1);
                          return PosteriorSample{e.members[pick(rng)], std::nullopt};
                        },
                        [&](const McDropoutPosterior& d) {
                          return PosteriorSample{d.map, sample_dropout_mask(net, rng, d.rates)};
                        },
                        [&](const LaplacePosterior& l) {
                          std::vector<float> mean = l.map->flatten();
                          const std::vector<float> var = l.variance->flatten();
                          std::normal_distribution<double> normal(0.0, 1.0);
                          for (std::size_t i = 0; i < mean.size(); ++i) {
                            const double z = normal(rng);
                            if (var[i] > 0.0f) mean[i] = static_cast<float>(mean[i] + std::sqrt(static_cast<double>(var[i])) * z);
                          }
                          auto w = std::make_shared<WeightSet>(*l.map);
                          w->assign_flat(mean);
                          return PosteriorSample{std::move(w), std::nullopt};
                        },
                    },
                    posterior);
}

std::size_t ensemble_size(const WeightPosterior& posterior) {
  if (const auto* e = std::get_if<EnsemblePosterior>(&posterior)) return e->members.size();
  return 0;
}

PosteriorSample ensemble_member(const WeightPosterior& posterior, std::size_t m) {
  const auto* e = std::get_if<EnsemblePosterior>(&posterior);
  if (!e) throw InvalidArgument("member enumeration requires an ensemble posterior");
  if (m >= e->members.size()) throw InvalidArgument("ensemble member index out of range");
  return PosteriorSample{e->members[m], std::nullopt};
}

std::optional<WeightsPtr> map_weights(const WeightPosterior& posterior) {
  return std::visit(overloaded{
                        [](const EnsemblePosterior&) -> std::optional<WeightsPtr> { return std::nullopt; },
                        [](const McDropoutPosterior& d) -> std::optional<WeightsPtr> { return d.map; },
                        [](const LaplacePosterior& l) -> std::optional<WeightsPtr> { return l.map; },
                    },
                    posterior);
}

std::vector<double> diagonal_laplace_variance(
    std::size_t num_params, std::size_t num_examples,
    const std::function<void(std::size_t, std::span<double>)>& example_gradient, double prior_precision) {
  if (!(prior_precision > 0.0)) throw InvalidArgument("prior_precision must be positive");
  std::vector<double> fisher(num_params, 0.0);
  std::vector<double> g(num_params);
  for (std::size_t n = 0; n < num_examples; ++n) {
    std::fill(g.begin(), g.end(), 0.0);
    example_gradient(n, g);
    for (std::size_t i = 0; i < num_params; ++i) {
      if (!std::isfinite(g[i])) throw NumericalError("non-finite gradient at example " + std::to_string(n));
      fisher[i] += g[i] * g[i];
    }
  }
  for (double& f : fisher) f = 1.0 / (f + prior_precision);
  return fisher;
}

WeightPosterior fit_diagonal_laplace(const Network& net, const WeightSet& map_w, std::span<const LabeledImage> data,
                                     double prior_precision) {
  check_weights(net, map_w);
  const auto variance = diagonal_laplace_variance(
      map_w.parameter_count(), data.size(),
      [&](std::size_t n, std::span<double> out) {
        const ForwardTrace trace = forward_trace(net, map_w, data[n].image);
        WeightSet grads;
        backward(net, map_w, trace, cross_entropy_grad(trace.logits(), data[n].label), nullptr, &grads, false);
        const std::vector<float> flat = grads.flatten();
        std::copy(flat.begin(), flat.end(), out.begin());
      },
      prior_precision);
  auto var = std::make_shared<WeightSet>(zero_weights(net));
  std::vector<float> v(variance.begin(), variance.end());
  var->assign_flat(v);
  return LaplacePosterior{std::make_shared<WeightSet>(map_w), std::move(var)};
}

PredictiveStats predictive_stats(const WeightPosterior& posterior, const Network& net, const Tensor& x,
                                 std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw InvalidArgument("n_samples must be at least 1");
  const std::size_t k = net.num_classes();
  std::vector<double> sum(k, 0.0);
  std::vector<Tensor> probs;
  probs.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const PosteriorSample s = sample(posterior, net, derive_seed(seed, i));
    probs.push_back(softmax(forward(net, s.w(), x, s.mask_ptr())));
    for (std::size_t c = 0; c < k; ++c) sum[c] += probs.back()[c];
  }
  PredictiveStats out{Tensor({k}), Tensor({k})};
  const double n = static_cast<double>(n_samples);
  for (std::size_t c = 0; c < k; ++c) {
    const double mean = sum[c] / n;
    double ss = 0.0;
    for (const auto& p : probs) ss += (p[c] - mean) * (p[c] - mean);
    out.mean[c] = static_cast<float>(mean);
    out.variance[c] = n_samples > 1 ? static_cast<float>(ss / (n - 1.0)) : 0.0f;
  }
  return out;
}

}  // namespace uaix
