#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "uaix/error.hpp"
#include "uaix/posterior.hpp"
#include "uaix/trainer.hpp"

using namespace uaix;

namespace {

WeightsPtr shared(WeightSet w) { return std::make_shared<const WeightSet>(std::move(w)); }

}  // namespace

TEST_CASE("ensemble sampling is uniform over members and seed-determined") {
  Rng rng(1);
  Network net({3}, {Dense{3, 2}});
  EnsemblePosterior ens;
  for (int m = 0; m < 4; ++m) ens.members.push_back(shared(oracle::random_weights(net, rng)));
  std::vector<int> counts(4, 0);
  for (std::uint64_t s = 0; s < 4000; ++s) {
    const PosteriorSample a = sample(ens, net, s);
    for (int m = 0; m < 4; ++m)
      if (a.weights == ens.members[m]) ++counts[m];
    CHECK_FALSE(a.mask);
  }
  for (int c : counts) CHECK(c == doctest::Approx(1000).epsilon(0.1));
  CHECK(sample(ens, net, 42).weights == sample(ens, net, 42).weights);
  CHECK(ensemble_size(ens) == 4);
  CHECK_FALSE(map_weights(ens));
  CHECK(ensemble_member(ens, 2).weights == ens.members[2]);
  CHECK_THROWS_AS(ensemble_member(ens, 4), InvalidArgument);
  CHECK_THROWS_AS(check_posterior(net, EnsemblePosterior{}), InvalidArgument);
}

TEST_CASE("dropout posterior samples masks with overridden rates") {
  Network net({20}, {Dense{20, 40}, ReLU{}, Dropout{0.5f}, Dense{40, 2}});
  McDropoutPosterior d{shared(init_weights(net, 1)), {{2, 0.25f}}};
  check_posterior(net, d);
  std::size_t dropped = 0, total = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const PosteriorSample p = sample(d, net, s);
    REQUIRE(p.mask);
    for (float v : p.mask->layers.at(2).values()) {
      CHECK((v == 0.0f || v == doctest::Approx(1.0f / 0.75f)));
      dropped += v == 0.0f;
      ++total;
    }
  }
  CHECK(static_cast<double>(dropped) / static_cast<double>(total) == doctest::Approx(0.25).epsilon(0.05));
  CHECK(sample(d, net, 3).mask == sample(d, net, 3).mask);
  CHECK(*map_weights(d) == d.map);
  Network plain({20}, {Dense{20, 2}});
  CHECK_THROWS(check_posterior(plain, McDropoutPosterior{shared(init_weights(plain, 1)), {}}));
  CHECK_THROWS_AS(check_posterior(net, McDropoutPosterior{d.map, {{0, 0.5f}}}), ShapeError);
}

TEST_CASE("diagonal Laplace variance matches the scalar formula") {
  // Gradients g_n = n + 1 for parameter 0 and 2 for parameter 1, prior 0.5.
  const auto var = diagonal_laplace_variance(
      2, 3,
      [](std::size_t n, std::span<double> g) {
        g[0] = static_cast<double>(n) + 1.0;
        g[1] = 2.0;
      },
      0.5);
  CHECK(var[0] == doctest::Approx(1.0 / (1.0 + 4.0 + 9.0 + 0.5)));
  CHECK(var[1] == doctest::Approx(1.0 / (12.0 + 0.5)));
  CHECK_THROWS_AS(diagonal_laplace_variance(1, 1, [](std::size_t, std::span<double>) {}, 0.0), InvalidArgument);
}

TEST_CASE("fit_diagonal_laplace sums squared per-example cross-entropy gradients") {
  Rng rng(5);
  Network net({3}, {Dense{3, 4}, ReLU{}, Dense{4, 2}});
  const WeightSet w = oracle::random_weights(net, rng, 1.0, 0.2);
  Dataset data;
  for (int i = 0; i < 6; ++i) data.push_back({oracle::random_tensor({3}, rng), static_cast<std::size_t>(i % 2), {}});
  const auto post = std::get<LaplacePosterior>(fit_diagonal_laplace(net, w, data, 0.1));
  std::vector<double> fisher(w.parameter_count(), 0.0);
  for (const auto& ex : data) {
    const auto g = grad_weights(net, w, ex.image, cross_entropy_grad(forward(net, w, ex.image), ex.label)).flatten();
    for (std::size_t i = 0; i < g.size(); ++i) fisher[i] += static_cast<double>(g[i]) * g[i];
  }
  const auto v = post.variance->flatten();
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == doctest::Approx(1.0 / (fisher[i] + 0.1)).epsilon(1e-5));
  CHECK(bit_equal(*post.map, w));
}

TEST_CASE("Laplace samples have the posterior mean and variance") {
  Network net({1}, {Dense{1, 2}});
  WeightSet mean = zero_weights(net);
  mean.assign_flat(std::vector<float>{1.0f, -2.0f, 0.5f, 0.0f});
  WeightSet var = zero_weights(net);
  var.assign_flat(std::vector<float>{0.25f, 1.0f, 0.0f, 4.0f});
  LaplacePosterior lap{shared(mean), shared(var)};
  std::vector<double> s1(4, 0.0), s2(4, 0.0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto w = sample(lap, net, derive_seed(3, i)).w().flatten();
    for (std::size_t j = 0; j < 4; ++j) {
      s1[j] += w[j];
      s2[j] += static_cast<double>(w[j]) * w[j];
    }
  }
  const std::vector<double> mu{1.0, -2.0, 0.5, 0.0}, sig2{0.25, 1.0, 0.0, 4.0};
  for (std::size_t j = 0; j < 4; ++j) {
    const double m = s1[j] / n, v = s2[j] / n - m * m;
    CHECK(m == doctest::Approx(mu[j]).scale(1.0).epsilon(4.0 * std::sqrt(sig2[j] / n) + 1e-9));
    CHECK(v == doctest::Approx(sig2[j]).scale(1.0).epsilon(0.05 * sig2[j] + 1e-9));
  }
  WeightSet negative = var;
  negative.layers[0].weight[0] = -1.0f;
  CHECK_THROWS_AS(check_posterior(net, LaplacePosterior{shared(mean), shared(negative)}), InvalidArgument);
}

TEST_CASE("predictive statistics: identical members give zero variance") {
  Rng rng(9);
  Network net({3}, {Dense{3, 3}});
  const WeightsPtr w = shared(oracle::random_weights(net, rng));
  const Tensor x = oracle::random_tensor({3}, rng);
  const PredictiveStats s = predictive_stats(EnsemblePosterior{{w, w, w}}, net, x, 10, 1);
  const Tensor p = softmax(forward(net, *w, x));
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(s.mean[c] == doctest::Approx(p[c]));
    CHECK(s.variance[c] == 0.0f);
  }
  EnsemblePosterior two{{w, shared(oracle::random_weights(net, rng))}};
  const PredictiveStats t = predictive_stats(two, net, x, 50, 2);
  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) total += t.mean[c];
  CHECK(total == doctest::Approx(1.0));
  CHECK(t.variance[0] > 0.0f);
}
