#include <doctest.h>

#include <cmath>
#include <limits>

#include "criteria.hpp"
#include "oracles.hpp"
#include "uaix/attribution.hpp"
#include "uaix/error.hpp"

using namespace uaix;

namespace {

PosteriorSample point(const WeightSet& w) { return PosteriorSample{std::make_shared<const WeightSet>(w), std::nullopt}; }

}  // namespace

TEST_CASE("method names round-trip and bad names are rejected") {
  for (const char* name : {"gradient", "absgradient", "ixg", "lrp-eps", "ig"})
    CHECK(method_name(parse_method(name, 1e-6, 8)) == name);
  CHECK_THROWS_AS(parse_method("deeplift", 1e-6, 8), InvalidArgument);
  CHECK_THROWS_AS(parse_method("lrp-eps", 0.0, 8), InvalidArgument);
  CHECK_THROWS_AS(parse_method("ig", 1e-6, 0), InvalidArgument);
}

TEST_CASE("channel summation happens after the elementwise rule") {
  // f = x0 - x1 over a 2x1x1 input: gradient (1, -1) sums to 0, its absolute value to 2.
  Network net({2, 1, 1}, {Flatten{}, Dense{2, 1}});
  WeightSet w = zero_weights(net);
  w.layers[1].weight = Tensor({1, 2}, {1.0f, -1.0f});
  const Tensor x({2, 1, 1}, {3.0f, 2.0f});
  CHECK(attribute(GradientMethod{}, net, point(w), x, 0).values[0] == 0.0f);
  CHECK(attribute(AbsGradientMethod{}, net, point(w), x, 0).values[0] == 2.0f);
  CHECK(attribute(InputTimesGradientMethod{}, net, point(w), x, 0).values[0] == 1.0f);
  CHECK(attribute(GradientMethod{}, net, point(w), x, 0).values.shape() == Shape{1, 1});
}

TEST_CASE("LRP-epsilon on one dense layer matches hand arithmetic") {
  // z = 2*1 + 3*(-1) + 0.5 = -0.5; R_i = x_i w_i * z / (z - eps).
  Network net({2}, {Dense{2, 1}});
  WeightSet w = zero_weights(net);
  w.layers[0].weight = Tensor({1, 2}, {2.0f, 3.0f});
  w.layers[0].bias[0] = 0.5f;
  const double eps = 0.25;
  const Tensor r = lrp_epsilon(net, point(w), Tensor({2}, {1.0f, -1.0f}), 0, eps).values;
  const double z = -0.5, scale = z / (z - eps);
  CHECK(r[0] == doctest::Approx(2.0 * scale));
  CHECK(r[1] == doctest::Approx(-3.0 * scale));
}

TEST_CASE("integrated gradients uses the midpoint rule and an explicit baseline") {
  // f(x) = x^2 is not representable; use relu(x) with a kink at 0 and one step.
  Network net({1}, {ReLU{}, Dense{1, 1}});
  WeightSet w = zero_weights(net);
  w.layers[1].weight[0] = 1.0f;
  // Path from -1 to 1: midpoint 0 has relu'(0) = 0, so one step gives 0.
  CHECK(integrated_gradients(net, point(w), Tensor({1}, {1.0f}), 0, Tensor({1}, {-1.0f}), 1).values[0] == 0.0f);
  // Two steps sample t = 0.25 (x = -0.5) and 0.75 (x = 0.5): 2 * 0.5 = 1.
  CHECK(integrated_gradients(net, point(w), Tensor({1}, {1.0f}), 0, Tensor({1}, {-1.0f}), 2).values[0] == 1.0f);
  CHECK_THROWS_AS(integrated_gradients(net, point(w), Tensor({1}, {1.0f}), 0, Tensor({2}), 2), ShapeError);
}

TEST_CASE("attribution errors") {
  Network net({2}, {Dense{2, 2}});
  WeightSet w = zero_weights(net);
  CHECK_THROWS_AS(attribute(GradientMethod{}, net, point(w), Tensor({2}), 2), InvalidArgument);
  w.layers[0].weight[0] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(attribute(InputTimesGradientMethod{}, net, point(w), Tensor({2}, {1.0f, 1.0f}), 0), NumericalError);
}

TEST_CASE("mean of member attributions equals attribution of the averaged network") {
  const auto r = criteria::ensemble_mean_equivalence(21);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("averaged network computes the mean of member logits") {
  Rng rng(4);
  for (auto kind : {oracle::NetKind::Dense, oracle::NetKind::Conv, oracle::NetKind::ConvMax}) {
    const Network net = oracle::random_net(rng, kind);
    std::vector<WeightSet> members;
    for (int m = 0; m < 3; ++m) members.push_back(oracle::random_weights(net, rng));
    const auto [avg, w] = criteria::averaged_network(net, members);
    const Tensor x = oracle::random_tensor(net.input_shape(), rng);
    const auto y = oracle::forward(avg, w, x);
    for (std::size_t c = 0; c < y.size(); ++c) {
      double mean = 0.0;
      for (const auto& m : members) mean += oracle::forward(net, m, x)[c] / 3.0;
      CHECK(y[c] == doctest::Approx(mean).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("integrated gradients completeness") {
  const auto r = criteria::ig_completeness(22);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("LRP-epsilon conservation and agreement with input times gradient") {
  const auto r = criteria::lrp_conservation(23);
  INFO(r.detail);
  CHECK(r.pass);
}
