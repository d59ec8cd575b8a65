#include <doctest.h>

#include "criteria.hpp"
#include "oracles.hpp"
#include "uaix/error.hpp"
#include "uaix/uai.hpp"

using namespace uaix;

namespace {

RelevanceSet make_set(std::vector<std::vector<float>> maps) {
  RelevanceSet s;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::size_t n = maps[i].size();
    s.samples.emplace_back(Shape{1, n}, std::move(maps[i]));
    s.seeds.push_back(i);
  }
  return s;
}

}  // namespace

TEST_CASE("mean and percentiles on a hand example") {
  // Pixel 0 samples {4, 1, 3, 2}, pixel 1 samples {0, 0, -1, 5}.
  const RelevanceSet s = make_set({{4, 0}, {1, 0}, {3, -1}, {2, 5}});
  const Tensor mean = mean_explanation(s).values;
  CHECK(mean[0] == 2.5f);
  CHECK(mean[1] == 1.0f);
  // Sorted pixel 0: 1 2 3 4. alpha 50 -> position 1.5 -> 2.5; alpha 5 -> 0.15 -> 1.15.
  CHECK(uai_percentile(s, 50).values[0] == 2.5f);
  CHECK(uai_percentile(s, 5).values[0] == static_cast<float>(1.0 + 0.15 * 1.0));
  CHECK(uai_percentile(s, 0).values[1] == -1.0f);
  CHECK(uai_percentile(s, 100).values[1] == 5.0f);
  CHECK(uai_percentile(s, 95).kind == AggregateKind::Percentile);
  CHECK(aggregate_label(uai_percentile(s, 95)) == "p95");
  CHECK_THROWS_AS(uai_percentile(s, 101), InvalidArgument);
}

TEST_CASE("a single sample makes every aggregate coincide") {
  Rng rng(1);
  RelevanceSet s;
  s.samples.push_back(oracle::random_tensor({4, 4}, rng));
  s.seeds.push_back(0);
  for (double a : {0.0, 5.0, 50.0, 95.0, 100.0}) CHECK(bit_equal(uai_percentile(s, a).values, s.samples[0]));
  CHECK(bit_equal(mean_explanation(s).values, s.samples[0]));
}

TEST_CASE("percentiles match the independent oracle and are monotone in alpha") {
  const auto r = criteria::percentile_oracle(31, 300);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("group normalization and UAI+") {
  const RelevanceSet s = make_set({{4, 0.1f, -2}, {2, 0.3f, 0}, {1, 0, -1}});
  CHECK_THROWS_AS(uai_plus(s, 0.05), InvalidArgument);
  const RelevanceSet g = group_normalize(s);
  CHECK(g.group_normalized);
  CHECK(g.samples[0][0] == 1.0f);
  CHECK(g.samples[1][1] == 0.3f / 4.0f);
  // Exceedances of 0.05 after dividing by 4: pixel 0 all three, pixel 1 one (0.075), pixel 2 none.
  const AggregateMap plus = uai_plus(g, 0.05);
  CHECK(plus.values[0] == 1.0f);
  CHECK(plus.values[1] == static_cast<float>(1.0 / 3.0));
  CHECK(plus.values[2] == 0.0f);
  CHECK(plus.normalization == Normalization::Group);
  const AggregateMap literal = uai_plus(g, 0.05, true);
  CHECK(literal.values[0] == 0.0f);
  CHECK(literal.values[2] == 1.0f);
  CHECK_THROWS_AS(uai_plus(g, 1.5), InvalidArgument);
  CHECK_THROWS_AS(group_normalize(make_set({{-1, 0}, {0, -2}})), InvalidArgument);
}

TEST_CASE("UAI+ is invariant to a positive rescaling of all samples") {
  Rng rng(3);
  RelevanceSet s;
  for (int i = 0; i < 20; ++i) {
    s.samples.push_back(oracle::random_tensor({5, 5}, rng, -1.0, 1.0));
    s.seeds.push_back(static_cast<std::uint64_t>(i));
  }
  RelevanceSet scaled = s;
  for (auto& t : scaled.samples)
    for (float& v : t.values()) v *= 4.0f;
  CHECK(bit_equal(uai_plus(group_normalize(s), 0.05).values, uai_plus(group_normalize(scaled), 0.05).values));
}

TEST_CASE("minmax normalization keeps signs and hits the endpoints") {
  const Tensor t = minmax_normalize(Tensor({4}, {2.0f, -4.0f, 1.0f, 0.0f}));
  CHECK(t[0] == 1.0f);
  CHECK(t[1] == -1.0f);
  CHECK(t[2] == 0.5f);
  CHECK(t[3] == 0.0f);
  CHECK(minmax_normalize(Tensor({2}, {0.0f, 0.0f}))[0] == 0.0f);
}

TEST_CASE("relevance set validation") {
  RelevanceSet s;
  CHECK_THROWS_AS(mean_explanation(s), InvalidArgument);
  s = make_set({{1, 2}, {3}});
  CHECK_THROWS_AS(mean_explanation(s), ShapeError);
}

TEST_CASE("sampling relevances: seeds, enumeration and thread independence") {
  Rng rng(8);
  Network net({6}, {Dense{6, 8}, ReLU{}, Dropout{0.5f}, Dense{8, 3}});
  McDropoutPosterior d{std::make_shared<const WeightSet>(oracle::random_weights(net, rng)), {}};
  const Tensor x = oracle::random_tensor({6}, rng);
  const RelevanceSet a = sample_relevances(d, net, LrpEpsilonMethod{}, x, 1, 12, 99, {false, 1});
  const RelevanceSet b = sample_relevances(d, net, LrpEpsilonMethod{}, x, 1, 12, 99, {false, 4});
  CHECK(a.size() == 12);
  CHECK(a.seeds[3] == derive_seed(99, 3));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(bit_equal(a.samples[i], b.samples[i]));
  CHECK(a.posterior == "dropout");
  CHECK(a.method == "lrp-eps");
  CHECK_THROWS_AS(sample_relevances(d, net, LrpEpsilonMethod{}, x, 1, 4, 1, {true, 1}), InvalidArgument);
  CHECK_THROWS_AS(sample_relevances(d, net, LrpEpsilonMethod{}, x, 1, 0, 1), InvalidArgument);

  Network plain({6}, {Dense{6, 3}});
  EnsemblePosterior e;
  for (int m = 0; m < 3; ++m) e.members.push_back(std::make_shared<const WeightSet>(oracle::random_weights(plain, rng)));
  const RelevanceSet en = sample_relevances(e, plain, GradientMethod{}, x, 0, 7, 0, {true, 1});
  CHECK(en.seeds == std::vector<std::uint64_t>{0, 1, 2, 0, 1, 2, 0});
  CHECK(bit_equal(en.samples[4], en.samples[1]));
}
