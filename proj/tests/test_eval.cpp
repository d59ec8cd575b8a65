#include <doctest.h>

#include <cmath>

#include "criteria.hpp"
#include "oracles.hpp"
#include "uaix/error.hpp"
#include "uaix/eval.hpp"

using namespace uaix;

namespace {

ObjectMask mask_of(std::vector<float> v, std::size_t h, std::size_t w) { return ObjectMask(Tensor({h, w}, std::move(v))); }

}  // namespace

TEST_CASE("object masks need both classes and binary values") {
  CHECK_THROWS_AS(ObjectMask(Tensor({2, 2}, 1.0f)), InvalidArgument);
  CHECK_THROWS_AS(ObjectMask(Tensor({2, 2}, 0.0f)), InvalidArgument);
  CHECK_THROWS_AS(ObjectMask(Tensor({2}, {0.5f, 1.0f})), InvalidArgument);
  CHECK(mask_of({1, 0, 0, 0}, 2, 2).area_fraction() == 0.25);
}

TEST_CASE("AUC endpoints and tie handling") {
  const ObjectMask m = mask_of({1, 1, 0, 0, 0, 0}, 2, 3);
  CHECK(auc_localization(m.values(), m) == 1.0);
  Tensor inv = m.values();
  for (float& v : inv.values()) v = 1.0f - v;
  CHECK(auc_localization(inv, m) == 0.0);
  CHECK(auc_localization(Tensor({2, 3}, 0.7f), m) == 0.5);
  CHECK_THROWS_AS(auc_localization(Tensor({3, 2}), m), ShapeError);
}

TEST_CASE("AUC agrees with pairwise counting") {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    Tensor mv({6, 7});
    for (std::size_t i = 0; i < mv.size(); ++i) mv[i] = i % 3 == 0 ? 1.0f : 0.0f;
    const ObjectMask m(mv);
    Tensor s = oracle::random_tensor({6, 7}, rng);
    for (float& v : s.values()) v = std::round(v * 3.0f);
    std::vector<double> scores(s.values().begin(), s.values().end());
    std::vector<bool> pos;
    for (float v : mv.values()) pos.push_back(v != 0.0f);
    CHECK(auc_localization(s, m) == doctest::Approx(oracle::pairwise_auc(scores, pos)).epsilon(1e-12));
  }
}

TEST_CASE("mass accuracy filters negatives and flags zero mass") {
  const ObjectMask m = mask_of({1, 1, 0, 0}, 2, 2);
  CHECK(*mass_accuracy(Tensor({2, 2}, {3, 1, 2, -5}), m) == doctest::Approx(2.0 / 3.0));
  CHECK(*mass_accuracy(Tensor({2, 2}, {1, 1, 0, 0}), m) == 1.0);
  CHECK_FALSE(mass_accuracy(Tensor({2, 2}, {-1, 0, -2, 0}), m));
  const ObjectMask quarter = mask_of({1, 0, 0, 0}, 2, 2);
  CHECK(*mass_accuracy(Tensor({2, 2}, 0.3f), quarter) == doctest::Approx(0.25));
}

TEST_CASE("metric identities hold exactly") {
  const auto r = criteria::metric_identities(51, 100);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("summaries count undefined values separately") {
  const std::vector<std::optional<double>> v{1.0, std::nullopt, 3.0};
  const MetricSummary s = summarize(v);
  CHECK(s.mean == 2.0);
  CHECK(s.sd == doctest::Approx(std::sqrt(2.0)));
  CHECK(s.count == 2);
  CHECK(s.excluded == 1);
}

TEST_CASE("random relevance scores about 0.5 AUC and the object area in MA") {
  Rng rng(7);
  Dataset data;
  double area = 0.0;
  for (int i = 0; i < 300; ++i) {
    Tensor mv({16, 16});
    for (std::size_t y = 4; y < 12; ++y)
      for (std::size_t x = 4; x < 12; ++x) mv[y * 16 + x] = 1.0f;
    data.push_back({Tensor({1, 16, 16}), 0, ObjectMask(mv)});
    area += 0.25;
  }
  Network net({1, 16, 16}, {Flatten{}, Dense{256, 2}});
  EnsemblePosterior ens{{std::make_shared<const WeightSet>(init_weights(net, 1))}};
  EvalConfig cfg;
  cfg.samples = 2;
  const MetricReport r = evaluate_suite(ens, net, GradientMethod{}, data, cfg);
  CHECK(r.row("Random").auc_summary.mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(r.row("Random").ma_summary.mean == doctest::Approx(0.25).epsilon(0.02));
  CHECK(r.mean_mask_fraction == doctest::Approx(area / 300.0));
}

TEST_CASE("evaluation suite: rows, absent baseline, N = 1 collapse, determinism") {
  Rng rng(2);
  Dataset data;
  for (int i = 0; i < 6; ++i) {
    Tensor mv({5, 5});
    for (std::size_t j = 0; j < 25; ++j) mv[j] = (j + static_cast<std::size_t>(i)) % 4 == 0 ? 1.0f : 0.0f;
    data.push_back({oracle::random_tensor({1, 5, 5}, rng, 0.0, 1.0), static_cast<std::size_t>(i % 2), ObjectMask(mv)});
  }
  Network net({1, 5, 5}, {Flatten{}, Dense{25, 6}, ReLU{}, Dropout{0.5f}, Dense{6, 2}});
  McDropoutPosterior d{std::make_shared<const WeightSet>(oracle::random_weights(net, rng)), {}};
  EvalConfig cfg;
  cfg.samples = 1;
  cfg.seed = 4;
  const MetricReport one = evaluate_suite(d, net, InputTimesGradientMethod{}, data, cfg);
  CHECK(one.rows.size() == 6);
  CHECK(one.row("Baseline").available);
  const auto& avg = one.row("Average").auc;
  for (const char* name : {"Intersection (alpha=5)", "Union (alpha=95)"})
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(one.row(name).auc[i] == avg[i]);

  cfg.samples = 8;
  cfg.threads = 3;
  const MetricReport a = evaluate_suite(d, net, InputTimesGradientMethod{}, data, cfg);
  cfg.threads = 1;
  const MetricReport b = evaluate_suite(d, net, InputTimesGradientMethod{}, data, cfg);
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    CHECK(a.rows[r].auc == b.rows[r].auc);
    CHECK(a.rows[r].ma == b.rows[r].ma);
  }
  for (const auto& row : a.rows)
    for (const auto& v : row.auc)
      if (v) CHECK((*v >= 0.0 && *v <= 1.0));

  Network plain({1, 5, 5}, {Flatten{}, Dense{25, 2}});
  EnsemblePosterior e{{std::make_shared<const WeightSet>(oracle::random_weights(plain, rng))}};
  const MetricReport er = evaluate_suite(e, plain, GradientMethod{}, data, cfg);
  CHECK_FALSE(er.row("Baseline").available);
  CHECK(er.posterior == "ensemble");

  Dataset unmasked = data;
  unmasked[0].mask.reset();
  CHECK_THROWS_AS(evaluate_suite(d, net, GradientMethod{}, unmasked, cfg), InvalidArgument);
  CHECK_THROWS_AS(evaluate_suite(d, net, GradientMethod{}, Dataset{}, cfg), InvalidArgument);
}
