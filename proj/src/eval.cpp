#include "uaix/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "uaix/error.hpp"
#include "uaix/parallel.hpp"

namespace uaix {
namespace {

void check_pair(const Tensor& relevance, const ObjectMask& mask) {
  if (relevance.shape() != mask.shape())
    throw ShapeError("relevance " + shape_string(relevance.shape()) + " does not match mask " +
                     shape_string(mask.shape()));
}

}  // namespace

RankStatistic rank_statistic(const Tensor& relevance, const ObjectMask& mask) {
  check_pair(relevance, mask);
  const std::size_t n = relevance.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return relevance[a] < relevance[b]; });
  RankStatistic stat;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && relevance[order[j]] == relevance[order[i]]) ++j;
    // Ranks i+1 .. j share their mean.
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (mask.contains(order[k])) rank_sum += midrank;
    i = j;
  }
  stat.positives = static_cast<double>(mask.object_pixels());
  stat.negatives = static_cast<double>(n - mask.object_pixels());
  stat.u = rank_sum - stat.positives * (stat.positives + 1.0) / 2.0;
  return stat;
}

double auc_localization(const Tensor& relevance, const ObjectMask& mask) { return rank_statistic(relevance, mask).auc(); }

double auc_localization(const AggregateMap& relevance, const ObjectMask& mask) {
  return auc_localization(relevance.values, mask);
}

std::optional<double> mass_accuracy(const Tensor& relevance, const ObjectMask& mask) {
  check_pair(relevance, mask);
  double inside = 0.0, total = 0.0;
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    const double r = relevance[i] > 0.0f ? relevance[i] : 0.0;
    total += r;
    if (mask.contains(i)) inside += r;
  }
  if (total == 0.0) return std::nullopt;
  return inside / total;
}

std::optional<double> mass_accuracy(const AggregateMap& relevance, const ObjectMask& mask) {
  return mass_accuracy(relevance.values, mask);
}

MetricSummary summarize(std::span<const std::optional<double>> values) {
  MetricSummary s;
  double sum = 0.0;
  for (const auto& v : values) {
    if (!v) {
      ++s.excluded;
      continue;
    }
    sum += *v;
    ++s.count;
  }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (const auto& v : values)
    if (v) ss += (*v - s.mean) * (*v - s.mean);
  s.sd = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) : 0.0;
  return s;
}

const MetricRow& MetricReport::row(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r;
  throw InvalidArgument("report has no row '" + name + "'");
}

std::string percentile_row_name(double alpha) {
  std::ostringstream s;
  s << (alpha < 50.0 ? "Intersection" : alpha > 50.0 ? "Union" : "Median") << " (alpha=" << alpha << ")";
  return s.str();
}

MetricReport evaluate_suite(const WeightPosterior& posterior, const Network& net, const AttributionMethod& method,
                            std::span<const LabeledImage> data, const EvalConfig& cfg) {
  if (data.empty()) throw InvalidArgument("evaluation set is empty");
  for (double a : cfg.alphas)
    if (!(a >= 0.0 && a <= 100.0)) throw InvalidArgument("percentile must lie in [0,100]");
  for (const auto& ex : data)
    if (!ex.mask) throw InvalidArgument("evaluation needs ground-truth masks on every image");
  check_posterior(net, posterior);

  const auto map = map_weights(posterior);
  MetricReport report;
  report.posterior = posterior_tag(posterior);
  report.method = method_name(method);
  report.images = data.size();
  report.samples = cfg.samples;

  std::vector<std::string> names{"Random", "Baseline", "Average"};
  for (double a : cfg.alphas) names.push_back(percentile_row_name(a));
  names.push_back("UAI+");
  for (const auto& n : names) {
    MetricRow row;
    row.name = n;
    row.available = !(n == "Baseline" && !map);
    row.auc.resize(data.size());
    row.ma.resize(data.size());
    report.rows.push_back(std::move(row));
  }

  parallel_for(data.size(), cfg.threads, [&](std::size_t i) {
    const LabeledImage& ex = data[i];
    const ObjectMask& mask = *ex.mask;
    auto score = [&](std::size_t row, const Tensor& values) {
      report.rows[row].auc[i] = auc_localization(values, mask);
      report.rows[row].ma[i] = mass_accuracy(values, mask);
    };

    Tensor random(mask.shape());
    Rng rng(derive_seed(cfg.seed, Stream::RandomBaseline, i));
    std::uniform_real_distribution<float> uniform(0.0f, 1.0f);
    for (float& v : random.values()) v = uniform(rng);
    score(0, random);

    if (map) score(1, attribute(method, net, PosteriorSample{*map, std::nullopt}, ex.image, ex.label).values);

    const RelevanceSet set = sample_relevances(posterior, net, method, ex.image, ex.label, cfg.samples,
                                               derive_seed(cfg.seed, Stream::Relevance, i),
                                               SamplingOptions{cfg.enumerate_members, 1});
    score(2, mean_explanation(set).values);
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) score(3 + a, uai_percentile(set, cfg.alphas[a]).values);

    const std::size_t uai_row = 3 + cfg.alphas.size();
    bool positive = false;
    for (const auto& s : set.samples)
      positive = positive || std::any_of(s.values().begin(), s.values().end(), [](float v) { return v > 0.0f; });
    if (positive) score(uai_row, uai_plus(group_normalize(set), cfg.uai_epsilon, cfg.literal_less_than).values);
  });

  double area = 0.0;
  for (const auto& ex : data) area += ex.mask->area_fraction();
  report.mean_mask_fraction = area / static_cast<double>(data.size());
  for (auto& row : report.rows) {
    if (!row.available) continue;
    row.auc_summary = summarize(row.auc);
    row.ma_summary = summarize(row.ma);
  }
  return report;
}

}  // namespace uaix
