#include "uaix/uai.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "uaix/error.hpp"
#include "uaix/parallel.hpp"

namespace uaix {

void RelevanceSet::validate() const {
  if (samples.empty()) throw InvalidArgument("relevance set is empty");
  for (const auto& s : samples)
    if (s.shape() != samples.front().shape()) throw ShapeError("relevance maps in a set must share one shape");
  if (seeds.size() != samples.size()) throw InvalidArgument("relevance set needs one seed per sample");
}

std::string aggregate_label(const AggregateMap& map) {
  std::ostringstream s;
  switch (map.kind) {
    case AggregateKind::Mean:
      return "mean";
    case AggregateKind::Percentile:
      s << "p" << map.parameter;
      return s.str();
    case AggregateKind::UaiPlus:
      return "uai+";
  }
  return "unknown";
}

RelevanceSet sample_relevances(const WeightPosterior& posterior, const Network& net, const AttributionMethod& method,
                               const Tensor& x, std::size_t class_index, std::size_t n, std::uint64_t seed,
                               const SamplingOptions& options) {
  if (n == 0) throw InvalidArgument("number of relevance samples must be at least 1");
  check_posterior(net, posterior);
  const std::size_t members = ensemble_size(posterior);
  if (options.enumerate_members && members == 0)
    throw InvalidArgument("member enumeration requires an ensemble posterior");

  RelevanceSet set;
  set.input = x;
  set.class_index = class_index;
  set.method = method_name(method);
  set.posterior = posterior_tag(posterior);
  set.samples.resize(n);
  set.seeds.resize(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    PosteriorSample s;
    if (options.enumerate_members) {
      set.seeds[i] = i % members;
      s = ensemble_member(posterior, i % members);
    } else {
      set.seeds[i] = derive_seed(seed, i);
      s = sample(posterior, net, set.seeds[i]);
    }
    set.samples[i] = attribute(method, net, s, x, class_index).values;
  });
  return set;
}

AggregateMap mean_explanation(const RelevanceSet& set) {
  set.validate();
  const std::size_t d = set.samples.front().size();
  std::vector<double> acc(d, 0.0);
  for (const auto& s : set.samples)
    for (std::size_t j = 0; j < d; ++j) acc[j] += s[j];
  Tensor out(set.map_shape());
  const double n = static_cast<double>(set.size());
  for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<float>(acc[j] / n);
  return {std::move(out), AggregateKind::Mean, 0.0,
          set.group_normalized ? Normalization::Group : Normalization::Raw};
}

double interpolated_percentile(const std::vector<float>& sorted, double alpha) {
  const double pos = alpha / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= sorted.size()) return sorted[lo];
  return sorted[lo] + frac * (static_cast<double>(sorted[lo + 1]) - sorted[lo]);
}

AggregateMap uai_percentile(const RelevanceSet& set, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 100.0)) throw InvalidArgument("percentile must lie in [0,100]");
  set.validate();
  const std::size_t d = set.samples.front().size();
  Tensor out(set.map_shape());
  std::vector<float> column(set.size());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < set.size(); ++i) column[i] = set.samples[i][j];
    std::sort(column.begin(), column.end());
    out[j] = static_cast<float>(interpolated_percentile(column, alpha));
  }
  return {std::move(out), AggregateKind::Percentile, alpha,
          set.group_normalized ? Normalization::Group : Normalization::Raw};
}

RelevanceSet group_normalize(const RelevanceSet& set) {
  set.validate();
  float mx = 0.0f;
  for (const auto& s : set.samples)
    for (float v : s.values()) mx = std::max(mx, v);
  if (!(mx > 0.0f)) throw InvalidArgument("group normalization needs at least one positive relevance");
  RelevanceSet out = set;
  for (auto& s : out.samples)
    for (float& v : s.values()) v = static_cast<float>(static_cast<double>(v) / mx);
  out.group_normalized = true;
  return out;
}

AggregateMap uai_plus(const RelevanceSet& set, double epsilon, bool literal_less_than) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("UAI+ epsilon must lie in (0,1)");
  set.validate();
  if (!set.group_normalized) throw InvalidArgument("UAI+ requires a group-normalized relevance set");
  const std::size_t d = set.samples.front().size();
  Tensor out(set.map_shape());
  const double n = static_cast<double>(set.size());
  for (std::size_t j = 0; j < d; ++j) {
    std::size_t count = 0;
    for (const auto& s : set.samples) {
      const bool hit = literal_less_than ? s[j] < epsilon : s[j] > epsilon;
      if (hit) ++count;
    }
    out[j] = static_cast<float>(static_cast<double>(count) / n);
  }
  return {std::move(out), AggregateKind::UaiPlus, epsilon, Normalization::Group};
}

Tensor minmax_normalize(const Tensor& values) {
  float max_pos = 0.0f, min_neg = 0.0f;
  for (float v : values.values()) {
    max_pos = std::max(max_pos, v);
    min_neg = std::min(min_neg, v);
  }
  Tensor out = values;
  for (float& v : out.values()) {
    if (v > 0.0f)
      v = static_cast<float>(static_cast<double>(v) / max_pos);
    else if (v < 0.0f)
      v = static_cast<float>(static_cast<double>(v) / -static_cast<double>(min_neg));
  }
  return out;
}

AggregateMap minmax_normalize(const AggregateMap& map) {
  AggregateMap out = map;
  out.values = minmax_normalize(map.values);
  out.normalization = Normalization::MinMax;
  return out;
}

}  // namespace uaix
