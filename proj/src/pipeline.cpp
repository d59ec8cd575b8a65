#include "uaix/pipeline.hpp"

#include <chrono>
#include <ostream>

#include "uaix/error.hpp"
#include "uaix/heatmap.hpp"
#include "uaix/parallel.hpp"
#include "uaix/report.hpp"
#include "uaix/synth.hpp"

namespace uaix {
namespace {

namespace fs = std::filesystem;

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.out);
  fs::create_directories(dir);
  return dir;
}

void say(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << std::endl;
}

SynthConfig data_config(const RunConfig& cfg) {
  SynthConfig s = cfg.synth;
  s.seed = derive_seed(cfg.seed, Stream::Data);
  return s;
}

const LabeledImage& explained_image(const RunConfig& cfg, const Dataset& test) {
  if (cfg.image >= test.size()) throw InvalidArgument("eval.image " + std::to_string(cfg.image) + " is out of range");
  return test[cfg.image];
}

RelevanceSet sample_for_image(const RunConfig& cfg, const Model& model, const LabeledImage& ex, std::size_t n) {
  return sample_relevances(model.posterior, model.net, configured_method(cfg), ex.image, ex.label, n,
                           derive_seed(cfg.seed, Stream::Relevance, cfg.image),
                           SamplingOptions{cfg.enumerate_members, cfg.threads});
}

std::string alpha_label(double alpha) {
  AggregateMap m;
  m.kind = AggregateKind::Percentile;
  m.parameter = alpha;
  return aggregate_label(m);
}

// Mean, each percentile and UAI+ of `set`, as heatmaps plus one container.
void write_aggregates(const RunConfig& cfg, const RelevanceSet& set, const fs::path& dir, const std::string& prefix,
                      std::ostream* log) {
  TensorContainer c;
  c.put_text("kind", "aggregates");
  std::vector<std::pair<std::string, AggregateMap>> maps;
  maps.emplace_back("mean", mean_explanation(set));
  for (double a : cfg.alphas) maps.emplace_back(alpha_label(a), uai_percentile(set, a));
  for (const auto& [name, map] : maps) {
    put_aggregate(c, name, map);
    export_heatmap(minmax_normalize(map), dir / (prefix + name + ".ppm"), HeatmapMode::Seismic);
  }
  bool positive = false;
  for (const auto& s : set.samples)
    for (float v : s.values()) positive = positive || v > 0.0f;
  if (positive) {
    const AggregateMap plus = uai_plus(group_normalize(set), cfg.epsilon, cfg.literal_less_than);
    put_aggregate(c, "uaiplus", plus);
    export_heatmap(plus, dir / (prefix + "uaiplus.ppm"), HeatmapMode::Overlay, set.input, cfg.epsilon);
  } else {
    say(log, "no positive relevance in any sample; UAI+ skipped");
  }
  if (set.input.rank() == 3 || set.input.rank() == 2) write_ppm(dir / (prefix + "input.ppm"), input_image(set.input));
  c.save(dir / (prefix + "aggregates.uaix"));
}

void write_clusters(const SpectralResult& result, const fs::path& dir, const std::string& prefix) {
  write_text_file(dir / (prefix + "spray.txt"), format_spray_report(result));
  for (std::size_t k = 0; k < result.k; ++k) {
    AggregateMap m{result.cluster_means[k], AggregateKind::Mean, 0.0, Normalization::Raw};
    export_heatmap(minmax_normalize(m), dir / (prefix + "cluster" + std::to_string(k) + ".ppm"), HeatmapMode::Seismic);
  }
}

SprayParams spray_params(const RunConfig& cfg) {
  SprayParams p = cfg.spray;
  p.seed = cfg.seed;
  return p;
}

}  // namespace

Network build_network(const RunConfig& cfg, bool with_dropout) {
  const std::size_t c = cfg.synth.channels, s = cfg.synth.image_size, k = cfg.synth.num_classes;
  std::vector<LayerSpec> l;
  if (cfg.arch == "lenet") {
    l = {Conv2d{c, 6, 5}, ReLU{}, AvgPool2d{}, Conv2d{6, 16, 5}, ReLU{}, AvgPool2d{}};
    if (with_dropout) l.push_back(Dropout{cfg.conv_dropout, true});
    l.push_back(Flatten{});
    l.push_back(Dense{16 * 4 * 4, 120});
    l.push_back(ReLU{});
    if (with_dropout) l.push_back(Dropout{cfg.dense_dropout});
    l.push_back(Dense{120, 84});
    l.push_back(ReLU{});
    if (with_dropout) l.push_back(Dropout{cfg.dense_dropout});
    l.push_back(Dense{84, k});
  } else if (cfg.arch == "mlp") {
    l = {Flatten{}, Dense{c * s * s, cfg.hidden}, ReLU{}};
    if (with_dropout) l.push_back(Dropout{cfg.dense_dropout});
    l.push_back(Dense{cfg.hidden, k});
  } else {
    throw InvalidArgument("unknown architecture '" + cfg.arch + "'");
  }
  return Network({c, s, s}, std::move(l));
}

Dataset train_split(const RunConfig& cfg) { return generate(data_config(cfg), cfg.train_size, 0); }

Dataset test_split(const RunConfig& cfg) { return generate(data_config(cfg), cfg.test_size, cfg.train_size); }

TrainedPosterior train_posterior(const RunConfig& cfg, const std::string& variant, const Dataset& train_data,
                                 std::ostream* log) {
  Stopwatch clock;
  if (variant == "ensemble") {
    Network net = build_network(cfg, false);
    TrainConfig tc = cfg.trainer;
    tc.epochs = cfg.member_epochs;
    tc.lr_step = cfg.member_lr_step;
    std::vector<TrainResult> results(cfg.members);
    parallel_for(cfg.members, cfg.threads, [&](std::size_t m) {
      TrainConfig mc = tc;
      mc.seed = derive_seed(cfg.seed, Stream::Ensemble, m);
      results[m] = train(net, init_weights(net, derive_seed(mc.seed, Stream::Init)), train_data, mc);
    });
    TrainedPosterior out{net, EnsemblePosterior{}, {}};
    auto& members = std::get<EnsemblePosterior>(out.posterior).members;
    for (std::size_t m = 0; m < results.size(); ++m) {
      say(log, "ensemble member " + std::to_string(m) + ": held-out accuracy " +
                   format_number(results[m].history.epochs.back().heldout_accuracy, 4));
      members.push_back(std::make_shared<const WeightSet>(std::move(results[m].weights)));
      out.histories.push_back(std::move(results[m].history));
    }
    say(log, "trained " + std::to_string(cfg.members) + " members in " + format_number(clock.seconds(), 1) + " s");
    return out;
  }
  if (variant != "dropout" && variant != "laplace") throw InvalidArgument("unknown posterior variant '" + variant + "'");

  Network net = build_network(cfg, variant == "dropout");
  TrainConfig tc = cfg.trainer;
  tc.seed = derive_seed(cfg.seed, Stream::Posterior);
  TrainResult r = train(net, init_weights(net, derive_seed(tc.seed, Stream::Init)), train_data, tc);
  say(log, variant + " network: held-out accuracy " + format_number(r.history.epochs.back().heldout_accuracy, 4) + " after " +
               format_number(clock.seconds(), 1) + " s");
  auto map = std::make_shared<const WeightSet>(std::move(r.weights));
  TrainedPosterior out{net, McDropoutPosterior{map, {}}, {std::move(r.history)}};
  if (variant == "laplace") {
    const std::size_t n = std::min(cfg.laplace_examples, train_data.size());
    out.posterior = fit_diagonal_laplace(net, *map, std::span(train_data).first(n), cfg.prior_precision);
    say(log, "fitted diagonal Laplace on " + std::to_string(n) + " examples");
  }
  return out;
}

AttributionMethod configured_method(const RunConfig& cfg) { return parse_method(cfg.method, cfg.lrp_epsilon, cfg.ig_steps); }

EvalConfig configured_eval(const RunConfig& cfg) {
  EvalConfig e;
  e.alphas = cfg.alphas;
  e.uai_epsilon = cfg.epsilon;
  e.literal_less_than = cfg.literal_less_than;
  e.samples = cfg.samples;
  e.seed = cfg.seed;
  e.enumerate_members = cfg.enumerate_members;
  e.threads = cfg.threads;
  return e;
}

void run_train(const RunConfig& cfg, std::ostream* log) {
  validate(cfg);
  const fs::path dir = out_dir(cfg);
  write_text_file(dir / "config.txt", dump_config(cfg));
  const TrainedPosterior t = train_posterior(cfg, cfg.variant, train_split(cfg), log);
  save_posterior(dir / "posterior.uaix", t.net, t.posterior);
  write_text_file(dir / "train_log.tsv", format_train_log(t.histories));
  say(log, "wrote " + (dir / "posterior.uaix").string());
}

RelevanceSet run_explain(const RunConfig& cfg, const fs::path& posterior_path, std::ostream* log) {
  validate(cfg);
  const Model model = load_posterior(posterior_path);
  const Dataset test = test_split(cfg);
  const LabeledImage& ex = explained_image(cfg, test);
  const RelevanceSet set = sample_for_image(cfg, model, ex, cfg.samples);
  const fs::path dir = out_dir(cfg);
  save_relevance_set(dir / "relevance.uaix", set);
  write_aggregates(cfg, set, dir, "", log);
  say(log, "explained test image " + std::to_string(cfg.image) + " (class " + std::to_string(ex.label) + ") with " +
               std::to_string(set.size()) + " samples");
  return set;
}

void run_aggregate(const RunConfig& cfg, const fs::path& relevance_path, std::ostream* log) {
  validate(cfg);
  const RelevanceSet set = load_relevance_set(relevance_path);
  write_aggregates(cfg, set, out_dir(cfg), "", log);
  say(log, "aggregated " + std::to_string(set.size()) + " relevance maps");
}

SpectralResult run_cluster(const RunConfig& cfg, const fs::path& posterior_path,
                           const std::optional<fs::path>& relevance_path, std::ostream* log) {
  validate(cfg);
  RelevanceSet set;
  if (relevance_path) {
    set = load_relevance_set(*relevance_path);
  } else {
    const Model model = load_posterior(posterior_path);
    const Dataset test = test_split(cfg);
    set = sample_for_image(cfg, model, explained_image(cfg, test), cfg.spray_samples);
  }
  const SpectralResult result = spray_cluster(set, spray_params(cfg));
  write_clusters(result, out_dir(cfg), "");
  say(log, "SpRAy found " + std::to_string(result.k) + " clusters in " + std::to_string(set.size()) + " maps");
  return result;
}

MetricReport run_evaluate(const RunConfig& cfg, const fs::path& posterior_path, const std::optional<fs::path>& data_path,
                          std::ostream* log) {
  validate(cfg);
  Stopwatch clock;
  const Model model = load_posterior(posterior_path);
  const Dataset data = data_path ? load_dataset(*data_path) : test_split(cfg);
  const MetricReport report = evaluate_suite(model.posterior, model.net, configured_method(cfg), data, configured_eval(cfg));
  write_text_file(out_dir(cfg) / "metrics.tsv", format_metric_report(report));
  say(log, "evaluated " + std::to_string(data.size()) + " images in " + format_number(clock.seconds(), 1) + " s");
  return report;
}

DemoResult run_demo(const RunConfig& cfg, std::ostream* log) {
  validate(cfg);
  Stopwatch clock;
  const fs::path dir = out_dir(cfg);
  write_text_file(dir / "config.txt", dump_config(cfg));
  const Dataset train = train_split(cfg);
  const Dataset test = test_split(cfg);
  save_dataset(dir / "test_data.uaix", test);
  say(log, "generated " + std::to_string(train.size()) + " training and " + std::to_string(test.size()) + " test images");

  DemoResult result;
  std::string metrics;
  for (const auto& variant : cfg.demo_variants) {
    const TrainedPosterior t = train_posterior(cfg, variant, train, log);
    save_posterior(dir / ("posterior_" + variant + ".uaix"), t.net, t.posterior);
    write_text_file(dir / ("train_log_" + variant + ".tsv"), format_train_log(t.histories));
    const Model model{t.net, t.posterior};

    Stopwatch eval_clock;
    MetricReport report = evaluate_suite(t.posterior, t.net, configured_method(cfg), test, configured_eval(cfg));
    const std::string table = format_metric_report(report);
    metrics += metrics.empty() ? table : table.substr(table.find('\n') + 1);
    say(log, variant + " evaluation took " + format_number(eval_clock.seconds(), 1) + " s");
    if (log) *log << table;

    const LabeledImage& ex = explained_image(cfg, test);
    write_aggregates(cfg, sample_for_image(cfg, model, ex, cfg.samples), dir, variant + "_", log);
    SpectralResult clusters = spray_cluster(sample_for_image(cfg, model, ex, cfg.spray_samples), spray_params(cfg));
    write_clusters(clusters, dir, variant + "_");

    result.reports.push_back(std::move(report));
    result.clusters.push_back(std::move(clusters));
  }
  write_text_file(dir / "metrics.tsv", metrics);
  say(log, "demo finished in " + format_number(clock.seconds(), 1) + " s");
  return result;
}

}  // namespace uaix
