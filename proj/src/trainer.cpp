#include "uaix/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace uaix {
namespace {

std::size_t argmax(const Tensor& t) {
  return static_cast<std::size_t>(std::max_element(t.values().begin(), t.values().end()) - t.values().begin());
}

struct BatchTotals {
  double loss = 0.0;
  std::size_t correct = 0;
};

// Accumulates per-example cross-entropy gradients into `acc` (flat, double).
BatchTotals accumulate_batch(const Network& net, const WeightSet& w, std::span<const LabeledImage> batch,
                             std::span<const DropoutMask> masks, std::vector<double>& acc) {
  BatchTotals totals;
  WeightSet grads;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const DropoutMask* mask = masks.empty() ? nullptr : &masks[n];
    const ForwardTrace trace = forward_trace(net, w, batch[n].image, mask);
    totals.loss += cross_entropy(trace.logits(), batch[n].label);
    if (argmax(trace.logits()) == batch[n].label) ++totals.correct;
    backward(net, w, trace, cross_entropy_grad(trace.logits(), batch[n].label), mask, &grads, false);
    std::size_t off = 0;
    for (const auto& l : grads.layers) {
      for (const Tensor* t : {&l.weight, &l.bias}) {
        for (float v : t->values()) acc[off++] += v;
      }
    }
  }
  return totals;
}

}  // namespace

void TrainConfig::validate(std::size_t dataset_size) const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0,1)");
  if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
  if (batch_size > dataset_size) throw InvalidArgument("batch_size exceeds dataset size");
  if (lr_step == 0) throw InvalidArgument("lr_step must be positive");
  if (!(lr_gamma > 0.0 && lr_gamma <= 1.0)) throw InvalidArgument("lr_gamma must lie in (0,1]");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("weight_decay must be nonnegative");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) throw InvalidArgument("holdout_fraction must lie in [0,1)");
}

Tensor softmax(const Tensor& logits) {
  const float mx = *std::max_element(logits.values().begin(), logits.values().end());
  std::vector<double> e(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(static_cast<double>(logits[i]) - mx);
    sum += e[i];
  }
  Tensor out(logits.shape());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = static_cast<float>(e[i] / sum);
  return out;
}

double cross_entropy(const Tensor& logits, std::size_t label) {
  if (logits.size() < 2) throw InvalidArgument("cross-entropy needs at least two classes");
  if (label >= logits.size()) throw InvalidArgument("label " + std::to_string(label) + " out of range");
  const double mx = *std::max_element(logits.values().begin(), logits.values().end());
  double sum = 0.0;
  for (float v : logits.values()) sum += std::exp(static_cast<double>(v) - mx);
  return std::log(sum) - (static_cast<double>(logits[label]) - mx);
}

Tensor cross_entropy_grad(const Tensor& logits, std::size_t label) {
  if (label >= logits.size()) throw InvalidArgument("label " + std::to_string(label) + " out of range");
  Tensor g = softmax(logits);
  g[label] -= 1.0f;
  return g;
}

double learning_rate_at(const TrainConfig& cfg, std::size_t epoch) {
  const std::size_t decays = epoch / cfg.lr_step;
  double lr = cfg.learning_rate;
  for (std::size_t i = 0; i < decays; ++i) lr *= cfg.lr_gamma;
  return lr;
}

WeightSet objective_gradient(const Network& net, const WeightSet& w, std::span<const LabeledImage> batch,
                             double weight_decay, std::span<const DropoutMask> masks) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  if (!masks.empty() && masks.size() != batch.size()) throw InvalidArgument("one dropout mask per example required");
  std::vector<double> acc(w.parameter_count(), 0.0);
  accumulate_batch(net, w, batch, masks, acc);
  const std::vector<float> params = w.flatten();
  std::vector<float> g(acc.size());
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    double v = acc[i] * inv;
    if (weight_decay != 0.0) v += weight_decay * params[i];
    g[i] = static_cast<float>(v);
  }
  WeightSet out = zero_weights(net);
  out.assign_flat(g);
  return out;
}

double accuracy(const Network& net, const WeightSet& w, std::span<const LabeledImage> data) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t correct = 0;
  for (const auto& ex : data)
    if (argmax(forward(net, w, ex.image)) == ex.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double mean_loss(const Network& net, const WeightSet& w, std::span<const LabeledImage> data) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const auto& ex : data) sum += cross_entropy(forward(net, w, ex.image), ex.label);
  return sum / static_cast<double>(data.size());
}

TrainResult train(const Network& net, const WeightSet& init, std::span<const LabeledImage> data,
                  const TrainConfig& cfg) {
  if (data.empty()) throw InvalidArgument("training set is empty");
  cfg.validate(data.size());
  check_weights(net, init);

  const std::size_t heldout = static_cast<std::size_t>(std::floor(static_cast<double>(data.size()) * cfg.holdout_fraction));
  const auto train_set = data.first(data.size() - heldout);
  const auto heldout_set = data.last(heldout);
  const std::size_t batch_size = std::min(cfg.batch_size, train_set.size());

  TrainResult result{init, {}};
  std::vector<float> params = init.flatten();
  std::vector<double> velocity(params.size(), 0.0);
  std::vector<double> acc(params.size());
  std::vector<std::size_t> order(train_set.size());
  std::vector<LabeledImage> batch;
  std::vector<DropoutMask> masks;
  const bool dropout = net.has_dropout();
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate_at(cfg, epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(cfg.seed, Stream::Shuffle, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    std::size_t epoch_correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size, ++step) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      batch.clear();
      masks.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(train_set[order[i]]);
        if (dropout) {
          Rng mask_rng(derive_seed(cfg.seed, Stream::Dropout, step * batch_size + (i - start)));
          masks.push_back(sample_dropout_mask(net, mask_rng));
        }
      }
      std::fill(acc.begin(), acc.end(), 0.0);
      const BatchTotals totals = accumulate_batch(net, result.weights, batch, masks, acc);
      if (!std::isfinite(totals.loss)) throw TrainingDiverged(epoch, step);
      epoch_loss += totals.loss;
      epoch_correct += totals.correct;

      const double inv = 1.0 / static_cast<double>(batch.size());
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = acc[i] * inv + cfg.weight_decay * params[i];
        velocity[i] = cfg.momentum * velocity[i] + g;
        params[i] = static_cast<float>(params[i] - lr * velocity[i]);
      }
      result.weights.assign_flat(params);
    }

    EpochStats stats;
    stats.learning_rate = lr;
    stats.train_loss = epoch_loss / static_cast<double>(train_set.size());
    stats.train_accuracy = static_cast<double>(epoch_correct) / static_cast<double>(train_set.size());
    stats.heldout_loss = mean_loss(net, result.weights, heldout_set);
    stats.heldout_accuracy = accuracy(net, result.weights, heldout_set);
    result.history.epochs.push_back(stats);
  }
  return result;
}

}  // namespace uaix
