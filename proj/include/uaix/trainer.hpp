#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uaix/dataset.hpp"
#include "uaix/error.hpp"
#include "uaix/network.hpp"

namespace uaix {

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::size_t lr_step = 7;
  double lr_gamma = 0.1;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  // Trailing fraction of the dataset held out for evaluation.
  double holdout_fraction = 0.1;

  void validate(std::size_t dataset_size) const;
};

struct EpochStats {
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double heldout_loss = 0.0;
  double heldout_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

struct TrainResult {
  WeightSet weights;
  TrainHistory history;
};

class TrainingDiverged : public NumericalError {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t step)
      : NumericalError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                       std::to_string(step)),
        epoch_(epoch),
        step_(step) {}
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t epoch_;
  std::size_t step_;
};

Tensor softmax(const Tensor& logits);

// -log softmax(logits)[label], max-subtracted.
double cross_entropy(const Tensor& logits, std::size_t label);

// d cross_entropy / d logits = softmax - onehot(label).
Tensor cross_entropy_grad(const Tensor& logits, std::size_t label);

// Step decay: learning_rate * lr_gamma^(epoch / lr_step).
double learning_rate_at(const TrainConfig& cfg, std::size_t epoch);

// Gradient of the batch objective: mean cross-entropy over `batch` plus
// weight_decay * W. `masks` supplies one dropout mask per example or is empty.
WeightSet objective_gradient(const Network& net, const WeightSet& w, std::span<const LabeledImage> batch,
                             double weight_decay, std::span<const DropoutMask> masks = {});

double accuracy(const Network& net, const WeightSet& w, std::span<const LabeledImage> data);
double mean_loss(const Network& net, const WeightSet& w, std::span<const LabeledImage> data);

// Mini-batch SGD with momentum on the MAP objective. Dropout layers draw a
// fresh mask per example and step from the configured seed.
TrainResult train(const Network& net, const WeightSet& init, std::span<const LabeledImage> data,
                  const TrainConfig& cfg);

}  // namespace uaix
