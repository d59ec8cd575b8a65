#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "uaix/rng.hpp"
#include "uaix/tensor.hpp"

namespace uaix {

// Spatial layers operate on CHW tensors; Dense expects a rank-1 input.
struct Dense {
  std::size_t in = 0;
  std::size_t out = 0;

  friend bool operator==(const Dense&, const Dense&) = default;
};
struct Conv2d {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;

  friend bool operator==(const Conv2d&, const Conv2d&) = default;
};
struct ReLU {
  friend bool operator==(const ReLU&, const ReLU&) = default;
};
struct AvgPool2d {
  std::size_t kernel = 2;
  std::size_t stride = 2;

  friend bool operator==(const AvgPool2d&, const AvgPool2d&) = default;
};
struct MaxPool2d {
  std::size_t kernel = 2;
  std::size_t stride = 2;

  friend bool operator==(const MaxPool2d&, const MaxPool2d&) = default;
};
struct Flatten {
  friend bool operator==(const Flatten&, const Flatten&) = default;
};
// Acts as identity unless a DropoutMask supplies an entry for this layer.
// The layer index doubles as the placement id. Channel-wise dropout drops
// whole CHW feature maps.
struct Dropout {
  float rate = 0.5f;
  bool channelwise = false;

  friend bool operator==(const Dropout&, const Dropout&) = default;
};

using LayerSpec = std::variant<Dense, Conv2d, ReLU, AvgPool2d, MaxPool2d, Flatten, Dropout>;

std::string layer_name(const LayerSpec& layer);

// Layer topology with every intermediate shape resolved at construction.
class Network {
 public:
  Network(Shape input_shape, std::vector<LayerSpec> layers);

  const Shape& input_shape() const noexcept { return input_shape_; }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  std::size_t num_classes() const noexcept { return shapes_.back()[0]; }

  // Shape entering layer i; i == num_layers() gives the logits shape.
  const Shape& shape_before(std::size_t i) const { return shapes_.at(i); }
  const Shape& shape_after(std::size_t i) const { return shapes_.at(i + 1); }

  std::vector<std::size_t> dropout_layers() const;
  bool has_dropout() const { return !dropout_layers().empty(); }

  friend bool operator==(const Network&, const Network&) = default;

 private:
  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
};

// Parameters of one layer; both tensors are empty for parameter-free layers.
// Dense: weight [out x in]; Conv2d: weight [out_ch x in_ch x k x k]; bias [out].
struct LayerParams {
  Tensor weight;
  Tensor bias;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

// One concrete weight assignment for a Network, indexed by layer.
struct WeightSet {
  std::vector<LayerParams> layers;

  std::size_t parameter_count() const;
  // Parameters in layer order, weight before bias.
  std::vector<float> flatten() const;
  void assign_flat(std::span<const float> flat);

  friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

bool bit_equal(const WeightSet& a, const WeightSet& b) noexcept;

// All-zero weights with the shapes `net` requires.
WeightSet zero_weights(const Network& net);

// He-uniform fan-in initialization, zero biases.
WeightSet init_weights(const Network& net, std::uint64_t seed);

// Throws ShapeError naming the first layer whose parameters do not match.
void check_weights(const Network& net, const WeightSet& w);

// Explicit dropout realizations keyed by layer index. Entries are 0 for
// dropped units and 1/(1-rate) for kept ones.
struct DropoutMask {
  std::map<std::size_t, Tensor> layers;

  friend bool operator==(const DropoutMask&, const DropoutMask&) = default;
};

// Keeps every unit, with the inverted-dropout scale of each layer's rate.
DropoutMask keep_all_mask(const Network& net);

// Fresh Bernoulli mask per dropout layer. `rates` overrides the per-layer
// rate from the topology where present.
DropoutMask sample_dropout_mask(const Network& net, Rng& rng, const std::map<std::size_t, float>& rates = {});

// Activations recorded during a forward pass: entry i is the input to
// layer i and the last entry is the logits.
struct ForwardTrace {
  std::vector<Tensor> activations;

  const Tensor& logits() const { return activations.back(); }
};

ForwardTrace forward_trace(const Network& net, const WeightSet& w, const Tensor& x,
                           const DropoutMask* mask = nullptr);

Tensor forward(const Network& net, const WeightSet& w, const Tensor& x, const DropoutMask* mask = nullptr);

// Reverse pass from `upstream` = dL/dlogits. Returns dL/dx; when
// `weight_grads` is non-null it receives dL/dW with the layout of `w`.
// With need_input_grad == false the first layer's input product is skipped
// and an empty tensor is returned.
Tensor backward(const Network& net, const WeightSet& w, const ForwardTrace& trace, const Tensor& upstream,
                const DropoutMask* mask = nullptr, WeightSet* weight_grads = nullptr, bool need_input_grad = true);

// d logit[class_index] / dx. ReLU has derivative 0 at exactly 0.
Tensor grad_input(const Network& net, const WeightSet& w, const Tensor& x, std::size_t class_index,
                  const DropoutMask* mask = nullptr);

// dL/dW for a given dL/dlogits.
WeightSet grad_weights(const Network& net, const WeightSet& w, const Tensor& x, const Tensor& loss_grad,
                       const DropoutMask* mask = nullptr);

}  // namespace uaix
