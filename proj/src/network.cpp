#include "uaix/network.hpp"

#include <cmath>
#include <algorithm>
#include <cstring>

#include "kernels.hpp"
#include "uaix/error.hpp"

namespace uaix {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::size_t pooled(std::size_t extent, std::size_t kernel, std::size_t stride, std::size_t layer) {
  if (kernel == 0 || stride == 0) throw ShapeError("pool kernel and stride must be positive", layer);
  if (extent < kernel) throw ShapeError("pool kernel larger than input", layer);
  return (extent - kernel) / stride + 1;
}

Shape output_shape(const LayerSpec& spec, const Shape& in, std::size_t layer) {
  auto require_chw = [&](const char* what) {
    if (in.size() != 3) throw ShapeError(std::string(what) + " expects a CHW input, got " + shape_string(in), layer);
  };
  return std::visit(
      overloaded{
          [&](const Dense& d) -> Shape {
            if (in.size() != 1 || in[0] != d.in)
              throw ShapeError("dense expects [" + std::to_string(d.in) + "], got " + shape_string(in), layer);
            if (d.out == 0) throw ShapeError("dense with zero outputs", layer);
            return {d.out};
          },
          [&](const Conv2d& c) -> Shape {
            require_chw("conv2d");
            if (in[0] != c.in_channels)
              throw ShapeError("conv2d expects " + std::to_string(c.in_channels) + " channels, got " +
                                   shape_string(in),
                               layer);
            if (c.kernel == 0 || c.stride == 0 || c.out_channels == 0)
              throw ShapeError("conv2d kernel, stride and channels must be positive", layer);
            const std::size_t h = in[1] + 2 * c.padding;
            const std::size_t w = in[2] + 2 * c.padding;
            if (h < c.kernel || w < c.kernel) throw ShapeError("conv2d kernel larger than padded input", layer);
            return {c.out_channels, (h - c.kernel) / c.stride + 1, (w - c.kernel) / c.stride + 1};
          },
          [&](const ReLU&) -> Shape { return in; },
          [&](const AvgPool2d& a) -> Shape {
            require_chw("avgpool2d");
            return {in[0], pooled(in[1], a.kernel, a.stride, layer), pooled(in[2], a.kernel, a.stride, layer)};
          },
          [&](const MaxPool2d& m) -> Shape {
            require_chw("maxpool2d");
            return {in[0], pooled(in[1], m.kernel, m.stride, layer), pooled(in[2], m.kernel, m.stride, layer)};
          },
          [&](const Flatten&) -> Shape { return {shape_size(in)}; },
          [&](const Dropout& d) -> Shape {
            if (!(d.rate >= 0.0f && d.rate < 1.0f)) throw ShapeError("dropout rate must lie in [0,1)", layer);
            return in;
          },
      },
      spec);
}

void check_mask(const Network& net, const DropoutMask& mask) {
  const auto dropout = net.dropout_layers();
  if (dropout.empty()) throw ShapeError("dropout mask given for a network without dropout layers");
  for (const auto& [layer, m] : mask.layers) {
    if (layer >= net.num_layers() || !std::holds_alternative<Dropout>(net.layers()[layer]))
      throw ShapeError("dropout mask entry for a non-dropout layer", layer);
    if (m.shape() != net.shape_before(layer))
      throw ShapeError("dropout mask shape " + shape_string(m.shape()) + " does not match activation " +
                           shape_string(net.shape_before(layer)),
                       layer);
  }
}

const Tensor* mask_for(const DropoutMask* mask, std::size_t layer) {
  if (!mask) return nullptr;
  auto it = mask->layers.find(layer);
  return it == mask->layers.end() ? nullptr : &it->second;
}

}  // namespace

std::string layer_name(const LayerSpec& layer) {
  return std::visit(overloaded{
                        [](const Dense& d) { return "dense(" + std::to_string(d.in) + "," + std::to_string(d.out) + ")"; },
                        [](const Conv2d& c) {
                          return "conv2d(" + std::to_string(c.in_channels) + "," + std::to_string(c.out_channels) +
                                 ",k" + std::to_string(c.kernel) + ")";
                        },
                        [](const ReLU&) { return std::string("relu"); },
                        [](const AvgPool2d&) { return std::string("avgpool2d"); },
                        [](const MaxPool2d&) { return std::string("maxpool2d"); },
                        [](const Flatten&) { return std::string("flatten"); },
                        [](const Dropout& d) { return std::string(d.channelwise ? "dropout2d" : "dropout"); },
                    },
                    layer);
}

Network::Network(Shape input_shape, std::vector<LayerSpec> layers)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  if (input_shape_.empty() || shape_size(input_shape_) == 0) throw ShapeError("empty network input shape");
  shapes_.push_back(input_shape_);
  for (std::size_t i = 0; i < layers_.size(); ++i) shapes_.push_back(output_shape(layers_[i], shapes_.back(), i));
  if (shapes_.back().size() != 1)
    throw ShapeError("network output must be a vector of logits, got " + shape_string(shapes_.back()));
}

std::vector<std::size_t> Network::dropout_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (std::holds_alternative<Dropout>(layers_[i])) out.push_back(i);
  return out;
}

std::size_t WeightSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<float> WeightSet::flatten() const {
  std::vector<float> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weight.values().begin(), l.weight.values().end());
    flat.insert(flat.end(), l.bias.values().begin(), l.bias.values().end());
  }
  return flat;
}

void WeightSet::assign_flat(std::span<const float> flat) {
  if (flat.size() != parameter_count())
    throw ShapeError("flat parameter vector has " + std::to_string(flat.size()) + " entries, expected " +
                     std::to_string(parameter_count()));
  std::size_t off = 0;
  for (auto& l : layers) {
    for (Tensor* t : {&l.weight, &l.bias}) {
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), t->size(), t->data());
      off += t->size();
    }
  }
}

bool bit_equal(const WeightSet& a, const WeightSet& b) noexcept {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i)
    if (!bit_equal(a.layers[i].weight, b.layers[i].weight) || !bit_equal(a.layers[i].bias, b.layers[i].bias))
      return false;
  return true;
}

WeightSet zero_weights(const Network& net) {
  WeightSet w;
  w.layers.resize(net.num_layers());
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    const auto& layer = net.layers()[i];
    if (const auto* d = std::get_if<Dense>(&layer)) {
      w.layers[i] = {Tensor({d->out, d->in}), Tensor({d->out})};
    } else if (const auto* c = std::get_if<Conv2d>(&layer)) {
      w.layers[i] = {Tensor({c->out_channels, c->in_channels, c->kernel, c->kernel}), Tensor({c->out_channels})};
    }
  }
  return w;
}

WeightSet init_weights(const Network& net, std::uint64_t seed) {
  WeightSet w = zero_weights(net);
  Rng rng(seed);
  for (auto& l : w.layers) {
    if (l.weight.empty()) continue;
    const std::size_t fan_in = l.weight.size() / l.weight.shape()[0];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (float& v : l.weight.values()) v = static_cast<float>(dist(rng));
  }
  return w;
}

void check_weights(const Network& net, const WeightSet& w) {
  if (w.layers.size() != net.num_layers())
    throw ShapeError("weight set has " + std::to_string(w.layers.size()) + " layers, network has " +
                     std::to_string(net.num_layers()));
  const WeightSet ref = zero_weights(net);
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    if (w.layers[i].weight.shape() != ref.layers[i].weight.shape() ||
        w.layers[i].bias.shape() != ref.layers[i].bias.shape())
      throw ShapeError("parameters " + shape_string(w.layers[i].weight.shape()) + "/" +
                           shape_string(w.layers[i].bias.shape()) + " do not match " + layer_name(net.layers()[i]),
                       i);
  }
}

DropoutMask keep_all_mask(const Network& net) {
  DropoutMask mask;
  for (std::size_t i : net.dropout_layers()) {
    const float rate = std::get<Dropout>(net.layers()[i]).rate;
    mask.layers.emplace(i, Tensor(net.shape_before(i), 1.0f / (1.0f - rate)));
  }
  return mask;
}

DropoutMask sample_dropout_mask(const Network& net, Rng& rng, const std::map<std::size_t, float>& rates) {
  DropoutMask mask;
  for (std::size_t i : net.dropout_layers()) {
    float rate = std::get<Dropout>(net.layers()[i]).rate;
    if (auto it = rates.find(i); it != rates.end()) rate = it->second;
    if (!(rate >= 0.0f && rate < 1.0f)) throw ShapeError("dropout rate must lie in [0,1)", i);
    const float keep_scale = 1.0f / (1.0f - rate);
    const Shape& shape = net.shape_before(i);
    Tensor m(shape);
    std::bernoulli_distribution keep(1.0 - static_cast<double>(rate));
    const bool channelwise = std::get<Dropout>(net.layers()[i]).channelwise && shape.size() == 3;
    const std::size_t block = channelwise ? shape[1] * shape[2] : 1;
    for (std::size_t start = 0; start < m.size(); start += block) {
      const float v = keep(rng) ? keep_scale : 0.0f;
      std::fill_n(m.data() + start, block, v);
    }
    mask.layers.emplace(i, std::move(m));
  }
  return mask;
}

ForwardTrace forward_trace(const Network& net, const WeightSet& w, const Tensor& x, const DropoutMask* mask) {
  if (x.shape() != net.input_shape())
    throw ShapeError("input " + shape_string(x.shape()) + " does not match network input " +
                         shape_string(net.input_shape()),
                     0);
  check_weights(net, w);
  if (mask) check_mask(net, *mask);
  ForwardTrace trace;
  trace.activations.reserve(net.num_layers() + 1);
  trace.activations.push_back(x);
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    trace.activations.push_back(detail::layer_forward(net.layers()[i], w.layers[i], trace.activations.back(),
                                                      net.shape_after(i), mask_for(mask, i)));
  }
  return trace;
}

Tensor forward(const Network& net, const WeightSet& w, const Tensor& x, const DropoutMask* mask) {
  return forward_trace(net, w, x, mask).logits();
}

Tensor backward(const Network& net, const WeightSet& w, const ForwardTrace& trace, const Tensor& upstream,
                const DropoutMask* mask, WeightSet* weight_grads, bool need_input_grad) {
  if (upstream.shape() != trace.logits().shape())
    throw ShapeError("upstream gradient " + shape_string(upstream.shape()) + " does not match logits " +
                     shape_string(trace.logits().shape()));
  if (weight_grads) *weight_grads = zero_weights(net);
  Tensor grad = upstream;
  for (std::size_t i = net.num_layers(); i-- > 0;) {
    const auto& layer = net.layers()[i];
    const Tensor& in = trace.activations[i];
    if (weight_grads && detail::has_params(layer))
      detail::layer_backward_params(layer, in, grad, weight_grads->layers[i]);
    if (i == 0 && !need_input_grad) return Tensor();
    grad = detail::layer_backward_input(layer, w.layers[i], in, grad, mask_for(mask, i));
  }
  return grad;
}

Tensor grad_input(const Network& net, const WeightSet& w, const Tensor& x, std::size_t class_index,
                  const DropoutMask* mask) {
  if (class_index >= net.num_classes())
    throw InvalidArgument("class index " + std::to_string(class_index) + " out of range for " +
                          std::to_string(net.num_classes()) + " classes");
  const ForwardTrace trace = forward_trace(net, w, x, mask);
  Tensor seed(trace.logits().shape());
  seed[class_index] = 1.0f;
  return backward(net, w, trace, seed, mask);
}

WeightSet grad_weights(const Network& net, const WeightSet& w, const Tensor& x, const Tensor& loss_grad,
                       const DropoutMask* mask) {
  const ForwardTrace trace = forward_trace(net, w, x, mask);
  WeightSet grads;
  backward(net, w, trace, loss_grad, mask, &grads);
  return grads;
}

}  // namespace uaix
