#include "uaix/attribution.hpp"

#include <cmath>
#include <vector>

#include "kernels.hpp"
#include "uaix/error.hpp"

namespace uaix {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_class(const Network& net, std::size_t class_index) {
  if (class_index >= net.num_classes())
    throw InvalidArgument("class index " + std::to_string(class_index) + " out of range for " +
                          std::to_string(net.num_classes()) + " classes");
}

const Tensor* mask_for(const DropoutMask* mask, std::size_t layer) {
  if (!mask) return nullptr;
  auto it = mask->layers.find(layer);
  return it == mask->layers.end() ? nullptr : &it->second;
}

Tensor lrp_elementwise(const Network& net, const WeightSet& w, const DropoutMask* mask, const Tensor& x,
                       std::size_t class_index, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("LRP epsilon must be positive");
  check_class(net, class_index);
  const ForwardTrace trace = forward_trace(net, w, x, mask);
  Tensor relevance(trace.logits().shape());
  relevance[class_index] = trace.logits()[class_index];

  for (std::size_t i = net.num_layers(); i-- > 0;) {
    const auto& layer = net.layers()[i];
    const Tensor& in = trace.activations[i];
    const Tensor* m = mask_for(mask, i);
    const bool linear = std::holds_alternative<Dense>(layer) || std::holds_alternative<Conv2d>(layer) ||
                        std::holds_alternative<AvgPool2d>(layer);
    if (linear) {
      const Tensor& z = trace.activations[i + 1];
      Tensor ratio(z.shape());
      for (std::size_t j = 0; j < z.size(); ++j) {
        const double zj = z[j];
        const double denom = zj + (zj >= 0.0 ? epsilon : -epsilon);
        ratio[j] = static_cast<float>(relevance[j] / denom);
      }
      const Tensor back = detail::layer_backward_input(layer, w.layers[i], in, ratio, m);
      Tensor next(in.shape());
      for (std::size_t j = 0; j < in.size(); ++j) next[j] = static_cast<float>(static_cast<double>(in[j]) * back[j]);
      relevance = std::move(next);
    } else if (std::holds_alternative<MaxPool2d>(layer)) {
      relevance = detail::layer_backward_input(layer, w.layers[i], in, relevance, m);
    } else {
      // ReLU, Dropout, Flatten: relevance is passed through unchanged.
      relevance = relevance.reshaped(in.shape());
    }
  }
  return relevance;
}

Tensor ig_elementwise(const Network& net, const WeightSet& w, const DropoutMask* mask, const Tensor& x,
                      std::size_t class_index, const Tensor& baseline_in, std::size_t steps) {
  if (steps == 0) throw InvalidArgument("integrated gradients needs at least one step");
  const Tensor baseline = baseline_in.empty() ? Tensor(x.shape()) : baseline_in;
  if (baseline.shape() != x.shape())
    throw ShapeError("baseline " + shape_string(baseline.shape()) + " does not match input " + shape_string(x.shape()));
  std::vector<double> acc(x.size(), 0.0);
  Tensor point(x.shape());
  for (std::size_t s = 1; s <= steps; ++s) {
    const double t = (static_cast<double>(s) - 0.5) / static_cast<double>(steps);
    for (std::size_t j = 0; j < x.size(); ++j)
      point[j] = static_cast<float>(baseline[j] + t * (static_cast<double>(x[j]) - baseline[j]));
    const Tensor g = grad_input(net, w, point, class_index, mask);
    for (std::size_t j = 0; j < x.size(); ++j) acc[j] += g[j];
  }
  Tensor out(x.shape());
  for (std::size_t j = 0; j < x.size(); ++j)
    out[j] = static_cast<float>((static_cast<double>(x[j]) - baseline[j]) * acc[j] / static_cast<double>(steps));
  return out;
}

RelevanceMap finish(Tensor elementwise, const AttributionMethod& method, std::size_t class_index) {
  if (!elementwise.all_finite()) throw NumericalError("attribution produced non-finite relevance");
  return RelevanceMap{sum_channels(elementwise), method_name(method), class_index};
}

}  // namespace

std::string method_name(const AttributionMethod& method) {
  return std::visit(overloaded{
                        [](const GradientMethod&) { return std::string("gradient"); },
                        [](const AbsGradientMethod&) { return std::string("absgradient"); },
                        [](const InputTimesGradientMethod&) { return std::string("ixg"); },
                        [](const LrpEpsilonMethod&) { return std::string("lrp-eps"); },
                        [](const IntegratedGradientsMethod&) { return std::string("ig"); },
                    },
                    method);
}

AttributionMethod parse_method(const std::string& name, double lrp_epsilon, std::size_t ig_steps) {
  if (name == "gradient") return GradientMethod{};
  if (name == "absgradient") return AbsGradientMethod{};
  if (name == "ixg") return InputTimesGradientMethod{};
  if (name == "lrp-eps") {
    if (!(lrp_epsilon > 0.0)) throw InvalidArgument("LRP epsilon must be positive");
    return LrpEpsilonMethod{lrp_epsilon};
  }
  if (name == "ig") {
    if (ig_steps == 0) throw InvalidArgument("integrated gradients needs at least one step");
    return IntegratedGradientsMethod{Tensor(), ig_steps};
  }
  throw InvalidArgument("unknown attribution method '" + name + "' (expected gradient, absgradient, ixg, lrp-eps, ig)");
}

Tensor sum_channels(const Tensor& t) {
  if (t.rank() != 3) return t;
  const std::size_t c = t.shape()[0], plane = t.shape()[1] * t.shape()[2];
  std::vector<double> acc(plane, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < plane; ++i) acc[i] += t[ch * plane + i];
  Tensor out({t.shape()[1], t.shape()[2]});
  for (std::size_t i = 0; i < plane; ++i) out[i] = static_cast<float>(acc[i]);
  return out;
}

Tensor attribute_elementwise(const AttributionMethod& method, const Network& net, const WeightSet& w,
                             const DropoutMask* mask, const Tensor& x, std::size_t class_index) {
  return std::visit(overloaded{
                        [&](const GradientMethod&) { return grad_input(net, w, x, class_index, mask); },
                        [&](const AbsGradientMethod&) {
                          Tensor g = grad_input(net, w, x, class_index, mask);
                          for (float& v : g.values()) v = std::abs(v);
                          return g;
                        },
                        [&](const InputTimesGradientMethod&) {
                          Tensor g = grad_input(net, w, x, class_index, mask);
                          for (std::size_t j = 0; j < g.size(); ++j) g[j] *= x[j];
                          return g;
                        },
                        [&](const LrpEpsilonMethod& m) {
                          return lrp_elementwise(net, w, mask, x, class_index, m.epsilon);
                        },
                        [&](const IntegratedGradientsMethod& m) {
                          return ig_elementwise(net, w, mask, x, class_index, m.baseline, m.steps);
                        },
                    },
                    method);
}

RelevanceMap attribute(const AttributionMethod& method, const Network& net, const PosteriorSample& sample,
                       const Tensor& x, std::size_t class_index) {
  return finish(attribute_elementwise(method, net, sample.w(), sample.mask_ptr(), x, class_index), method,
                class_index);
}

RelevanceMap input_times_gradient(const Network& net, const PosteriorSample& sample, const Tensor& x,
                                  std::size_t class_index) {
  return attribute(InputTimesGradientMethod{}, net, sample, x, class_index);
}

RelevanceMap lrp_epsilon(const Network& net, const PosteriorSample& sample, const Tensor& x, std::size_t class_index,
                         double epsilon) {
  return attribute(LrpEpsilonMethod{epsilon}, net, sample, x, class_index);
}

RelevanceMap integrated_gradients(const Network& net, const PosteriorSample& sample, const Tensor& x,
                                  std::size_t class_index, const Tensor& baseline, std::size_t steps) {
  return attribute(IntegratedGradientsMethod{baseline, steps}, net, sample, x, class_index);
}

}  // namespace uaix
