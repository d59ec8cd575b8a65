#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include "uaix/network.hpp"
#include "uaix/posterior.hpp"

namespace uaix {

struct GradientMethod {};
struct AbsGradientMethod {};
struct InputTimesGradientMethod {};
struct LrpEpsilonMethod {
  double epsilon = 1e-6;
};
// An empty baseline means the all-zero reference input.
struct IntegratedGradientsMethod {
  Tensor baseline;
  std::size_t steps = 32;
};

using AttributionMethod =
    std::variant<GradientMethod, AbsGradientMethod, InputTimesGradientMethod, LrpEpsilonMethod, IntegratedGradientsMethod>;

// CLI names: gradient, absgradient, ixg, lrp-eps, ig.
std::string method_name(const AttributionMethod& method);
AttributionMethod parse_method(const std::string& name, double lrp_epsilon = 1e-6, std::size_t ig_steps = 32);

// Relevance over the spatial grid of the input (channels summed).
struct RelevanceMap {
  Tensor values;
  std::string method;
  std::size_t class_index = 0;
};

// Sum over the leading channel axis of a CHW tensor; identity otherwise.
Tensor sum_channels(const Tensor& t);

// Raw per-input-element relevance, before channel summation.
Tensor attribute_elementwise(const AttributionMethod& method, const Network& net, const WeightSet& w,
                             const DropoutMask* mask, const Tensor& x, std::size_t class_index);

RelevanceMap attribute(const AttributionMethod& method, const Network& net, const PosteriorSample& sample,
                       const Tensor& x, std::size_t class_index);

RelevanceMap input_times_gradient(const Network& net, const PosteriorSample& sample, const Tensor& x,
                                  std::size_t class_index);

// Epsilon-rule relevance propagation. Linear layers (dense, conv, average
// pooling) redistribute R_i in proportion to z_ij / (z_i + eps*sign(z_i));
// ReLU, dropout and flatten pass relevance through; max pooling routes it to
// the first maximal input.
RelevanceMap lrp_epsilon(const Network& net, const PosteriorSample& sample, const Tensor& x, std::size_t class_index,
                         double epsilon);

// Midpoint Riemann approximation of the path integral from `baseline` to x.
RelevanceMap integrated_gradients(const Network& net, const PosteriorSample& sample, const Tensor& x,
                                  std::size_t class_index, const Tensor& baseline, std::size_t steps);

}  // namespace uaix
