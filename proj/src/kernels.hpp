#pragma once

// Per-layer forward and reverse kernels shared by the network core and the
// relevance propagation rules. Inputs are CHW for spatial layers. Every sum
// accumulates in double and is rounded to float once at the end.

#include "uaix/network.hpp"

namespace uaix::detail {

Tensor layer_forward(const LayerSpec& layer, const LayerParams& params, const Tensor& in, const Shape& out_shape,
                     const Tensor* mask);

// Vector-Jacobian product of the layer with respect to its input.
Tensor layer_backward_input(const LayerSpec& layer, const LayerParams& params, const Tensor& in,
                            const Tensor& grad_out, const Tensor* mask);

// Writes dL/dW and dL/db of the layer into `grads` (shaped like params).
void layer_backward_params(const LayerSpec& layer, const Tensor& in, const Tensor& grad_out, LayerParams& grads);

bool has_params(const LayerSpec& layer);

}  // namespace uaix::detail
