#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library's numerical kernels.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "uaix/network.hpp"
#include "uaix/rng.hpp"

namespace oracle {

using uaix::Network;
using uaix::Rng;
using uaix::Tensor;
using uaix::WeightSet;

Tensor random_tensor(const uaix::Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0);
WeightSet random_weights(const Network& net, Rng& rng, double scale = 0.5, double bias_scale = 0.1);

enum class NetKind { Dense, Conv, ConvMax, Any };
// Small random topology; `kind` picks the family.
Network random_net(Rng& rng, NetKind kind = NetKind::Any, std::size_t classes = 3);

// Double-precision forward pass written with explicit index loops.
std::vector<double> forward(const Network& net, const WeightSet& w, const Tensor& x,
                            const uaix::DropoutMask* mask = nullptr);

// ReLU on/off states and max-pool winners along a forward pass. Two inputs
// with equal patterns lie in the same linear region of the network.
std::vector<int> activation_pattern(const Network& net, const WeightSet& w, const Tensor& x);

// Fraction of (positive, negative) pairs ranked correctly, ties counting 1/2.
double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& positive);

// Alpha-th percentile via nth_element and linear interpolation.
double percentile(std::vector<float> values, double alpha);

// Cyclic Jacobi rotations; eigenvalues ascending.
std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a);

// Connected components of an undirected graph given by a nonzero pattern.
std::size_t component_count(const Eigen::MatrixXd& adjacency);

}  // namespace oracle
