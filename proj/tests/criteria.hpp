#pragma once

// Property checks shared by the unit tests and the acceptance runner. Each
// returns whether it held plus a short account of the worst case seen.

#include <cstdint>
#include <string>
#include <utility>

#include "uaix/network.hpp"

namespace criteria {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// A single network whose logits are the average of the members' logits,
// built by stacking the members side by side.
std::pair<uaix::Network, uaix::WeightSet> averaged_network(const uaix::Network& net,
                                                            const std::vector<uaix::WeightSet>& members);

Outcome ensemble_mean_equivalence(std::uint64_t seed);       // 5 members, 20 inputs
Outcome ig_completeness(std::uint64_t seed);                 // 50 pairs at 256 steps, linear nets at 1 step
Outcome lrp_conservation(std::uint64_t seed);                // sum rule and agreement with input x gradient
Outcome percentile_oracle(std::uint64_t seed, int sets);     // against nth_element oracle, monotone in alpha
Outcome spectral_properties(std::uint64_t seed);             // zero eigenvalues, eigengap, planted partitions
Outcome gradient_check(std::uint64_t seed, int nets);        // finite differences, input and weights
Outcome metric_identities(std::uint64_t seed, int pairs);    // AUC transforms and negation, MA scaling
Outcome round_trips(std::uint64_t seed);                     // every persisted type

}  // namespace criteria
