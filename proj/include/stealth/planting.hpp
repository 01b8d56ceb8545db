#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stealth/attack.hpp"
#include "stealth/model.hpp"

namespace stealth {

/// Neurons of a layer ordered by ascending L1 norm of their output weights
/// (their column in the next layer's weight matrix). Rank 1 = most replaceable.
struct SusceptibilityRanking {
  int layer = 0;
  std::vector<int> order;     // permutation of neuron indices
  std::vector<double> norms;  // non-decreasing along order
  std::uint64_t tie_seed = 0;
};

SusceptibilityRanking rank_neurons(const Network& net, int layer,
                                   std::uint64_t tie_seed);

/// Scenario 1: one extra neuron reading the latent layer, its gain-D output
/// added directly to the head output neuron. Requires a depth-2 head
/// (split.cut + 2 == last layer) and layers[cut+1].activation == g_kind;
/// the strictly layered schema cannot express the skip edge otherwise.
Network plant_scenario1(const Network& net, const LatentSplit& split,
                        const AttackNeuron& neuron);

/// Scenario 2: attack neuron at cut+1 plus a weight-1/bias-0 ReLU relay chain
/// through every intervening layer; the gain D (and its sign) is carried by
/// the final head connection. Intervening layers must be ReLU.
Network plant_scenario2(const Network& net, const LatentSplit& split,
                        const AttackNeuron& neuron);

/// Scenario 3 (one-neuron attack): overwrite the victim's incoming weights
/// and bias with the attack neuron's, zero its outgoing weights except the
/// connection to head_index which is set to D. Shape preserved.
Network plant_scenario3(const Network& net, int layer, int victim_index,
                        const AttackNeuron& neuron, int head_index);

struct RemovalImpact {
  double changed_fraction = 0.0;
  double max_output_deviation = 0.0;
};

/// Simulates zeroing the victim's outgoing weights; fraction of inputs whose
/// argmax prediction changes, plus the max pre-softmax output deviation.
RemovalImpact removal_impact(const Network& net, int layer, int victim_index,
                             std::span<const Vec> inputs);

}  // namespace stealth
