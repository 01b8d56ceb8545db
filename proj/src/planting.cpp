#include "stealth/planting.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "stealth/rng.hpp"

namespace stealth {

SusceptibilityRanking rank_neurons(const Network& net, int layer,
                                   std::uint64_t tie_seed) {
  const int L = static_cast<int>(net.layers.size());
  if (layer < 0 || layer >= L - 1)
    throw ShapeError("rank_neurons: layer must have a successor layer");
  const DenseLayer& next = net.layers[layer + 1];
  const int count = net.layers[layer].out_dim;

  Rng rng(tie_seed);
  std::vector<std::tuple<double, double, int>> keyed;  // (norm, tiebreak, index)
  keyed.reserve(count);
  for (int i = 0; i < count; ++i) {
    double norm = 0.0;
    for (int j = 0; j < next.out_dim; ++j) norm += std::abs(next.weights(j, i));
    keyed.emplace_back(norm, rng.next_double(), i);
  }
  std::sort(keyed.begin(), keyed.end());

  SusceptibilityRanking ranking;
  ranking.layer = layer;
  ranking.tie_seed = tie_seed;
  ranking.order.reserve(count);
  ranking.norms.reserve(count);
  for (const auto& [norm, tie, idx] : keyed) {
    ranking.order.push_back(idx);
    ranking.norms.push_back(norm);
  }
  return ranking;
}

namespace {

// Appends one column to a layer's weight matrix without disturbing existing
// rows (the new input contributes at the end of each row's accumulation).
void widen_inputs(DenseLayer& L, const Vec& new_column) {
  Mat widened(L.out_dim, L.in_dim + 1);
  widened.block(0, 0, L.out_dim, L.in_dim) = L.weights;
  widened.col(L.in_dim) = new_column;
  L.weights = std::move(widened);
  L.in_dim += 1;
}

// Appends one neuron (row + bias) to a layer.
void widen_outputs(DenseLayer& L, const Vec& row, double bias) {
  Mat widened(L.out_dim + 1, L.in_dim);
  widened.block(0, 0, L.out_dim, L.in_dim) = L.weights;
  widened.row(L.out_dim) = row.transpose();
  L.weights = std::move(widened);
  Vec biases(L.out_dim + 1);
  biases.head(L.out_dim) = L.biases;
  biases[L.out_dim] = bias;
  L.biases = std::move(biases);
  L.out_dim += 1;
}

void check_plan(const Network& net, const LatentSplit& split,
                const AttackNeuron& neuron) {
  split.validate(net);
  if (neuron.w.size() != split.latent_dim)
    throw ShapeError("plant: attack weight dimension does not match latent dim");
  if (neuron.g_kind != Activation::ReLU && neuron.g_kind != Activation::Sigmoid)
    throw DomainError("plant: attack activation must be relu or sigmoid");
}

}  // namespace

Network plant_scenario1(const Network& net, const LatentSplit& split,
                        const AttackNeuron& neuron) {
  check_plan(net, split, neuron);
  const int L = static_cast<int>(net.layers.size());
  if (split.cut + 3 != L)
    throw ShapeError("plant_scenario1: direct wiring needs a depth-2 head "
                     "(cut + 2 must be the final layer); use scenario 2");
  const int attack_layer = split.cut + 1;
  if (net.layers[attack_layer].activation != neuron.g_kind)
    throw ShapeError("plant_scenario1: layer " + std::to_string(attack_layer) +
                     " activation does not match the attack neuron's");

  Network planted = net;
  widen_outputs(planted.layers[attack_layer], neuron.w, -neuron.b);

  DenseLayer& final_layer = planted.layers[attack_layer + 1];
  Vec column = Vec::Zero(final_layer.out_dim);
  column[split.head_output_index] = neuron.D;
  widen_inputs(final_layer, column);

  planted.validate();
  return planted;
}

Network plant_scenario2(const Network& net, const LatentSplit& split,
                        const AttackNeuron& neuron) {
  check_plan(net, split, neuron);
  const int L = static_cast<int>(net.layers.size());
  if (split.cut + 2 > L - 1)
    throw ShapeError("plant_scenario2: head must contain at least one layer "
                     "between the latent and the output layer");
  const int attack_layer = split.cut + 1;
  if (net.layers[attack_layer].activation != neuron.g_kind)
    throw ShapeError("plant_scenario2: layer " + std::to_string(attack_layer) +
                     " activation does not match the attack neuron's");
  for (int k = attack_layer + 1; k < L - 1; ++k)
    if (net.layers[k].activation != Activation::ReLU)
      throw ShapeError("plant_scenario2: intervening layer " + std::to_string(k) +
                       " is not ReLU; lossless pass-through impossible");

  Network planted = net;
  widen_outputs(planted.layers[attack_layer], neuron.w, -neuron.b);

  // Relay chain: weight 1 on the carried signal, bias 0. The signal g(...) is
  // nonnegative for both ReLU and sigmoid attacks; D keeps its sign in the
  // final connection.
  for (int k = attack_layer + 1; k < L - 1; ++k) {
    DenseLayer& relay = planted.layers[k];
    widen_inputs(relay, Vec::Zero(relay.out_dim));
    Vec row = Vec::Zero(relay.in_dim);
    row[relay.in_dim - 1] = 1.0;
    widen_outputs(relay, row, 0.0);
  }

  DenseLayer& final_layer = planted.layers[L - 1];
  Vec column = Vec::Zero(final_layer.out_dim);
  column[split.head_output_index] = neuron.D;
  widen_inputs(final_layer, column);

  planted.validate();
  return planted;
}

Network plant_scenario3(const Network& net, int layer, int victim_index,
                        const AttackNeuron& neuron, int head_index) {
  const int L = static_cast<int>(net.layers.size());
  if (layer < 0 || layer >= L - 1)
    throw ShapeError("plant_scenario3: layer must have a successor layer");
  const DenseLayer& target = net.layers[layer];
  if (victim_index < 0 || victim_index >= target.out_dim)
    throw ShapeError("plant_scenario3: victim index out of range");
  if (head_index < 0 || head_index >= net.layers[layer + 1].out_dim)
    throw ShapeError("plant_scenario3: head index out of range");
  if (neuron.w.size() != target.in_dim)
    throw ShapeError("plant_scenario3: attack weight dimension does not match "
                     "the layer's input dim");
  if (target.activation != neuron.g_kind)
    throw ShapeError("plant_scenario3: layer activation does not match the "
                     "attack neuron's");

  Network planted = net;
  DenseLayer& victim_layer = planted.layers[layer];
  victim_layer.weights.row(victim_index) = neuron.w.transpose();
  victim_layer.biases[victim_index] = -neuron.b;

  DenseLayer& next = planted.layers[layer + 1];
  for (int j = 0; j < next.out_dim; ++j) next.weights(j, victim_index) = 0.0;
  next.weights(head_index, victim_index) = neuron.D;

  planted.validate();
  return planted;
}

RemovalImpact removal_impact(const Network& net, int layer, int victim_index,
                             std::span<const Vec> inputs) {
  const int L = static_cast<int>(net.layers.size());
  if (layer < 0 || layer >= L - 1)
    throw ShapeError("removal_impact: layer must have a successor layer");
  if (victim_index < 0 || victim_index >= net.layers[layer].out_dim)
    throw ShapeError("removal_impact: victim index out of range");
  if (inputs.empty()) throw DomainError("removal_impact: no inputs");

  Network zeroed = net;
  DenseLayer& next = zeroed.layers[layer + 1];
  for (int j = 0; j < next.out_dim; ++j) next.weights(j, victim_index) = 0.0;

  const bool softmax_final = net.layers.back().activation == Activation::Softmax;
  RemovalImpact impact;
  long long changed = 0;
  for (const Vec& u : inputs) {
    const ForwardTrace a = forward(net, u);
    const ForwardTrace b = forward(zeroed, u);
    const Vec& oa = softmax_final ? a.final_preact : a.post.back();
    const Vec& ob = softmax_final ? b.final_preact : b.post.back();
    int arg_a = 0, arg_b = 0;
    oa.maxCoeff(&arg_a);
    ob.maxCoeff(&arg_b);
    if (arg_a != arg_b) ++changed;
    impact.max_output_deviation =
        std::max(impact.max_output_deviation, (oa - ob).cwiseAbs().maxCoeff());
  }
  impact.changed_fraction =
      static_cast<double>(changed) / static_cast<double>(inputs.size());
  return impact;
}

}  // namespace stealth
