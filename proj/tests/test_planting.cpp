#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "stealth/attack.hpp"
#include "stealth/geometry.hpp"
#include "stealth/hashing.hpp"
#include "stealth/planting.hpp"

using namespace stealth;
using namespace stealth::test;

namespace {

// paper-shaped fixture: input -> latent(ReLU) -> hidden(ReLU) -> logits
Network head2_net(std::uint64_t seed, int in = 12, int latent_dim = 24,
                  int hidden = 10, int out = 5) {
  return random_network(seed, {in, latent_dim, hidden, out},
                        {Activation::ReLU, Activation::ReLU, Activation::Identity});
}

long long parameter_count(const Network& net) {
  long long count = 0;
  for (const DenseLayer& L : net.layers)
    count += static_cast<long long>(L.in_dim) * L.out_dim + L.out_dim;
  return count;
}

AttackNeuron make_plan(const Network& net, const LatentSplit& split,
                       std::uint64_t seed, int sign = +1) {
  AttackParams params;
  params.gamma = 0.9;
  params.delta = 1.0 / 3.0;
  params.Delta = 25.0;
  params.sign = sign;
  const SphereSample x = sample_sphere(split.latent_dim, params.delta, seed);
  return plan_plain_attack(params, x.x, 2.0);
}

}  // namespace

TEST_SUITE("planting") {

TEST_CASE("zero-output-norm neuron ranks first") {
  Network net = head2_net(5);
  for (int j = 0; j < net.layers[2].out_dim; ++j) net.layers[2].weights(j, 3) = 0.0;
  const SusceptibilityRanking r = rank_neurons(net, 1, 0);
  CHECK(r.order.front() == 3);
  CHECK(r.norms.front() == 0.0);
}

TEST_CASE("distinct norms rank by argsort") {
  Network net = head2_net(7, 6, 8, 4, 3);
  const SusceptibilityRanking r = rank_neurons(net, 1, 0);
  for (std::size_t i = 1; i < r.norms.size(); ++i)
    CHECK(r.norms[i] >= r.norms[i - 1]);
  // order is a permutation
  std::vector<int> sorted = r.order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == static_cast<int>(i));
}

TEST_CASE("ranking matches a brute-force sort oracle on random nets") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const Network net = head2_net(seed);
    const SusceptibilityRanking r = rank_neurons(net, 0, 99);
    const DenseLayer& next = net.layers[1];
    std::vector<double> norms(net.layers[0].out_dim, 0.0);
    for (int i = 0; i < net.layers[0].out_dim; ++i)
      for (int j = 0; j < next.out_dim; ++j) norms[i] += std::abs(next.weights(j, i));
    std::vector<int> idx(norms.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return norms[a] < norms[b]; });
    for (std::size_t i = 0; i < idx.size(); ++i)
      CHECK(r.norms[i] == norms[static_cast<std::size_t>(r.order[i])]);
    CHECK(std::is_sorted(r.norms.begin(), r.norms.end()));
  }
}

TEST_CASE("tied norms break deterministically under a fixed seed") {
  Network net = head2_net(17, 6, 8, 4, 3);
  net.layers[1].weights.setOnes();  // all output norms equal
  const SusceptibilityRanking a = rank_neurons(net, 0, 123);
  const SusceptibilityRanking b = rank_neurons(net, 0, 123);
  CHECK(a.order == b.order);
  CHECK_THROWS_AS(rank_neurons(net, 2, 0), ShapeError);  // final layer
}

TEST_CASE("scenario 1: silent inputs are bit-exactly unchanged") {
  const Network net = head2_net(21);
  LatentSplit split{0, 24, 2};
  const AttackNeuron neuron = make_plan(net, split, 22);
  const Network planted = plant_scenario1(net, split, neuron);

  Rng rng(23);
  int silent = 0;
  for (int i = 0; i < 200 && silent < 50; ++i) {
    const Vec u = random_vec(rng, 12);
    const Vec z = latent(net, split, u);
    if (z.dot(neuron.w) - neuron.b > 0.0) continue;  // not silent
    const ForwardTrace a = forward(net, u);
    const ForwardTrace b = forward(planted, u);
    for (int j = 0; j < a.output().size(); ++j)
      CHECK(a.output()[j] == b.output()[j]);  // bit-exact
    ++silent;
  }
  CHECK(silent >= 50);
}

TEST_CASE("scenario 1: output difference equals realize_effect on every input") {
  const Network net = head2_net(31);
  LatentSplit split{0, 24, 1};
  const AttackNeuron neuron = make_plan(net, split, 32);
  const Network planted = plant_scenario1(net, split, neuron);

  Rng rng(33);
  for (int i = 0; i < 100; ++i) {
    const Vec u = random_vec(rng, 12, 2.0);
    const double f = head_logit(net, split, forward(net, u));
    const double fa = head_logit(planted, split, forward(planted, u));
    const double effect = realize_effect(neuron, latent(net, split, u));
    CHECK(fa - f == doctest::Approx(effect).epsilon(1e-12));
  }
}

TEST_CASE("scenario 1: trigger evokes at least Delta at the head") {
  const Network net = head2_net(41);
  LatentSplit split{0, 24, 0};
  const AttackNeuron neuron = make_plan(net, split, 42);
  const Network planted = plant_scenario1(net, split, neuron);
  // the trigger latent is R*x'; realize it through the head directly
  const Vec trigger_latent = neuron.R * neuron.x_prime;
  const double f = head_output(net, split, trigger_latent);
  const double fa = head_output(planted, split, trigger_latent);
  CHECK(fa - f >= 25.0);
}

TEST_CASE("scenario 1 preconditions") {
  const Network deep = random_network(
      51, {6, 10, 8, 6, 4},
      {Activation::ReLU, Activation::ReLU, Activation::ReLU, Activation::Identity});
  LatentSplit split{0, 10, 0};
  const AttackNeuron neuron = make_plan(deep, split, 52);
  CHECK_THROWS_AS(plant_scenario1(deep, split, neuron), ShapeError);

  Network sigmoid_head = head2_net(53);
  sigmoid_head.layers[1].activation = Activation::Sigmoid;
  LatentSplit split2{0, 24, 0};
  const AttackNeuron n2 = make_plan(sigmoid_head, split2, 54);
  CHECK_THROWS_AS(plant_scenario1(sigmoid_head, split2, n2), ShapeError);
}

TEST_CASE("scenario 2 equals scenario 1 on a depth-2 head") {
  const Network net = head2_net(61);
  LatentSplit split{0, 24, 3};
  const AttackNeuron neuron = make_plan(net, split, 62);
  const Network s1 = plant_scenario1(net, split, neuron);
  const Network s2 = plant_scenario2(net, split, neuron);
  Rng rng(63);
  for (int i = 0; i < 100; ++i) {
    const Vec u = random_vec(rng, 12, 2.0);
    const Vec a = forward(s1, u).output();
    const Vec b = forward(s2, u).output();
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("scenario 2 relays through deep ReLU heads losslessly") {
  const Network net = random_network(
      71, {8, 16, 12, 10, 6},
      {Activation::ReLU, Activation::ReLU, Activation::ReLU, Activation::Identity});
  LatentSplit split{0, 16, 2};
  const AttackNeuron neuron = make_plan(net, split, 72);
  const Network planted = plant_scenario2(net, split, neuron);

  Rng rng(73);
  for (int i = 0; i < 100; ++i) {
    const Vec u = random_vec(rng, 8, 2.0);
    const double f = head_logit(net, split, forward(net, u));
    const double fa = head_logit(planted, split, forward(planted, u));
    const double effect = realize_effect(neuron, latent(net, split, u));
    CHECK(fa - f == doctest::Approx(effect).epsilon(1e-12));
    // zero attack signal leaves the attack neuron and relay chain at exactly
    // zero (layers 1 and 2; layer 3 is the output layer)
    if (effect == 0.0) {
      const ForwardTrace t = forward(planted, u);
      for (int k = 1; k < 3; ++k) CHECK(t.post[k][t.post[k].size() - 1] == 0.0);
    }
  }
}

TEST_CASE("scenario 2 carries negative gains in the head connection") {
  const Network net = random_network(
      81, {8, 16, 12, 10, 6},
      {Activation::ReLU, Activation::ReLU, Activation::ReLU, Activation::Identity});
  LatentSplit split{0, 16, 0};
  const AttackNeuron neuron = make_plan(net, split, 82, -1);
  REQUIRE(neuron.D < 0.0);
  const Network planted = plant_scenario2(net, split, neuron);
  const double f = head_output(net, split, neuron.R * neuron.x_prime);
  const double fa = head_output(planted, split, neuron.R * neuron.x_prime);
  CHECK(fa - f <= -25.0);  // negative response of magnitude >= Delta
}

TEST_CASE("scenario 2 rejects non-ReLU intervening layers") {
  const Network net = random_network(
      91, {8, 16, 12, 10, 6},
      {Activation::ReLU, Activation::ReLU, Activation::Sigmoid, Activation::Identity});
  LatentSplit split{0, 16, 0};
  const AttackNeuron neuron = make_plan(net, split, 92);
  CHECK_THROWS_AS(plant_scenario2(net, split, neuron), ShapeError);
}

TEST_CASE("scenario 3 preserves shape and parameter count") {
  const Network net = head2_net(101);
  LatentSplit split{0, 24, 0};
  AttackParams params;
  params.Delta = 25.0;
  const SphereSample x = sample_sphere(24, params.delta, 102);
  const AttackNeuron neuron = plan_plain_attack(params, x.x, 2.0);
  const Network planted = plant_scenario3(net, 1, 4, neuron, 0);
  CHECK(parameter_count(planted) == parameter_count(net));
  REQUIRE(planted.layers.size() == net.layers.size());
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    CHECK(planted.layers[k].in_dim == net.layers[k].in_dim);
    CHECK(planted.layers[k].out_dim == net.layers[k].out_dim);
  }
}

TEST_CASE("scenario 3 with a nil victim changes nothing on silent inputs") {
  Network net = head2_net(111);
  const int victim = 6;
  for (int j = 0; j < net.layers[2].out_dim; ++j) net.layers[2].weights(j, victim) = 0.0;

  LatentSplit split{0, 24, 0};
  const AttackNeuron neuron = make_plan(net, split, 112);
  const Network planted = plant_scenario3(net, 1, victim, neuron, 0);

  Rng rng(113);
  int silent = 0;
  for (int i = 0; i < 300 && silent < 50; ++i) {
    const Vec u = random_vec(rng, 12);
    const Vec z = latent(net, split, u);
    if (z.dot(neuron.w) - neuron.b > 0.0) continue;
    const Vec a = forward(net, u).output();
    const Vec b = forward(planted, u).output();
    for (int j = 0; j < a.size(); ++j) CHECK(a[j] == b[j]);
    ++silent;
  }
  CHECK(silent >= 50);
}

TEST_CASE("scenario 3 trigger response accounts for the former contribution") {
  const Network net = head2_net(121);
  LatentSplit split{0, 24, 0};
  const int victim = rank_neurons(net, 1, 0).order.front();
  const AttackNeuron neuron = make_plan(net, split, 122);
  const Network planted = plant_scenario3(net, 1, victim, neuron, 0);

  Rng rng(123);
  std::vector<Vec> probes;
  for (int i = 0; i < 50; ++i) probes.push_back(random_vec(rng, 12, 2.0));
  const double former =
      removal_impact(net, 1, victim, probes).max_output_deviation;

  const Vec trigger_latent = neuron.R * neuron.x_prime;
  const double f = head_output(net, split, trigger_latent);
  const double fa = head_output(planted, split, trigger_latent);
  // attack delivers Delta through the new wiring; the victim's removed
  // contribution (measured, not assumed zero) bounds the loss
  CHECK(std::abs(fa - f) >= 25.0 - former);
}

TEST_CASE("removal impact of a nil victim is zero") {
  Network net = head2_net(131);
  const int victim = 2;
  for (int j = 0; j < net.layers[2].out_dim; ++j) net.layers[2].weights(j, victim) = 0.0;
  Rng rng(132);
  std::vector<Vec> probes;
  for (int i = 0; i < 20; ++i) probes.push_back(random_vec(rng, 12));
  const RemovalImpact impact = removal_impact(net, 1, victim, probes);
  CHECK(impact.changed_fraction == 0.0);
  CHECK(impact.max_output_deviation == 0.0);
}

TEST_CASE("removal of a dominant argmax feeder flips predictions") {
  Network net = head2_net(141, 6, 8, 4, 3);
  // victim 0 feeds logit 0 with a huge weight; latents are nonnegative
  net.layers[2].weights(0, 0) = 50.0;
  net.layers[1].weights.row(0).setConstant(1.0);
  net.layers[1].biases[0] = 1.0;  // strictly positive activation
  Rng rng(142);
  std::vector<Vec> probes;
  for (int i = 0; i < 20; ++i) probes.push_back(random_vec(rng, 6));
  const RemovalImpact impact = removal_impact(net, 1, 0, probes);
  CHECK(impact.changed_fraction > 0.0);
  CHECK(impact.max_output_deviation > 1.0);
}

TEST_CASE("impact decreases with susceptibility rank on average (reported)") {
  // statistical tendency over random nets; recorded, not asserted per-instance
  double rank1_total = 0.0, rank_last_total = 0.0;
  const int nets = 6;
  for (std::uint64_t seed = 0; seed < nets; ++seed) {
    const Network net = head2_net(150 + seed, 6, 10, 6, 4);
    Rng rng(160 + seed);
    std::vector<Vec> probes;
    for (int i = 0; i < 30; ++i) probes.push_back(random_vec(rng, 6));
    const SusceptibilityRanking r = rank_neurons(net, 1, 0);
    rank1_total += removal_impact(net, 1, r.order.front(), probes).max_output_deviation;
    rank_last_total += removal_impact(net, 1, r.order.back(), probes).max_output_deviation;
  }
  MESSAGE("mean max deviation, rank 1: " << rank1_total / nets
          << ", last rank: " << rank_last_total / nets);
  CHECK(rank1_total <= rank_last_total);  // averaged over nets
}

TEST_CASE("surgery never mutates the input network") {
  const Network net = head2_net(171);
  const std::string digest_before = model_digest(net);
  LatentSplit split{0, 24, 0};
  const AttackNeuron neuron = make_plan(net, split, 172);
  (void)plant_scenario1(net, split, neuron);
  (void)plant_scenario2(net, split, neuron);
  (void)plant_scenario3(net, 1, 3, neuron, 0);
  (void)rank_neurons(net, 1, 5);
  CHECK(model_digest(net) == digest_before);
}

}  // TEST_SUITE
