#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "stealth/attack.hpp"
#include "stealth/model.hpp"

namespace stealth {

struct Histogram {
  std::vector<double> edges;      // bins + 1 edges
  std::vector<long long> counts;  // per bin

  long long total() const;
};

struct StealthReport {
  double max_validation_deviation = 0.0;
  double trigger_deviation = 0.0;
  bool eps_ok = false;
  bool delta_ok = false;
  long long silent_count = 0;  // validation points with nonpositive pre-activation
  Histogram histogram;         // of <Phi(u), w> - b over the validation set
};

/// Checks Problem-1 constraints of a planted network against the original on
/// a concrete validation set and the trigger. The monitored scalar is the
/// pre-softmax head coordinate. When `neuron` is non-null, the attack-neuron
/// pre-activation histogram and silent count are filled. Validation entries
/// may be raw inputs or precomputed latents (inputs_are_latents).
StealthReport verify_stealth(const Network& original, const Network& planted,
                             const LatentSplit& split,
                             std::span<const Vec> validation,
                             const Vec& trigger_input,
                             const AttackParams& params,
                             const AttackNeuron* neuron = nullptr,
                             bool inputs_are_latents = false, int bins = 40);

/// Histogram of <Phi(u), w> - b over the given inputs.
Histogram activation_histogram(const Network& net, const LatentSplit& split,
                               const AttackNeuron& neuron,
                               std::span<const Vec> inputs, int bins,
                               bool inputs_are_latents = false);

// --- Monte Carlo verification of the geometric success event E* ---

enum class LatentModelKind { UniformBall, FixedList, AdversarialShell };

struct LatentModel {
  LatentModelKind kind = LatentModelKind::UniformBall;
  std::vector<Vec> fixed;     // FixedList: used as-is (already R-normalized)
  double shell_spread = 0.0;  // AdversarialShell: gaussian spread around the cap center
};

enum class DisplacementMode {
  RandomExact,           // displace x by exactly alpha*delta in a random direction
  WorstCaseTowardLatent  // diagnostic: displace toward each validation latent
};

struct McConfig {
  int n = 2;    // ambient latent dimension
  int n_p = 2;  // sampling subspace dimension (== n for full-sphere sampling)
  double gamma = 0.9;
  double delta = 1.0 / 3.0;
  double alpha = 0.0;
  long long M = 1;
  long long trials = 100000;
  std::uint64_t seed = 0;
  int workers = 1;
  LatentModel model;
  DisplacementMode mode = DisplacementMode::RandomExact;
};

struct McResult {
  long long trials = 0;
  long long successes = 0;
  long long failures = 0;
  double success_frequency = 0.0;
  double failure_frequency = 0.0;
  // 95% Wilson interval on the failure frequency.
  double failure_wilson_low = 0.0;
  double failure_wilson_high = 0.0;
};

/// Empirical probability of E*: gamma <x',x'> >= <x', x_i> for all M latents.
/// Trials are partitioned into fixed-size chunks with derived per-chunk seeds;
/// the result depends only on (seed, chunk plan), not on the worker count.
McResult mc_event_probability(const McConfig& cfg);

/// 95% Wilson score interval for a binomial proportion.
void wilson_interval(long long hits, long long trials, double& low,
                     double& high);

nlohmann::json stealth_report_to_json(const StealthReport& report);
nlohmann::json mc_result_to_json(const McConfig& cfg, const McResult& result);

}  // namespace stealth
