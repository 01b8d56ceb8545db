#include "stealth/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "stealth/rng.hpp"

namespace stealth {

long long Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

namespace {

Histogram build_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw DomainError("histogram: bins must be >= 1");
  Histogram h;
  h.counts.assign(bins, 0);
  if (values.empty()) {
    h.edges.assign(bins + 1, 0.0);
    return h;
  }
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = lo + i * width;
  h.edges[bins] = hi;
  for (double v : values) {
    int idx = static_cast<int>((v - lo) / width);
    idx = std::clamp(idx, 0, bins - 1);
    ++h.counts[idx];
  }
  return h;
}

double neuron_preactivation(const Network& net, const LatentSplit& split,
                            const AttackNeuron& neuron, const Vec& v,
                            bool is_latent) {
  const Vec z = is_latent ? v : latent(net, split, v);
  if (z.size() != neuron.w.size())
    throw ShapeError("histogram: latent dimension mismatch");
  return z.dot(neuron.w) - neuron.b;
}

}  // namespace

Histogram activation_histogram(const Network& net, const LatentSplit& split,
                               const AttackNeuron& neuron,
                               std::span<const Vec> inputs, int bins,
                               bool inputs_are_latents) {
  std::vector<double> values;
  values.reserve(inputs.size());
  for (const Vec& v : inputs)
    values.push_back(neuron_preactivation(net, split, neuron, v, inputs_are_latents));
  return build_histogram(values, bins);
}

StealthReport verify_stealth(const Network& original, const Network& planted,
                             const LatentSplit& split,
                             std::span<const Vec> validation,
                             const Vec& trigger_input,
                             const AttackParams& params,
                             const AttackNeuron* neuron,
                             bool inputs_are_latents, int bins) {
  if (original.input_dim != planted.input_dim)
    throw ShapeError("verify: networks disagree on input_dim");

  StealthReport report;
  std::vector<double> preacts;
  if (neuron) preacts.reserve(validation.size());

  for (const Vec& v : validation) {
    double f, fa;
    if (inputs_are_latents) {
      f = head_output(original, split, v);
      fa = head_output(planted, split, v);
    } else {
      f = head_logit(original, split, forward(original, v));
      fa = head_logit(planted, split, forward(planted, v));
    }
    report.max_validation_deviation =
        std::max(report.max_validation_deviation, std::abs(f - fa));
    if (neuron) {
      const double pre =
          neuron_preactivation(original, split, *neuron, v, inputs_are_latents);
      preacts.push_back(pre);
      if (pre <= 0.0) ++report.silent_count;
    }
  }

  const double f_trig = head_logit(original, split, forward(original, trigger_input));
  const double fa_trig = head_logit(planted, split, forward(planted, trigger_input));
  report.trigger_deviation = std::abs(f_trig - fa_trig);

  report.eps_ok = report.max_validation_deviation <= params.eps;
  report.delta_ok = report.trigger_deviation >= params.Delta;
  if (neuron) report.histogram = build_histogram(preacts, bins);
  return report;
}

void wilson_interval(long long hits, long long trials, double& low,
                     double& high) {
  if (trials <= 0) throw DomainError("wilson_interval: trials must be positive");
  constexpr double z = 1.959963984540054;  // 97.5% normal quantile
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  low = hits == 0 ? 0.0 : std::max(0.0, center - half);
  high = hits == trials ? 1.0 : std::min(1.0, center + half);
}

namespace {

constexpr long long kChunkTrials = 1 << 16;

struct TrialContext {
  const McConfig* cfg;
  Vec shell_center;  // unit vector inside the sampling subspace
};

void gaussian_fill(Rng& rng, double* dst, int n) {
  for (int i = 0; i < n; ++i) dst[i] = rng.next_gaussian();
}

// One trial of the geometric success event E*.
bool run_trial(const TrialContext& ctx, Rng& rng) {
  const McConfig& cfg = *ctx.cfg;
  const int n = cfg.n, n_p = cfg.n_p;

  // x uniform on the n_p-subsphere spanned by the first n_p coordinates
  Vec x = Vec::Zero(n);
  double norm_sq = 0.0;
  do {
    gaussian_fill(rng, x.data(), n_p);
    norm_sq = x.head(n_p).squaredNorm();
  } while (norm_sq == 0.0);
  x.head(n_p) *= cfg.delta / std::sqrt(norm_sq);

  Vec x_prime = x;
  if (cfg.alpha > 0.0 && cfg.mode == DisplacementMode::RandomExact) {
    Vec v(n);
    double v_sq = 0.0;
    do {
      gaussian_fill(rng, v.data(), n);
      v_sq = v.squaredNorm();
    } while (v_sq == 0.0);
    x_prime += (cfg.alpha * cfg.delta / std::sqrt(v_sq)) * v;
  }

  const auto draw_latent = [&](Vec& latent_out) {
    switch (cfg.model.kind) {
      case LatentModelKind::UniformBall: {
        double g_sq = 0.0;
        do {
          gaussian_fill(rng, latent_out.data(), n);
          g_sq = latent_out.squaredNorm();
        } while (g_sq == 0.0);
        const double radius = std::pow(rng.next_double(), 1.0 / n);
        latent_out *= radius / std::sqrt(g_sq);
        break;
      }
      case LatentModelKind::AdversarialShell: {
        if (cfg.model.shell_spread == 0.0) {
          latent_out = ctx.shell_center;
        } else {
          gaussian_fill(rng, latent_out.data(), n);
          latent_out = ctx.shell_center + cfg.model.shell_spread * latent_out;
          latent_out.normalize();
        }
        break;
      }
      case LatentModelKind::FixedList:
        break;  // handled by caller
    }
  };

  const long long M = cfg.model.kind == LatentModelKind::FixedList
                          ? static_cast<long long>(cfg.model.fixed.size())
                          : cfg.M;

  if (cfg.mode == DisplacementMode::WorstCaseTowardLatent && cfg.alpha > 0.0) {
    // diagnostic: displace x toward each latent independently
    Vec latent_vec(n);
    for (long long i = 0; i < M; ++i) {
      const Vec* latent_ptr;
      if (cfg.model.kind == LatentModelKind::FixedList) {
        latent_ptr = &cfg.model.fixed[static_cast<std::size_t>(i)];
      } else {
        draw_latent(latent_vec);
        latent_ptr = &latent_vec;
      }
      const double lnorm = latent_ptr->norm();
      Vec xp = x;
      if (lnorm > 0.0) xp += (cfg.alpha * cfg.delta / lnorm) * (*latent_ptr);
      if (xp.dot(*latent_ptr) > cfg.gamma * xp.squaredNorm()) return false;
    }
    return true;
  }

  const double threshold = cfg.gamma * x_prime.squaredNorm();
  Vec latent_vec(n);
  for (long long i = 0; i < M; ++i) {
    const Vec* latent_ptr;
    if (cfg.model.kind == LatentModelKind::FixedList) {
      latent_ptr = &cfg.model.fixed[static_cast<std::size_t>(i)];
    } else {
      draw_latent(latent_vec);
      latent_ptr = &latent_vec;
    }
    if (x_prime.dot(*latent_ptr) > threshold) return false;
  }
  return true;
}

}  // namespace

McResult mc_event_probability(const McConfig& cfg) {
  if (cfg.n < 2) throw DomainError("mc: n must be >= 2");
  if (cfg.n_p < 2 || cfg.n_p > cfg.n)
    throw DomainError("mc: n_p must satisfy 2 <= n_p <= n");
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0))
    throw DomainError("mc: gamma must be in (0, 1)");
  if (!(cfg.delta > 0.0) || cfg.delta > 1.0)
    throw DomainError("mc: delta must be in (0, 1]");
  if (cfg.alpha < 0.0 || cfg.alpha >= 1.0)
    throw DomainError("mc: alpha must be in [0, 1)");
  if (cfg.trials < 1) throw DomainError("mc: trials must be >= 1");
  if (cfg.M < 0) throw DomainError("mc: M must be nonnegative");
  if (cfg.model.kind == LatentModelKind::FixedList)
    for (const Vec& v : cfg.model.fixed)
      if (v.size() != cfg.n) throw ShapeError("mc: fixed latent dimension mismatch");

  TrialContext ctx;
  ctx.cfg = &cfg;
  ctx.shell_center = Vec::Zero(cfg.n);
  ctx.shell_center[0] = 1.0;  // inside the sampling subspace

  const long long chunks = (cfg.trials + kChunkTrials - 1) / kChunkTrials;
  std::vector<long long> chunk_successes(static_cast<std::size_t>(chunks), 0);

  const auto run_chunk = [&](long long c) {
    const long long begin = c * kChunkTrials;
    const long long end = std::min(cfg.trials, begin + kChunkTrials);
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(c)));
    long long ok = 0;
    for (long long t = begin; t < end; ++t)
      if (run_trial(ctx, rng)) ++ok;
    chunk_successes[static_cast<std::size_t>(c)] = ok;
  };

  const int workers = std::max(1, cfg.workers);
  if (workers == 1 || chunks == 1) {
    for (long long c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<long long> next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (long long c = next.fetch_add(1); c < chunks; c = next.fetch_add(1))
          run_chunk(c);
      });
    for (auto& t : pool) t.join();
  }

  McResult result;
  result.trials = cfg.trials;
  result.successes =
      std::accumulate(chunk_successes.begin(), chunk_successes.end(), 0LL);
  result.failures = result.trials - result.successes;
  result.success_frequency =
      static_cast<double>(result.successes) / static_cast<double>(result.trials);
  result.failure_frequency =
      static_cast<double>(result.failures) / static_cast<double>(result.trials);
  wilson_interval(result.failures, result.trials, result.failure_wilson_low,
                  result.failure_wilson_high);
  return result;
}

nlohmann::json stealth_report_to_json(const StealthReport& report) {
  nlohmann::json j;
  j["max_validation_deviation"] = report.max_validation_deviation;
  j["trigger_deviation"] = report.trigger_deviation;
  j["eps_ok"] = report.eps_ok;
  j["delta_ok"] = report.delta_ok;
  j["silent_count"] = report.silent_count;
  j["histogram"] = {{"edges", report.histogram.edges},
                    {"counts", report.histogram.counts}};
  return j;
}

nlohmann::json mc_result_to_json(const McConfig& cfg, const McResult& result) {
  const char* model = cfg.model.kind == LatentModelKind::UniformBall
                          ? "uniform-ball"
                          : cfg.model.kind == LatentModelKind::FixedList
                                ? "fixed-list"
                                : "adversarial-shell";
  nlohmann::json j;
  j["config"] = {{"n", cfg.n},
                 {"n_p", cfg.n_p},
                 {"gamma", cfg.gamma},
                 {"delta", cfg.delta},
                 {"alpha", cfg.alpha},
                 {"M", cfg.M},
                 {"trials", cfg.trials},
                 {"seed", cfg.seed},
                 {"latent_model", model},
                 {"shell_spread", cfg.model.shell_spread},
                 {"displacement",
                  cfg.mode == DisplacementMode::RandomExact ? "random-exact"
                                                            : "worst-case"}};
  j["successes"] = result.successes;
  j["failures"] = result.failures;
  j["success_frequency"] = result.success_frequency;
  j["failure_frequency"] = result.failure_frequency;
  j["failure_wilson_95"] = {result.failure_wilson_low, result.failure_wilson_high};
  return j;
}

}  // namespace stealth
