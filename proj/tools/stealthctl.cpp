// stealthctl: plan, plant, verify and quantify single-neuron stealth attacks
// on dense feed-forward networks.
//
// Exit codes: 0 success, 1 usage/IO error, 2 mathematical-hypothesis
// violation, 3 algorithmic failure, 4 verification failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "stealth/attack.hpp"
#include "stealth/bounds.hpp"
#include "stealth/geometry.hpp"
#include "stealth/hashing.hpp"
#include "stealth/manifest.hpp"
#include "stealth/model.hpp"
#include "stealth/planting.hpp"
#include "stealth/rng.hpp"
#include "stealth/serialize.hpp"
#include "stealth/trigger.hpp"
#include "stealth/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stealth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitAlgorithm = 3;
constexpr int kExitVerification = 4;

// Real-valued flags accept exact rationals ("1/3"); the manifest records the
// parsed double.
double parse_real(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return std::stod(s);
    const double num = std::stod(s.substr(0, slash));
    const double den = std::stod(s.substr(slash + 1));
    if (den == 0.0) throw std::invalid_argument("zero denominator");
    return num / den;
  } catch (const std::exception&) {
    throw CLI::ValidationError("'" + s + "' is not a real number or rational");
  }
}

struct RealFlag {
  std::string text;
  double value = 0.0;
  bool set = false;
};

void add_real(CLI::App* app, const std::string& name, RealFlag& flag,
              double default_value, const std::string& desc) {
  flag.value = default_value;
  app->add_option_function<std::string>(
         name,
         [&flag](const std::string& s) {
           flag.value = parse_real(s);
           flag.set = true;
         },
         desc)
      ->type_name("REAL");
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("STEALTHCTL_SEED"))
    return std::strtoull(env, nullptr, 10);
  return 0;
}

std::vector<Vec> to_vecs(const VectorSet& set) { return set.vectors; }

Activation parse_gain_kind(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw CLI::ValidationError("attack activation must be relu or sigmoid");
}

void warn_if_outside_box(const Network& net, const Vec& u, const char* what) {
  if (!inside_box(net.input_box, u))
    std::cerr << "warning: " << what << " lies outside the model input box\n";
}

// ---------------------------------------------------------------- bounds ---

struct BoundsArgs {
  long long M = 0;
  int n = 2;
  int n_p = 0;  // 0 = unset
  RealFlag gamma, delta, alpha, C, eps_collapse;
  bool want_collapse = false;
  std::string sweep_alpha, sweep_n;
  std::string csv_path, json_path;
};

void print_report(const BoundQuery& q, const BoundReport& r) {
  auto line = [](const char* k, double v) {
    std::printf("  %-18s % .12g\n", k, v);
  };
  std::printf("  %-18s %lld\n", "M", q.M);
  std::printf("  %-18s %d\n", "n", q.n);
  std::printf("  %-18s %d\n", "n_p", q.dim());
  line("gamma", q.gamma);
  line("delta", q.delta);
  line("alpha", q.alpha);
  line("phi", r.phi_value);
  std::printf("  %-18s % .12g  (quadrature err %.2e)\n", "P1 integral",
              r.p1_integral, r.quadrature_error);
  line("P1 closed", r.p1_closed);
  line("bound integral", r.bound_integral);
  line("bound closed", r.bound_closed);
  line("bound alpha=0", r.bound_alpha0);
  if (r.bound_collapse) {
    line("eps collapse", q.eps_collapse);
    line("C", q.C);
    line("bound collapse", *r.bound_collapse);
  }
}

int cmd_bounds(const BoundsArgs& args) {
  BoundQuery query;
  query.M = args.M;
  query.n = args.n;
  if (args.n_p > 0) query.n_p = args.n_p;
  query.gamma = args.gamma.value;
  query.delta = args.delta.value;
  query.alpha = args.alpha.value;
  query.C = args.C.value;
  query.eps_collapse = args.eps_collapse.value;

  if (args.want_collapse && query.gamma * query.delta >= 0.5) {
    std::cerr << "error: collapse bound requires gamma*delta < 1/2\n";
    return kExitHypothesis;
  }

  auto parse_sweep = [](const std::string& s, double& lo, double& hi, int& count) {
    const auto c1 = s.find(':'), c2 = s.rfind(':');
    if (c1 == std::string::npos || c2 == c1)
      throw CLI::ValidationError("sweep format is lo:hi:count");
    lo = parse_real(s.substr(0, c1));
    hi = parse_real(s.substr(c1 + 1, c2 - c1 - 1));
    count = std::stoi(s.substr(c2 + 1));
    if (count < 2) throw CLI::ValidationError("sweep count must be >= 2");
  };

  try {
    std::vector<std::pair<BoundQuery, BoundReport>> rows;
    if (!args.sweep_alpha.empty() || !args.sweep_n.empty()) {
      double lo, hi;
      int count;
      if (!args.sweep_alpha.empty()) {
        parse_sweep(args.sweep_alpha, lo, hi, count);
        for (int i = 0; i < count; ++i) {
          BoundQuery q = query;
          q.alpha = lo + (hi - lo) * i / (count - 1);
          rows.emplace_back(q, success_bound(q));
        }
      } else {
        parse_sweep(args.sweep_n, lo, hi, count);
        for (int i = 0; i < count; ++i) {
          BoundQuery q = query;
          q.n = static_cast<int>(lo + (hi - lo) * i / (count - 1));
          q.n_p.reset();
          rows.emplace_back(q, success_bound(q));
        }
      }
      std::printf("%8s %6s %14s %14s %14s %14s %14s\n", "alpha", "n_p", "phi",
                  "P1_integral", "bound_int", "bound_closed", "bound_alpha0");
      std::string csv = "alpha,n_p,phi,p1_integral,p1_closed,bound_integral,"
                        "bound_closed,bound_alpha0\n";
      for (const auto& [q, r] : rows) {
        std::printf("%8.4f %6d %14.6g %14.6g %14.6g %14.6g %14.6g\n", q.alpha,
                    q.dim(), r.phi_value, r.p1_integral, r.bound_integral,
                    r.bound_closed, r.bound_alpha0);
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      q.alpha, q.dim(), r.phi_value, r.p1_integral, r.p1_closed,
                      r.bound_integral, r.bound_closed, r.bound_alpha0);
        csv += buf;
      }
      if (!args.csv_path.empty()) write_file(args.csv_path, csv);
      if (!args.json_path.empty()) {
        json arr = json::array();
        for (const auto& [q, r] : rows) arr.push_back(bound_report_to_json(q, r));
        write_file(args.json_path, arr.dump(2) + "\n");
      }
    } else {
      const BoundReport report = success_bound(query);
      print_report(query, report);
      if (!args.json_path.empty())
        write_file(args.json_path,
                   bound_report_to_json(query, report).dump(2) + "\n");
    }
    if (!args.json_path.empty() || !args.csv_path.empty()) {
      RunManifest manifest;
      manifest.command = "bounds";
      manifest.parameters = {{"M", query.M},         {"n", query.n},
                             {"n_p", query.dim()},   {"gamma", query.gamma},
                             {"delta", query.delta}, {"alpha", query.alpha},
                             {"C", query.C},
                             {"eps_collapse", query.eps_collapse},
                             {"sweep_alpha", args.sweep_alpha},
                             {"sweep_n", args.sweep_n}};
      const std::string base =
          !args.json_path.empty() ? args.json_path : args.csv_path;
      write_manifest(manifest, base + ".manifest.json");
    }
  } catch (const HypothesisError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitHypothesis;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- attack ---

struct AttackArgs {
  std::string model_path;
  int cut = 0;
  int head_index = 0;
  std::string target_path;  // empty = plain attack
  std::string est_path;
  bool est_latents = false;
  RealFlag gamma, delta, Delta, eps, margin, safety;
  std::string g_kind = "relu";
  int sign = 1;
  long long M = 0;
  std::string subspace = "auto";
  std::uint64_t seed = 0;
  int restarts = 1;
  // trigger search
  RealFlag lambda1, lambda2, p1, p2, step0, step_decay, alpha_target;
  int max_iters = 100000;
  bool round_integers = false;
  std::string out_dir = ".";
};

int cmd_attack(const AttackArgs& args) {
  Network net = load_model(args.model_path);
  LatentSplit split{args.cut, net.layers.at(args.cut).out_dim, args.head_index};
  split.validate(net);

  AttackParams params;
  params.gamma = args.gamma.value;
  params.delta = args.delta.value;
  params.Delta = args.Delta.value;
  params.eps = args.eps.value;
  params.g_kind = parse_gain_kind(args.g_kind);
  params.sign = args.sign;
  params.kappa_margin = args.margin.value;
  params.M = args.M;
  params.validate();

  TriggerSearchConfig cfg;
  cfg.lambda1 = args.lambda1.value;
  cfg.lambda2 = args.lambda2.value;
  cfg.p1 = args.p1.value;
  cfg.p2 = args.p2.value;
  cfg.max_iters = args.max_iters;
  if (args.step0.set) cfg.step0 = args.step0.value;
  cfg.step_decay = args.step_decay.value;
  if (args.alpha_target.set) cfg.alpha_target = args.alpha_target.value;
  cfg.round_to_integers = args.round_integers;
  cfg.seed = args.seed;

  // estimation set -> latent cloud for R
  const VectorSet est = load_vectors(args.est_path);
  std::vector<Vec> est_latents;
  est_latents.reserve(est.vectors.size());
  if (args.est_latents) {
    est_latents = est.vectors;
  } else {
    for (const Vec& u : est.vectors) est_latents.push_back(latent(net, split, u));
  }

  std::vector<Vec> targets;
  if (!args.target_path.empty()) targets = to_vecs(load_vectors(args.target_path));
  const bool targeted = !targets.empty();

  struct Outcome {
    TriggerResult trigger;
    double R = 0.0;
    std::optional<Vec> phi_star;
    int n_p = 0;
    std::uint64_t x_seed = 0;
  };
  std::optional<Outcome> best;

  const int attempts = targeted ? static_cast<int>(targets.size()) : args.restarts;
  for (int a = 0; a < attempts; ++a) {
    Outcome out;
    out.x_seed = derive_seed(args.seed, static_cast<std::uint64_t>(a));
    std::optional<Vec> phi_star;
    if (targeted) {
      warn_if_outside_box(net, targets[a], "target input");
      phi_star = latent(net, split, targets[a]);
    }
    out.R = estimate_radius(est_latents,
                            phi_star ? std::optional<Vec>(*phi_star) : std::nullopt,
                            args.safety.value);
    if (!(out.R > 0.0)) {
      std::cerr << "error: estimated radius is zero; estimation set degenerate\n";
      return kExitAlgorithm;
    }

    SphereSample x;
    std::vector<int> support;
    if (args.subspace == "auto" && targeted)
      support = positive_support(*phi_star);
    if (support.size() >= 2 &&
        support.size() < static_cast<std::size_t>(split.latent_dim)) {
      x = sample_subsphere(split.latent_dim, support, params.delta, out.x_seed);
      out.n_p = static_cast<int>(support.size());
    } else {
      x = sample_sphere(split.latent_dim, params.delta, out.x_seed);
      out.n_p = split.latent_dim;
    }

    TriggerSearchConfig attempt_cfg = cfg;
    attempt_cfg.seed = derive_seed(args.seed, 0x5eed0000ULL + a);
    // default step matched to the curvature of the squared-distance term,
    // whose Hessian scales like 1/R^2
    if (!attempt_cfg.step0) attempt_cfg.step0 = out.R * out.R / 10.0;
    out.trigger = search_trigger(net, split, x, targeted ? &targets[a] : nullptr,
                                 out.R, params, attempt_cfg);
    out.phi_star = std::move(phi_star);

    const bool take = !best || (out.trigger.feasible && !best->trigger.feasible) ||
                      (out.trigger.feasible == best->trigger.feasible &&
                       out.trigger.alpha < best->trigger.alpha);
    if (take) best = std::move(out);
  }

  fs::create_directories(args.out_dir);
  const fs::path trigger_path = fs::path(args.out_dir) / "trigger.json";
  const fs::path neuron_path = fs::path(args.out_dir) / "neuron.json";
  write_file(trigger_path, canonical_dump(trigger_to_json(best->trigger, cfg)));

  std::printf("attack %s: alpha = %.6f (n_p = %d, R = %.6g, |x'| = %.6g)\n",
              targeted ? "targeted" : "plain", best->trigger.alpha, best->n_p,
              best->R, best->trigger.x_prime.norm());

  if (!best->trigger.feasible) {
    std::cerr << "error: trigger search infeasible (gamma*|x'| = "
              << params.gamma * best->trigger.x_prime.norm()
              << ", |x' - x| = " << (best->trigger.x_prime - best->trigger.x.x).norm()
              << " vs delta = " << params.delta << "); trigger written for inspection\n";
    return kExitAlgorithm;
  }

  AttackNeuron neuron =
      best->phi_star
          ? plan_targeted_attack(params, best->trigger.x_prime, best->R, *best->phi_star)
          : plan_plain_attack(params, best->trigger.x_prime, best->R);
  write_file(neuron_path, canonical_dump(neuron_to_json(neuron)));

  // a-priori success bound at the achieved accuracy
  try {
    BoundQuery q;
    q.M = params.M;
    q.n = split.latent_dim;
    q.n_p = best->n_p;
    q.gamma = params.gamma;
    q.delta = params.delta;
    q.alpha = best->trigger.alpha;
    const BoundReport r = success_bound(q);
    std::printf("success bound (M = %lld): integral %.6g, closed %.6g, alpha=0 %.6g\n",
                q.M, r.bound_integral, r.bound_closed, r.bound_alpha0);
  } catch (const HypothesisError& e) {
    std::printf("success bound unavailable at achieved alpha: %s\n", e.what());
  }

  RunManifest manifest;
  manifest.command = "attack";
  manifest.parameters = {{"model", args.model_path},
                         {"cut", args.cut},
                         {"head_index", args.head_index},
                         {"target", args.target_path},
                         {"est", args.est_path},
                         {"est_latents", args.est_latents},
                         {"gamma", params.gamma},
                         {"delta", params.delta},
                         {"Delta", params.Delta},
                         {"eps", params.eps},
                         {"g_kind", args.g_kind},
                         {"sign", params.sign},
                         {"kappa_margin", params.kappa_margin},
                         {"M", params.M},
                         {"safety", args.safety.value},
                         {"subspace", args.subspace},
                         {"restarts", args.restarts},
                         {"max_iters", cfg.max_iters},
                         {"lambda1", cfg.lambda1},
                         {"lambda2", cfg.lambda2},
                         {"p1", cfg.p1},
                         {"p2", cfg.p2},
                         {"step_decay", cfg.step_decay},
                         {"round_to_integers", cfg.round_to_integers},
                         {"alpha", best->trigger.alpha},
                         {"n_p", best->n_p},
                         {"R", best->R}};
  manifest.seeds = {args.seed, best->x_seed};
  manifest.input_digests.emplace_back(args.model_path, file_digest(args.model_path));
  manifest.input_digests.emplace_back(args.est_path, file_digest(args.est_path));
  if (!args.target_path.empty())
    manifest.input_digests.emplace_back(args.target_path, file_digest(args.target_path));
  write_manifest(manifest, fs::path(args.out_dir) / "manifest.json");

  std::printf("wrote %s, %s\n", trigger_path.string().c_str(),
              neuron_path.string().c_str());
  return kExitOk;
}

// ----------------------------------------------------------------- plant ---

struct PlantArgs {
  std::string model_path;
  std::string neuron_path;
  int scenario = 1;
  int cut = 0;
  int head_index = 0;
  int layer = -1;
  int victim = -1;
  std::uint64_t tie_seed = 0;
  std::string out_path = "planted.json";
};

int cmd_plant(const PlantArgs& args) {
  Network net = load_model(args.model_path);
  AttackNeuron neuron;
  try {
    neuron = neuron_from_json(json::parse(read_file(args.neuron_path)));
  } catch (const json::exception& e) {
    throw ParseError(args.neuron_path + ": " + e.what());
  }

  Network planted;
  json provenance;
  provenance["scenario"] = args.scenario;
  provenance["neuron_digest"] = file_digest(args.neuron_path);

  try {
    if (args.scenario == 1 || args.scenario == 2) {
      LatentSplit split{args.cut, net.layers.at(args.cut).out_dim, args.head_index};
      planted = args.scenario == 1 ? plant_scenario1(net, split, neuron)
                                   : plant_scenario2(net, split, neuron);
      provenance["cut"] = args.cut;
      provenance["head_index"] = args.head_index;
    } else if (args.scenario == 3) {
      const int layer = args.layer;
      if (layer < 0) throw DomainError("scenario 3 requires --layer");
      int victim = args.victim;
      if (victim < 0) {
        const SusceptibilityRanking ranking = rank_neurons(net, layer, args.tie_seed);
        victim = ranking.order.front();
        std::printf("victim defaulted to susceptibility rank 1: neuron %d "
                    "(L1 norm %.6g)\n", victim, ranking.norms.front());
      }
      planted = plant_scenario3(net, layer, victim, neuron, args.head_index);
      provenance["layer"] = layer;
      provenance["victim"] = victim;
      provenance["head_index"] = args.head_index;
      provenance["tie_seed"] = args.tie_seed;
    } else {
      std::cerr << "error: scenario must be 1, 2 or 3\n";
      return kExitUsage;
    }
  } catch (const ShapeError& e) {
    std::cerr << "error: surgery precondition failed: " << e.what() << "\n";
    return kExitAlgorithm;
  } catch (const DomainError& e) {
    std::cerr << "error: surgery precondition failed: " << e.what() << "\n";
    return kExitAlgorithm;
  }

  save_model(planted, args.out_path);
  write_file(args.out_path + ".provenance.json", provenance.dump(2) + "\n");

  RunManifest manifest;
  manifest.command = "plant";
  manifest.parameters = {{"model", args.model_path},
                         {"neuron", args.neuron_path},
                         {"scenario", args.scenario},
                         {"cut", args.cut},
                         {"layer", args.layer},
                         {"victim", args.victim},
                         {"head_index", args.head_index},
                         {"out", args.out_path}};
  manifest.seeds = {args.tie_seed};
  manifest.input_digests.emplace_back(args.model_path, file_digest(args.model_path));
  manifest.input_digests.emplace_back(args.neuron_path, file_digest(args.neuron_path));
  write_manifest(manifest, args.out_path + ".manifest.json");

  std::printf("wrote %s\n", args.out_path.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------- verify ---

struct VerifyArgs {
  std::string original_path, planted_path;
  std::string validation_path;
  bool latents = false;
  std::string trigger_path;
  std::string neuron_path;
  int cut = 0;
  int head_index = 0;
  RealFlag eps, Delta;
  int bins = 40;
  std::string report_path;
  std::string hist_csv_path;
};

int cmd_verify(const VerifyArgs& args) {
  const Network original = load_model(args.original_path);
  const Network planted = load_model(args.planted_path);
  LatentSplit split{args.cut, original.layers.at(args.cut).out_dim, args.head_index};
  split.validate(original);

  const VectorSet validation = load_vectors(args.validation_path);
  TriggerResult trigger;
  try {
    trigger = trigger_from_json(json::parse(read_file(args.trigger_path)));
  } catch (const json::exception& e) {
    throw ParseError(args.trigger_path + ": " + e.what());
  }

  std::optional<AttackNeuron> neuron;
  if (!args.neuron_path.empty()) {
    try {
      neuron = neuron_from_json(json::parse(read_file(args.neuron_path)));
    } catch (const json::exception& e) {
      throw ParseError(args.neuron_path + ": " + e.what());
    }
  }

  AttackParams params;
  params.eps = args.eps.value;
  params.Delta = args.Delta.value;

  const StealthReport report = verify_stealth(
      original, planted, split, validation.vectors, trigger.u_prime, params,
      neuron ? &*neuron : nullptr, args.latents, args.bins);

  std::printf("max validation deviation: %.17g (eps = %.6g) -> %s\n",
              report.max_validation_deviation, params.eps,
              report.eps_ok ? "ok" : "VIOLATED");
  std::printf("trigger deviation:        %.17g (Delta = %.6g) -> %s\n",
              report.trigger_deviation, params.Delta,
              report.delta_ok ? "ok" : "VIOLATED");
  if (neuron)
    std::printf("silent validation points: %lld / %zu\n", report.silent_count,
                validation.vectors.size());

  if (!args.hist_csv_path.empty() && neuron) {
    std::string csv = "bin_low,bin_high,count\n";
    for (std::size_t b = 0; b < report.histogram.counts.size(); ++b) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%lld\n",
                    report.histogram.edges[b], report.histogram.edges[b + 1],
                    report.histogram.counts[b]);
      csv += buf;
    }
    write_file(args.hist_csv_path, csv);
  }

  if (!args.report_path.empty()) {
    write_file(args.report_path, stealth_report_to_json(report).dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "verify";
    manifest.parameters = {{"original", args.original_path},
                           {"planted", args.planted_path},
                           {"validation", args.validation_path},
                           {"latents", args.latents},
                           {"trigger", args.trigger_path},
                           {"neuron", args.neuron_path},
                           {"cut", args.cut},
                           {"head_index", args.head_index},
                           {"eps", params.eps},
                           {"Delta", params.Delta},
                           {"bins", args.bins}};
    manifest.input_digests.emplace_back(args.original_path,
                                        file_digest(args.original_path));
    manifest.input_digests.emplace_back(args.planted_path,
                                        file_digest(args.planted_path));
    manifest.input_digests.emplace_back(args.validation_path,
                                        file_digest(args.validation_path));
    manifest.input_digests.emplace_back(args.trigger_path,
                                        file_digest(args.trigger_path));
    write_manifest(manifest, args.report_path + ".manifest.json");
  }

  return report.eps_ok && report.delta_ok ? kExitOk : kExitVerification;
}

// ------------------------------------------------------------------ rank ---

int cmd_rank(const std::string& model_path, int layer, std::uint64_t tie_seed,
             const std::string& json_path) {
  const Network net = load_model(model_path);
  const SusceptibilityRanking ranking = rank_neurons(net, layer, tie_seed);
  std::printf("%6s %8s %14s\n", "rank", "neuron", "L1 out-norm");
  for (std::size_t i = 0; i < ranking.order.size(); ++i)
    std::printf("%6zu %8d %14.6g\n", i + 1, ranking.order[i], ranking.norms[i]);
  if (!json_path.empty()) {
    json j = {{"layer", ranking.layer},
              {"order", ranking.order},
              {"norms", ranking.norms},
              {"tie_seed", ranking.tie_seed}};
    write_file(json_path, j.dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "rank";
    manifest.parameters = {{"model", model_path}, {"layer", layer}};
    manifest.seeds = {tie_seed};
    manifest.input_digests.emplace_back(model_path, file_digest(model_path));
    write_manifest(manifest, json_path + ".manifest.json");
  }
  return kExitOk;
}

// -------------------------------------------------------------------- mc ---

struct McArgs {
  int n = 128, n_p = 0;
  RealFlag gamma, delta, alpha, shell_spread;
  long long M = 1, trials = 100000;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string model = "adversarial-shell";
  std::string fixed_path;
  std::string mode = "random";
  std::string json_path;
};

int cmd_mc(const McArgs& args) {
  McConfig cfg;
  cfg.n = args.n;
  cfg.n_p = args.n_p > 0 ? args.n_p : args.n;
  cfg.gamma = args.gamma.value;
  cfg.delta = args.delta.value;
  cfg.alpha = args.alpha.value;
  cfg.M = args.M;
  cfg.trials = args.trials;
  cfg.seed = args.seed;
  cfg.workers = args.workers;
  cfg.mode = args.mode == "worst-case" ? DisplacementMode::WorstCaseTowardLatent
                                       : DisplacementMode::RandomExact;
  if (args.model == "uniform-ball") {
    cfg.model.kind = LatentModelKind::UniformBall;
  } else if (args.model == "adversarial-shell") {
    cfg.model.kind = LatentModelKind::AdversarialShell;
    cfg.model.shell_spread = args.shell_spread.value;
  } else if (args.model == "fixed-list") {
    cfg.model.kind = LatentModelKind::FixedList;
    if (args.fixed_path.empty()) {
      std::cerr << "error: fixed-list model requires --fixed FILE\n";
      return kExitUsage;
    }
    cfg.model.fixed = to_vecs(load_vectors(args.fixed_path));
    cfg.M = static_cast<long long>(cfg.model.fixed.size());
  } else {
    std::cerr << "error: unknown latent model '" << args.model << "'\n";
    return kExitUsage;
  }

  const McResult result = mc_event_probability(cfg);
  std::printf("trials %lld: E* held %lld times, failed %lld times\n",
              result.trials, result.successes, result.failures);
  std::printf("failure frequency %.6g  (95%% Wilson [%.6g, %.6g])\n",
              result.failure_frequency, result.failure_wilson_low,
              result.failure_wilson_high);
  try {
    const double p1 =
        cap_term_integral(cfg.n_p, std::acos(phi(cfg.gamma, cfg.delta, cfg.alpha)))
            .value;
    std::printf("theoretical cap term P1 = %.6g, M*P1 = %.6g\n", p1,
                static_cast<double>(cfg.M) * p1);
  } catch (const HypothesisError& e) {
    std::printf("cap term unavailable: %s\n", e.what());
  }

  if (!args.json_path.empty()) {
    write_file(args.json_path, mc_result_to_json(cfg, result).dump(2) + "\n");
    RunManifest manifest;
    manifest.command = "mc";
    manifest.parameters = mc_result_to_json(cfg, result)["config"];
    manifest.seeds = {cfg.seed};
    write_manifest(manifest, args.json_path + ".manifest.json");
  }
  return kExitOk;
}

// ------------------------------------------------------------------- gen ---

struct GenArgs {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int input_dim = 100;
  int latent_dim = 200;
  int hidden = 100;
  int classes = 10;
  std::string latent_act = "relu";
  std::string final_act = "softmax";
  int count = 2500;
  int est_count = 25;
  int clusters = 10;
  RealFlag cluster_spread, jitter, box_lo, box_hi;
};

int cmd_gen(const GenArgs& args) {
  if (args.count <= args.est_count) {
    std::cerr << "error: --count must exceed --est-count\n";
    return kExitUsage;
  }
  Rng rng(args.seed);

  Network net;
  net.input_dim = args.input_dim;
  net.input_box.lower = Vec::Constant(args.input_dim, args.box_lo.value);
  net.input_box.upper = Vec::Constant(args.input_dim, args.box_hi.value);
  net.metadata["name"] = "synthetic-" + std::to_string(args.seed);
  net.metadata["generator"] = "stealthctl gen";

  auto dense = [&rng](int in, int out, Activation act) {
    DenseLayer L;
    L.in_dim = in;
    L.out_dim = out;
    L.activation = act;
    L.weights.resize(out, in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) L.weights(i, j) = scale * rng.next_gaussian();
    L.biases = Vec::Zero(out);
    return L;
  };

  net.layers.push_back(dense(args.input_dim, args.latent_dim,
                             activation_from_string(args.latent_act)));
  net.layers.push_back(dense(args.latent_dim, args.hidden, Activation::ReLU));
  net.layers.push_back(dense(args.hidden, args.classes,
                             activation_from_string(args.final_act)));
  net.validate();

  // clustered inputs around the box center: validation data concentrates,
  // mirroring real test sets
  const double width = args.box_hi.value - args.box_lo.value;
  const double mid = 0.5 * (args.box_lo.value + args.box_hi.value);
  std::vector<Vec> centers;
  for (int c = 0; c < args.clusters; ++c) {
    Vec center(args.input_dim);
    for (int i = 0; i < args.input_dim; ++i)
      center[i] = mid + args.cluster_spread.value * width * rng.next_gaussian();
    centers.push_back(project_box(center, net.input_box));
  }
  auto draw_input = [&](int cluster) {
    Vec u = centers[cluster % centers.size()];
    for (int i = 0; i < args.input_dim; ++i)
      u[i] += args.jitter.value * width * rng.next_gaussian();
    return project_box(u, net.input_box);
  };

  VectorSet est{args.input_dim, {}}, val{args.input_dim, {}}, target{args.input_dim, {}};
  for (int i = 0; i < args.count; ++i) {
    Vec u = draw_input(i);
    if (i < args.est_count)
      est.vectors.push_back(std::move(u));
    else
      val.vectors.push_back(std::move(u));
  }
  target.vectors.push_back(draw_input(0));

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  save_model(net, dir / "model.json");
  save_vectors(est, dir / "est.json");
  save_vectors(val, dir / "val.json");
  save_vectors(target, dir / "target.json");

  RunManifest manifest;
  manifest.command = "gen";
  manifest.parameters = {{"input_dim", args.input_dim},
                         {"latent_dim", args.latent_dim},
                         {"hidden", args.hidden},
                         {"classes", args.classes},
                         {"latent_act", args.latent_act},
                         {"final_act", args.final_act},
                         {"count", args.count},
                         {"est_count", args.est_count},
                         {"clusters", args.clusters},
                         {"cluster_spread", args.cluster_spread.value},
                         {"jitter", args.jitter.value},
                         {"box", {args.box_lo.value, args.box_hi.value}}};
  manifest.seeds = {args.seed};
  write_manifest(manifest, dir / "manifest.json");

  std::printf("wrote model.json, est.json (%d), val.json (%d), target.json under %s\n",
              args.est_count, args.count - args.est_count, args.out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stealth-attack construction, planting and audit toolkit"};
  app.require_subcommand(1);

  // bounds
  BoundsArgs bounds_args;
  CLI::App* bounds = app.add_subcommand("bounds", "evaluate success-probability bounds");
  bounds->add_option("--M", bounds_args.M, "validation cardinality bound");
  bounds->add_option("--n", bounds_args.n, "latent dimension")->required();
  bounds->add_option("--n-p", bounds_args.n_p, "subspace dimension (default n)");
  add_real(bounds, "--gamma", bounds_args.gamma, 0.9, "gamma in (0,1)");
  add_real(bounds, "--delta", bounds_args.delta, 1.0 / 3.0, "delta in (0,1]");
  add_real(bounds, "--alpha", bounds_args.alpha, 0.0, "achieved accuracy");
  add_real(bounds, "--C", bounds_args.C, 1.0, "non-degeneracy constant");
  add_real(bounds, "--eps-collapse", bounds_args.eps_collapse, 0.0,
           "collapse slack in [0, gamma*delta]");
  bounds->add_flag("--collapse", bounds_args.want_collapse,
                   "require the collapse bound (exit 2 if gamma*delta >= 1/2)");
  bounds->add_option("--sweep-alpha", bounds_args.sweep_alpha, "lo:hi:count");
  bounds->add_option("--sweep-n", bounds_args.sweep_n, "lo:hi:count");
  bounds->add_option("--csv", bounds_args.csv_path, "write sweep rows as CSV");
  bounds->add_option("--json", bounds_args.json_path, "write report JSON");

  // attack
  AttackArgs attack_args;
  attack_args.seed = default_seed();
  CLI::App* attack = app.add_subcommand("attack", "plan an attack end to end");
  attack->add_option("model", attack_args.model_path, "model JSON")->required();
  attack->add_option("--cut", attack_args.cut, "latent layer index")->required();
  attack->add_option("--head-index", attack_args.head_index, "monitored output");
  attack->add_option("--target", attack_args.target_path,
                     "target inputs file (targeted attack; minimal alpha wins)");
  attack->add_option("--est", attack_args.est_path, "estimation set for R")->required();
  attack->add_flag("--est-latents", attack_args.est_latents,
                   "estimation file contains latents, not inputs");
  add_real(attack, "--gamma", attack_args.gamma, 0.9, "gamma in (0,1)");
  add_real(attack, "--delta", attack_args.delta, 1.0 / 3.0, "delta in (0,1]");
  add_real(attack, "--Delta", attack_args.Delta, 50.0, "required trigger response");
  add_real(attack, "--eps", attack_args.eps, 0.0, "validation tolerance");
  attack->add_option("--g", attack_args.g_kind, "relu|sigmoid");
  attack->add_option("--sign", attack_args.sign, "+1 or -1");
  add_real(attack, "--margin", attack_args.margin, 2.302585092994046,
           "sigmoid log-odds headroom");
  attack->add_option("--M", attack_args.M, "validation cardinality bound");
  add_real(attack, "--safety", attack_args.safety, 1.0, "radius safety factor");
  attack->add_option("--subspace", attack_args.subspace,
                     "auto|full trigger-search subspace");
  attack->add_option("--seed", attack_args.seed, "RNG seed");
  attack->add_option("--restarts", attack_args.restarts, "plain-attack restarts; each redraws x and the start point");
  add_real(attack, "--lambda1", attack_args.lambda1, 10.0, "penalty weight 1");
  add_real(attack, "--lambda2", attack_args.lambda2, 10.0, "penalty weight 2");
  add_real(attack, "--p1", attack_args.p1, 2.0, "penalty exponent 1");
  add_real(attack, "--p2", attack_args.p2, 2.0, "penalty exponent 2");
  attack->add_option("--max-iters", attack_args.max_iters, "gradient steps");
  add_real(attack, "--step0", attack_args.step0, 0.0, "initial step size");
  add_real(attack, "--step-decay", attack_args.step_decay, 1e-3, "step decay");
  add_real(attack, "--alpha-target", attack_args.alpha_target, 0.0,
           "early-stop accuracy");
  attack->add_flag("--round-integers", attack_args.round_integers,
                   "quantize the trigger to integer pixels");
  attack->add_option("--out-dir", attack_args.out_dir, "output directory");

  // plant
  PlantArgs plant_args;
  CLI::App* plant = app.add_subcommand("plant", "plant a neuron into a model");
  plant->add_option("model", plant_args.model_path, "model JSON")->required();
  plant->add_option("neuron", plant_args.neuron_path, "neuron JSON")->required();
  plant->add_option("--scenario", plant_args.scenario, "1|2|3")->required();
  plant->add_option("--cut", plant_args.cut, "latent layer index (scenarios 1/2)");
  plant->add_option("--head-index", plant_args.head_index, "monitored output");
  plant->add_option("--layer", plant_args.layer, "victim layer (scenario 3)");
  plant->add_option("--victim", plant_args.victim,
                    "victim neuron (scenario 3; default rank 1)");
  plant->add_option("--tie-seed", plant_args.tie_seed, "ranking tie-break seed");
  plant->add_option("--out", plant_args.out_path, "planted model path");

  // verify
  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "check stealth constraints");
  verify->add_option("original", verify_args.original_path, "original model")->required();
  verify->add_option("planted", verify_args.planted_path, "planted model")->required();
  verify->add_option("--validation", verify_args.validation_path, "validation file")
      ->required();
  verify->add_flag("--latents", verify_args.latents,
                   "validation file contains latents, not inputs");
  verify->add_option("--trigger", verify_args.trigger_path, "trigger JSON")->required();
  verify->add_option("--neuron", verify_args.neuron_path,
                     "attack neuron JSON (enables histogram)");
  verify->add_option("--cut", verify_args.cut, "latent layer index")->required();
  verify->add_option("--head-index", verify_args.head_index, "monitored output");
  add_real(verify, "--eps", verify_args.eps, 0.0, "validation tolerance");
  add_real(verify, "--Delta", verify_args.Delta, 50.0, "required trigger response");
  verify->add_option("--bins", verify_args.bins, "histogram bins");
  verify->add_option("--report", verify_args.report_path, "report JSON path");
  verify->add_option("--hist-csv", verify_args.hist_csv_path,
                     "write the pre-activation histogram as CSV");

  // rank
  std::string rank_model, rank_json;
  int rank_layer = 0;
  std::uint64_t rank_tie_seed = 0;
  CLI::App* rank = app.add_subcommand("rank", "susceptibility ranking of a layer");
  rank->add_option("model", rank_model, "model JSON")->required();
  rank->add_option("--layer", rank_layer, "layer index")->required();
  rank->add_option("--tie-seed", rank_tie_seed, "tie-break seed");
  rank->add_option("--json", rank_json, "write ranking JSON");

  // mc
  McArgs mc_args;
  mc_args.seed = default_seed();
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo check of the success event");
  mc->add_option("--n", mc_args.n, "ambient latent dimension");
  mc->add_option("--n-p", mc_args.n_p, "sampling subspace dimension (default n)");
  add_real(mc, "--gamma", mc_args.gamma, 0.9, "gamma in (0,1)");
  add_real(mc, "--delta", mc_args.delta, 1.0 / 3.0, "delta in (0,1]");
  add_real(mc, "--alpha", mc_args.alpha, 0.0, "accuracy");
  mc->add_option("--M", mc_args.M, "validation latents per trial");
  mc->add_option("--trials", mc_args.trials, "number of trials");
  mc->add_option("--seed", mc_args.seed, "RNG seed");
  mc->add_option("--workers", mc_args.workers, "worker threads");
  mc->add_option("--model", mc_args.model,
                 "uniform-ball|fixed-list|adversarial-shell");
  mc->add_option("--fixed", mc_args.fixed_path, "fixed-list latents file");
  add_real(mc, "--shell-spread", mc_args.shell_spread, 0.0, "shell cluster spread");
  mc->add_option("--mode", mc_args.mode, "random|worst-case displacement");
  mc->add_option("--json", mc_args.json_path, "write MC report JSON");

  // hash
  std::string hash_model;
  CLI::App* hash = app.add_subcommand("hash", "canonical SHA-256 of a model");
  hash->add_option("model", hash_model, "model JSON")->required();

  // gen
  GenArgs gen_args;
  gen_args.seed = default_seed();
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic model + data");
  gen->add_option("--out-dir", gen_args.out_dir, "output directory");
  gen->add_option("--seed", gen_args.seed, "RNG seed");
  gen->add_option("--input-dim", gen_args.input_dim, "input dimension");
  gen->add_option("--latent-dim", gen_args.latent_dim, "latent dimension");
  gen->add_option("--hidden", gen_args.hidden, "head hidden width");
  gen->add_option("--classes", gen_args.classes, "output width");
  gen->add_option("--latent-act", gen_args.latent_act, "latent activation");
  gen->add_option("--final-act", gen_args.final_act, "final activation");
  gen->add_option("--count", gen_args.count, "total generated inputs");
  gen->add_option("--est-count", gen_args.est_count, "estimation subset size");
  gen->add_option("--clusters", gen_args.clusters, "input cluster count");
  add_real(gen, "--cluster-spread", gen_args.cluster_spread, 0.1,
           "cluster center spread fraction");
  add_real(gen, "--jitter", gen_args.jitter, 0.03, "within-cluster jitter fraction");
  add_real(gen, "--box-lo", gen_args.box_lo, 0.0, "input box lower bound");
  add_real(gen, "--box-hi", gen_args.box_hi, 1.0, "input box upper bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (bounds->parsed()) return cmd_bounds(bounds_args);
    if (attack->parsed()) return cmd_attack(attack_args);
    if (plant->parsed()) return cmd_plant(plant_args);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (rank->parsed()) return cmd_rank(rank_model, rank_layer, rank_tie_seed, rank_json);
    if (mc->parsed()) return cmd_mc(mc_args);
    if (hash->parsed()) {
      std::printf("%s\n", model_digest(load_model(hash_model)).c_str());
      return kExitOk;
    }
    if (gen->parsed()) return cmd_gen(gen_args);
  } catch (const HypothesisError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const SearchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAlgorithm;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
