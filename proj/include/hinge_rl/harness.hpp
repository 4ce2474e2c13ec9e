#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hinge_rl/adaptation.hpp"
#include "hinge_rl/policy_ppo.hpp"

namespace hinge_rl {

/// Nearest-rank percentile: the sorted value at index ceil(p/100 * N).
/// Throws on empty data.
double percentile(std::vector<double> data, double p);

struct MetricsReport {
  double success_rate = 0.0;
  double r_err_mean = 0.0;
  double r_err_p90 = 0.0;
  double theta_err_mean = 0.0;
  double theta_err_p90 = 0.0;
  double force_mean = 0.0;
  double force_max = 0.0;
  double force_p50 = 0.0;
  double force_p90 = 0.0;
  double torque_mean = 0.0;
  double torque_max = 0.0;
  double torque_p50 = 0.0;
  double torque_p90 = 0.0;
  double twist_err_mean = 0.0;
  double twist_err_p90 = 0.0;
  double mean_reward = 0.0;
  int episodes = 0;
  std::uint64_t seed = 0;

  bool percentiles_monotone() const;
};

enum class VariantKind {
  Oracle,        // ground-truth (r, theta) every step
  Random,        // uniform actions inside the bounds
  BasePolicy,    // pi with the true latent
  Adaptive,      // rho + pi
  FineTuned,     // rho* + pi (same machinery, different checkpoint)
  NoEncoder,     // feature net + pi*
  SixDof,        // 6-DoF twist policy with the true latent
};

std::string to_string(VariantKind kind);

/// A policy under evaluation; non-owning pointers, only the pieces the kind
/// requires need to be set.
struct PolicyVariant {
  VariantKind kind = VariantKind::Oracle;
  PolicyNet* policy = nullptr;
  EncoderNet* encoder = nullptr;
  AdaptNet* adapt = nullptr;
  bool sample_latent = true;  // Adaptive/FineTuned: draw eps' (else use mu_hat)
};

struct EvalOptions {
  int episodes = 20;
  std::uint64_t seed = 0;
  /// Restrict evaluation doors to ones whose commanded speed can pass the
  /// success angle inside the step budget (with margin); the uniform speed
  /// range makes ~43% of doors unopenable by any policy, which would cap
  /// success-rate comparisons rather than measure the policies.
  bool feasible_doors_only = false;
  double feasibility_margin = 1.3;
  /// Aggregate per-episode means instead of pooling every step.
  bool per_episode_stats = false;
  SimConfig sim;
  ActionBounds bounds;
};

struct EvalResult {
  MetricsReport report;
  std::vector<EpisodeStats> episodes;
  std::vector<std::uint64_t> door_hashes;
};

/// True when a door's target speed can take it past the success angle
/// within the episode budget, with the given safety margin.
bool door_openable_within_budget(const EnvParams& e, const SimConfig& sim, double margin);

/// Domain sample restricted to openable doors (rejection sampling).
EnvParams sample_feasible_env(Rng& rng, const SimConfig& sim, double margin);

/// One evaluation episode of any variant on a given door.
EpisodeStats run_variant_episode(const PolicyVariant& variant, DoorEpisodeEnv& env,
                                 Rng& rng, const ActionBounds& bounds);

/// Evaluates a variant over freshly sampled doors (fixed seed sequence) and
/// aggregates pooled per-step statistics into a MetricsReport.
EvalResult evaluate(const PolicyVariant& variant, const EvalOptions& options);

// ---- Experiments ----

enum class ExperimentName {
  SdVsDr,            // single door vs domain randomization
  WeVsWoe,           // with encoder vs without encoder
  TwoDofVsSixDof,    // dimension-reduced vs raw twist actions
  ApVsFap,           // adaptation module vs fine-tuned adaptation module
  RthetaVsVelocity,  // estimate-supervised vs velocity-supervised reward
};

std::string to_string(ExperimentName name);
ExperimentName experiment_from_string(const std::string& name);

struct ArmResult {
  std::string label;
  EvalResult eval;
};

struct AblationResult {
  ExperimentName name;
  std::vector<ArmResult> arms;
  bool paired_doors = false;  // all arms saw identical door sequences
};

/// Evaluates every arm of an experiment under identical seeds and door
/// sequences. The variants must be constructed by the caller (checkpoints
/// already loaded); this runs the paired evaluation and checks pairing.
AblationResult run_paired_evaluation(ExperimentName name,
                                     const std::vector<PolicyVariant>& variants,
                                     const std::vector<std::string>& labels,
                                     const EvalOptions& options);

/// Side-by-side metrics table, one row per arm.
void write_ablation_csv(std::ostream& out, const AblationResult& result,
                        const std::string& header_comment);

/// Per-episode distribution rows (variant, episode, means, success) for
/// boxplot-style downstream plotting; 3 x episodes rows for BP/AP/FAP.
void write_boxplot_csv(std::ostream& out, const AblationResult& result,
                       const std::string& header_comment);

void write_metrics_csv(std::ostream& out, const MetricsReport& report,
                       const std::string& header_comment);

// ---- Flat key=value config ----

class Config {
 public:
  Config() = default;

  static Config from_string(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::int64_t get_int64(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  void set(const std::string& key, const std::string& value);

  /// Sorted key=value lines; the config hash is FNV-1a over this.
  std::string canonical() const;
  std::uint64_t hash() const;

 private:
  std::map<std::string, std::string> kv_;
};

/// Git revision baked in at build time ("unknown" outside a repo).
std::string build_revision();

/// Standard header comment carried by every emitted CSV.
std::string run_header(const Config& config, std::uint64_t seed);

}  // namespace hinge_rl
