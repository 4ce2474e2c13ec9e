#include "hinge_rl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#ifndef HINGE_RL_GIT_REV
#define HINGE_RL_GIT_REV "unknown"
#endif

namespace hinge_rl {

double percentile(std::vector<double> data, double p) {
  if (data.empty()) throw std::invalid_argument("percentile of empty data");
  if (p < 0.0 || p > 100.0) throw std::invalid_argument("percentile p out of range");
  std::sort(data.begin(), data.end());
  const std::size_t n = data.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return data[rank - 1];
}

bool MetricsReport::percentiles_monotone() const {
  return force_p50 <= force_p90 && force_p90 <= force_max && torque_p50 <= torque_p90 &&
         torque_p90 <= torque_max && success_rate >= 0.0 && success_rate <= 1.0;
}

std::string to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::Oracle: return "oracle";
    case VariantKind::Random: return "random";
    case VariantKind::BasePolicy: return "bp";
    case VariantKind::Adaptive: return "ap";
    case VariantKind::FineTuned: return "fap";
    case VariantKind::NoEncoder: return "woe";
    case VariantKind::SixDof: return "6dof";
  }
  return "?";
}

bool door_openable_within_budget(const EnvParams& e, const SimConfig& sim, double margin) {
  const double horizon = sim.max_steps * sim.control_dt;
  return std::abs(e.target_speed) * horizon > sim.success_angle * margin;
}

EnvParams sample_feasible_env(Rng& rng, const SimConfig& sim, double margin) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const EnvParams e = sample_env(rng);
    if (door_openable_within_budget(e, sim, margin)) return e;
  }
  throw std::runtime_error("sample_feasible_env: rejection sampling failed");
}

namespace {

/// Latent draw for variants that see the true environment. Sampling
/// consumes rng draws even when disabled so door/episode streams stay
/// aligned across paired arms.
std::vector<double> episode_latent(EncoderNet& encoder, const EnvParams& e, Rng& rng,
                                   bool sample) {
  const auto en = normalize(e);
  encoder.encode(std::vector<double>(en.data(), en.data() + kEnvParamCount));
  std::vector<double> z(kLatentDim);
  for (int i = 0; i < kLatentDim; ++i) {
    const double eps = rng.normal();
    z[i] = encoder.mu()[i] + (sample ? eps : 0.0) * encoder.sigma()[i];
  }
  return z;
}

void record_step(EpisodeStats* stats, const DoorEpisodeEnv::Step& step,
                 const DoorEpisodeEnv& env, double a0, double a1, double* reward_sum) {
  ++stats->steps;
  *reward_sum += step.reward;
  stats->r_err.push_back(step.r_err);
  stats->theta_err.push_back(step.theta_err);
  stats->force_norm.push_back(step.force_norm);
  stats->torque_norm.push_back(step.torque_norm);
  stats->rewards.push_back(step.reward);
  stats->door_angle.push_back(env.door_angle());
  stats->actions.push_back(a0);
  stats->actions.push_back(a1);
  stats->twist_err.push_back(step.twist_err);
  stats->states.push_back(step.s);
}

EpisodeStats run_state_policy_episode(const PolicyVariant& variant, DoorEpisodeEnv& env,
                                      Rng& rng, const ActionBounds& bounds) {
  PolicyNet& policy = *variant.policy;
  const int act_dim = policy.act_dim();
  std::vector<double> z;
  if (variant.encoder != nullptr) {
    z = episode_latent(*variant.encoder, env.env_params(), rng, variant.sample_latent);
  } else {
    z.assign(kLatentDim, 0.0);
  }

  HistoryWindow window(variant.adapt != nullptr ? variant.adapt->window_length() : 1);
  std::vector<double> x(policy.obs_dim());
  std::vector<double> a_prev(act_dim, 0.0);

  EpisodeStats stats;
  double reward_sum = 0.0;
  while (!env.done()) {
    const auto s_scaled = policy_input_state(env.state());
    if (variant.kind == VariantKind::NoEncoder) {
      window.push(s_scaled, a_prev[0], a_prev[1]);
      variant.adapt->forward(window.channel_major());
      std::copy(variant.adapt->mu_hat().begin(), variant.adapt->mu_hat().end(),
                z.begin());
    }
    std::copy(z.begin(), z.end(), x.begin());
    for (int i = 0; i < kStateDim; ++i) x[kLatentDim + i] = s_scaled[i];
    std::copy(a_prev.begin(), a_prev.end(), x.begin() + kLatentDim + kStateDim);

    policy.forward(x);
    DoorEpisodeEnv::Step step;
    double a0 = 0.0, a1 = 0.0;
    if (variant.kind == VariantKind::SixDof) {
      const Twist cmd = squash_6dof(policy.action_mean().data(), bounds);
      step = env.step_twist(cmd);
      for (int i = 0; i < 3; ++i) a_prev[i] = cmd.linear[i];
      for (int i = 0; i < 3; ++i) a_prev[3 + i] = cmd.angular[i];
      a0 = cmd.linear.x();
      a1 = cmd.angular.z();
    } else {
      const Action a = squash_2dof(policy.action_mean().data(), bounds);
      step = env.step_estimate(a);
      a_prev[0] = a.r_hat;
      a_prev[1] = a.theta_hat;
      a0 = a.r_hat;
      a1 = a.theta_hat;
    }
    record_step(&stats, step, env, a0, a1, &reward_sum);
  }
  stats.success = env.success_ever();
  stats.mean_reward = stats.steps > 0 ? reward_sum / stats.steps : 0.0;
  return stats;
}

EpisodeStats run_scripted_episode(const PolicyVariant& variant, DoorEpisodeEnv& env,
                                  Rng& rng, const ActionBounds& bounds) {
  EpisodeStats stats;
  double reward_sum = 0.0;
  while (!env.done()) {
    Action a;
    if (variant.kind == VariantKind::Oracle) {
      a.r_hat = env.ground_truth_r();
      a.theta_hat = clamp_grasp_angle(env.ground_truth_theta());
    } else {
      a.r_hat = rng.uniform(bounds.r_lo, bounds.r_hi);
      a.theta_hat = rng.uniform(-bounds.theta_span, bounds.theta_span);
    }
    const auto step = env.step_estimate(a);
    record_step(&stats, step, env, a.r_hat, a.theta_hat, &reward_sum);
  }
  stats.success = env.success_ever();
  stats.mean_reward = stats.steps > 0 ? reward_sum / stats.steps : 0.0;
  return stats;
}

}  // namespace

EpisodeStats run_variant_episode(const PolicyVariant& variant, DoorEpisodeEnv& env,
                                 Rng& rng, const ActionBounds& bounds) {
  switch (variant.kind) {
    case VariantKind::Oracle:
    case VariantKind::Random:
      return run_scripted_episode(variant, env, rng, bounds);
    case VariantKind::Adaptive:
    case VariantKind::FineTuned:
      return run_adaptive_policy(*variant.adapt, *variant.policy, env, rng,
                                 variant.sample_latent);
    case VariantKind::BasePolicy:
    case VariantKind::NoEncoder:
    case VariantKind::SixDof:
      return run_state_policy_episode(variant, env, rng, bounds);
  }
  throw std::logic_error("unhandled variant kind");
}

EvalResult evaluate(const PolicyVariant& variant, const EvalOptions& options) {
  EvalResult result;
  Rng door_rng(options.seed);
  Rng episode_rng = door_rng.spawn(0x5EED);

  std::vector<double> r_err, theta_err, force, torque, twist_err;
  double reward_sum = 0.0;
  std::int64_t step_count = 0;
  int successes = 0;

  for (int ep = 0; ep < options.episodes; ++ep) {
    const EnvParams e =
        options.feasible_doors_only
            ? sample_feasible_env(door_rng, options.sim, options.feasibility_margin)
            : sample_env(door_rng);
    result.door_hashes.push_back(envparams_hash(e));

    DoorEpisodeEnv env(options.sim);
    env.reset_with(e);
    EpisodeStats stats = run_variant_episode(variant, env, episode_rng, options.bounds);

    successes += stats.success ? 1 : 0;
    reward_sum += stats.mean_reward * stats.steps;
    step_count += stats.steps;
    if (options.per_episode_stats) {
      const auto emean = [](const std::vector<double>& v) {
        return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
      };
      r_err.push_back(emean(stats.r_err));
      theta_err.push_back(emean(stats.theta_err));
      force.push_back(emean(stats.force_norm));
      torque.push_back(emean(stats.torque_norm));
      twist_err.push_back(emean(stats.twist_err));
    } else {
      r_err.insert(r_err.end(), stats.r_err.begin(), stats.r_err.end());
      theta_err.insert(theta_err.end(), stats.theta_err.begin(), stats.theta_err.end());
      force.insert(force.end(), stats.force_norm.begin(), stats.force_norm.end());
      torque.insert(torque.end(), stats.torque_norm.begin(), stats.torque_norm.end());
      twist_err.insert(twist_err.end(), stats.twist_err.begin(), stats.twist_err.end());
    }
    result.episodes.push_back(std::move(stats));
  }

  MetricsReport& rep = result.report;
  rep.episodes = options.episodes;
  rep.seed = options.seed;
  rep.success_rate = static_cast<double>(successes) / options.episodes;
  const auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  };
  rep.r_err_mean = mean(r_err);
  rep.r_err_p90 = percentile(r_err, 90.0);
  rep.theta_err_mean = mean(theta_err);
  rep.theta_err_p90 = percentile(theta_err, 90.0);
  rep.force_mean = mean(force);
  rep.force_max = *std::max_element(force.begin(), force.end());
  rep.force_p50 = percentile(force, 50.0);
  rep.force_p90 = percentile(force, 90.0);
  rep.torque_mean = mean(torque);
  rep.torque_max = *std::max_element(torque.begin(), torque.end());
  rep.torque_p50 = percentile(torque, 50.0);
  rep.torque_p90 = percentile(torque, 90.0);
  rep.twist_err_mean = mean(twist_err);
  rep.twist_err_p90 = percentile(twist_err, 90.0);
  rep.mean_reward = step_count > 0 ? reward_sum / static_cast<double>(step_count) : 0.0;
  return result;
}

// ---- Experiments ----

std::string to_string(ExperimentName name) {
  switch (name) {
    case ExperimentName::SdVsDr: return "sd_vs_dr";
    case ExperimentName::WeVsWoe: return "we_vs_woe";
    case ExperimentName::TwoDofVsSixDof: return "2dof_vs_6dof";
    case ExperimentName::ApVsFap: return "ap_vs_fap";
    case ExperimentName::RthetaVsVelocity: return "rtheta_vs_velocity";
  }
  return "?";
}

ExperimentName experiment_from_string(const std::string& name) {
  if (name == "sd_vs_dr") return ExperimentName::SdVsDr;
  if (name == "we_vs_woe") return ExperimentName::WeVsWoe;
  if (name == "2dof_vs_6dof") return ExperimentName::TwoDofVsSixDof;
  if (name == "ap_vs_fap") return ExperimentName::ApVsFap;
  if (name == "rtheta_vs_velocity") return ExperimentName::RthetaVsVelocity;
  throw std::invalid_argument("unknown experiment: " + name);
}

AblationResult run_paired_evaluation(ExperimentName name,
                                     const std::vector<PolicyVariant>& variants,
                                     const std::vector<std::string>& labels,
                                     const EvalOptions& options) {
  if (variants.size() != labels.size() || variants.empty()) {
    throw std::invalid_argument("run_paired_evaluation: arm mismatch");
  }
  AblationResult result;
  result.name = name;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    ArmResult arm;
    arm.label = labels[i];
    arm.eval = evaluate(variants[i], options);
    result.arms.push_back(std::move(arm));
  }
  result.paired_doors = true;
  for (std::size_t i = 1; i < result.arms.size(); ++i) {
    if (result.arms[i].eval.door_hashes != result.arms[0].eval.door_hashes) {
      result.paired_doors = false;
    }
  }
  return result;
}

namespace {

void write_report_row(std::ostream& out, const std::string& label,
                      const MetricsReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
                "%.12g,%.12g,%.12g,%.12g,%.12g,%d\n",
                label.c_str(), r.success_rate, r.r_err_mean, r.r_err_p90,
                r.theta_err_mean, r.theta_err_p90, r.force_mean, r.force_max,
                r.force_p50, r.force_p90, r.torque_mean, r.torque_max, r.torque_p50,
                r.torque_p90, r.twist_err_mean, r.twist_err_p90, r.mean_reward,
                r.episodes);
  out << buf;
}

constexpr const char* kReportHeader =
    "arm,success_rate,r_err_mean,r_err_p90,theta_err_mean,theta_err_p90,"
    "force_mean,force_max,force_p50,force_p90,torque_mean,torque_max,torque_p50,"
    "torque_p90,twist_err_mean,twist_err_p90,mean_reward,episodes";

}  // namespace

void write_metrics_csv(std::ostream& out, const MetricsReport& report,
                       const std::string& header_comment) {
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << kReportHeader << "\n";
  write_report_row(out, "result", report);
}

void write_ablation_csv(std::ostream& out, const AblationResult& result,
                        const std::string& header_comment) {
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "# experiment=" << to_string(result.name)
      << " paired_doors=" << (result.paired_doors ? 1 : 0) << "\n";
  out << kReportHeader << "\n";
  for (const auto& arm : result.arms) {
    write_report_row(out, arm.label, arm.eval.report);
  }
}

void write_boxplot_csv(std::ostream& out, const AblationResult& result,
                       const std::string& header_comment) {
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "arm,episode,door_hash,success,steps,mean_reward,mean_r_err,mean_theta_err,"
         "mean_force,mean_torque,max_force,max_torque\n";
  const auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  };
  const auto vmax = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  };
  char buf[384];
  for (const auto& arm : result.arms) {
    for (std::size_t ep = 0; ep < arm.eval.episodes.size(); ++ep) {
      const EpisodeStats& s = arm.eval.episodes[ep];
      std::snprintf(buf, sizeof(buf),
                    "%s,%zu,%016llx,%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                    arm.label.c_str(), ep,
                    static_cast<unsigned long long>(arm.eval.door_hashes[ep]),
                    s.success ? 1 : 0, s.steps, s.mean_reward, mean(s.r_err),
                    mean(s.theta_err), mean(s.force_norm), mean(s.torque_norm),
                    vmax(s.force_norm), vmax(s.torque_norm));
      out << buf;
    }
  }
}

// ---- Config ----

Config Config::from_string(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string stripped = strip(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  " is not key=value: " + stripped);
    }
    config.kv_[strip(stripped.substr(0, eq))] = strip(stripped.substr(eq + 1));
  }
  return config;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stod(it->second);
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stoi(it->second);
}

std::int64_t Config::get_int64(const std::string& key, std::int64_t fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stoll(it->second);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stoull(it->second);
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

std::string Config::canonical() const {
  std::ostringstream out;
  for (const auto& [k, v] : kv_) out << k << "=" << v << "\n";
  return out.str();
}

std::uint64_t Config::hash() const {
  const std::string text = canonical();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string build_revision() { return HINGE_RL_GIT_REV; }

std::string run_header(const Config& config, std::uint64_t seed) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "config_hash=%016llx seed=%llu rev=%s",
                static_cast<unsigned long long>(config.hash()),
                static_cast<unsigned long long>(seed), build_revision().c_str());
  return buf;
}

}  // namespace hinge_rl
