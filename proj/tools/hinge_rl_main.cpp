// hinge-rl: train and evaluate the door-opening pipeline.
//
// Subcommands: sample-env, train-vae, train-policy, train-adapt,
// finetune-adapt, eval, ablate. Each takes --config <file>, --seed <u64>,
// --out <dir>; config keys override built-in defaults, the seed pins every
// random stream, and all outputs land under the run directory with a header
// carrying the config hash, seed and build revision.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "hinge_rl/harness.hpp"

namespace fs = std::filesystem;
using namespace hinge_rl;

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "runs/out";
};

Config load_config(const CommonArgs& args) {
  Config config;
  if (!args.config_path.empty()) config = Config::load(args.config_path);
  return config;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

fs::path ensure_out_dir(const CommonArgs& args) {
  fs::create_directories(args.out_dir);
  return fs::path(args.out_dir);
}

PpoConfig ppo_config_from(const Config& config, std::uint64_t seed) {
  PpoConfig cfg;
  cfg.mode = policy_mode_from_string(config.get("mode", "dr"));
  cfg.total_steps = config.get_int64("steps", cfg.total_steps);
  cfg.horizon = config.get_int("horizon", cfg.horizon);
  cfg.num_envs = config.get_int("num_envs", cfg.num_envs);
  cfg.minibatch = config.get_int("minibatch", cfg.minibatch);
  cfg.epochs = config.get_int("ppo_epochs", cfg.epochs);
  cfg.lr = config.get_double("lr", cfg.lr);
  cfg.clip_ratio = config.get_double("clip", cfg.clip_ratio);
  cfg.gamma = config.get_double("gamma", cfg.gamma);
  cfg.gae_lambda = config.get_double("gae_lambda", cfg.gae_lambda);
  cfg.entropy_coef = config.get_double("entropy_coef", cfg.entropy_coef);
  cfg.value_coef = config.get_double("value_coef", cfg.value_coef);
  cfg.history_window = config.get_int("window", cfg.history_window);
  cfg.seed = seed;
  return cfg;
}

void write_trajectory(const fs::path& path, const EpisodeStats& episode,
                      const std::string& header) {
  std::vector<TrajectoryRow> rows;
  for (int t = 0; t < episode.steps; ++t) {
    TrajectoryRow row;
    row.step = t;
    row.door_angle = episode.door_angle[t];
    row.s = episode.states[t];
    row.a0 = episode.actions[2 * t];
    row.a1 = episode.actions[2 * t + 1];
    row.reward = episode.rewards[t];
    rows.push_back(row);
  }
  auto out = open_out(path);
  out << "# " << header << "\n";
  write_trajectory_csv(out, rows);
}

int cmd_sample_env(const CommonArgs& args) {
  const Config config = load_config(args);
  const fs::path out_dir = ensure_out_dir(args);
  const int count = config.get_int("count", 1);
  const bool feasible = config.get_int("feasible_only", 0) != 0;
  const double margin = config.get_double("feasibility_margin", 1.3);
  SimConfig sim;

  Rng rng(args.seed);
  for (int i = 0; i < count; ++i) {
    const EnvParams e =
        feasible ? sample_feasible_env(rng, sim, margin) : sample_env(rng);
    char name[64];
    std::snprintf(name, sizeof(name), "door_%03d.envparams", i);
    save_envparams((out_dir / name).string(), e);
  }
  std::cout << "wrote " << count << " door instance(s) to " << out_dir << "\n";
  return 0;
}

int cmd_train_vae(const CommonArgs& args) {
  const Config config = load_config(args);
  const fs::path out_dir = ensure_out_dir(args);
  VaeTrainConfig cfg;
  cfg.dataset_size = config.get_int("dataset", cfg.dataset_size);
  cfg.epochs = config.get_int("epochs", cfg.epochs);
  cfg.minibatch = config.get_int("minibatch", cfg.minibatch);
  cfg.lr = config.get_double("lr", cfg.lr);
  cfg.beta = config.get_double("beta", cfg.beta);
  cfg.seed = args.seed;

  EncoderNet encoder;
  DecoderNet decoder;
  const VaeTrainResult result = train_vae(encoder, decoder, cfg);
  encoder.save((out_dir / "encoder.ckpt").string());
  decoder.save((out_dir / "decoder.ckpt").string());

  auto curve = open_out(out_dir / "curve.csv");
  curve << "# " << run_header(config, args.seed) << "\n";
  curve << "epoch,total,rec,reg\n";
  for (std::size_t i = 0; i < result.epoch_total.size(); ++i) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g\n", i,
                  result.epoch_total[i], result.epoch_rec[i], result.epoch_reg[i]);
    curve << buf;
  }
  auto metrics = open_out(out_dir / "metrics.csv");
  metrics << "# " << run_header(config, args.seed) << "\n";
  metrics << "holdout_mse_per_coord,holdout_r2\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", result.holdout_mse_per_coord,
                result.holdout_r2);
  metrics << buf;
  std::cout << "vae: holdout mse/coord=" << result.holdout_mse_per_coord
            << " r2=" << result.holdout_r2 << "\n";
  return 0;
}

int cmd_train_policy(const CommonArgs& args) {
  const Config config = load_config(args);
  const fs::path out_dir = ensure_out_dir(args);
  const PpoConfig cfg = ppo_config_from(config, args.seed);

  EncoderNet encoder;
  const bool needs_encoder = cfg.mode != PolicyMode::NoEncoder;
  if (needs_encoder) {
    const std::string path = config.get("encoder", "");
    if (path.empty()) throw std::runtime_error("config key 'encoder' is required");
    encoder.load(path);
  }

  PpoTrainer trainer(cfg, needs_encoder ? &encoder : nullptr);
  const auto rows = trainer.train();
  trainer.policy().save((out_dir / "policy.ckpt").string());
  if (trainer.feature_net() != nullptr) {
    trainer.feature_net()->save((out_dir / "feature.ckpt").string());
  }
  auto curve = open_out(out_dir / "curve.csv");
  write_curve_csv(curve, rows, run_header(config, args.seed));
  if (!rows.empty()) {
    std::cout << "policy(" << to_string(cfg.mode) << "): steps=" << rows.back().env_steps
              << " mean_reward=" << rows.back().mean_reward
              << " r_err=" << rows.back().mean_r_err
              << " theta_err=" << rows.back().mean_theta_err << "\n";
  }
  return 0;
}

int cmd_train_adapt(const CommonArgs& args) {
  const Config config = load_config(args);
  const fs::path out_dir = ensure_out_dir(args);

  EncoderNet encoder;
  encoder.load(config.get("encoder", "encoder.ckpt"));
  PolicyNet policy;
  policy.load(config.get("policy", "policy.ckpt"));

  AdaptTrainConfig cfg;
  cfg.window = config.get_int("window", cfg.window);
  cfg.episodes = config.get_int("episodes", cfg.episodes);
  cfg.epochs = config.get_int("epochs", cfg.epochs);
  cfg.minibatch = config.get_int("minibatch", cfg.minibatch);
  cfg.sample_stride = config.get_int("stride", cfg.sample_stride);
  cfg.lr = config.get_double("lr", cfg.lr);
  cfg.beta = config.get_double("beta", cfg.beta);
  cfg.seed = args.seed;

  AdaptNet rho(cfg.window);
  const AdaptTrainResult result = train_adaptation(rho, policy, encoder, cfg);
  rho.save((out_dir / "adapt.ckpt").string());

  auto curve = open_out(out_dir / "curve.csv");
  curve << "# " << run_header(config, args.seed) << "\n";
  curve << "epoch,total,rec,reg\n";
  for (std::size_t i = 0; i < result.epoch_total.size(); ++i) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g\n", i,
                  result.epoch_total[i], result.epoch_rec[i], result.epoch_reg[i]);
    curve << buf;
  }
  std::cout << "adapt: holdout rec=" << result.holdout_rec
            << " baseline=" << result.baseline_rec << "\n";
  return 0;
}

int cmd_finetune_adapt(const CommonArgs& args) {
  const Config config = load_config(args);
  const fs::path out_dir = ensure_out_dir(args);

  EncoderNet encoder;
  encoder.load(config.get("encoder", "encoder.ckpt"));
  PolicyNet policy;
  policy.load(config.get("policy", "policy.ckpt"));

  FinetuneConfig cfg;
  cfg.episodes = config.get_int("episodes", cfg.episodes);
  cfg.bp_episodes = config.get_int("bp_episodes", cfg.bp_episodes);
  cfg.rounds = config.get_int("rounds", cfg.rounds);
  cfg.epochs = config.get_int("epochs", cfg.epochs);
  cfg.minibatch = config.get_int("minibatch", cfg.minibatch);
  cfg.sample_stride = config.get_int("stride", cfg.sample_stride);
  cfg.lr = config.get_double("lr", cfg.lr);
  cfg.seed = args.seed;

  const int window = config.get_int("window", 50);
  AdaptNet rho_star(window);
  rho_star.load(config.get("adapt", "adapt.ckpt"));

  const FinetuneResult result = finetune_adaptation(rho_star, policy, encoder, cfg);
  rho_star.save((out_dir / "adapt_finetuned.ckpt").string());

  auto curve = open_out(out_dir / "curve.csv");
  curve << "# " << run_header(config, args.seed) << "\n";
  curve << "epoch,lf\n";
  for (std::size_t i = 0; i < result.epoch_lf.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", i, result.epoch_lf[i]);
    curve << buf;
  }
  auto metrics = open_out(out_dir / "metrics.csv");
  metrics << "# " << run_header(config, args.seed) << "\n";
  metrics << "validation_lf_before,validation_lf_after,policy_frozen\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%d\n", result.validation_lf_before,
                result.validation_lf_after,
                result.policy_checksum_before == result.policy_checksum_after ? 1 : 0);
  metrics << buf;
  std::cout << "finetune: validation lf " << result.validation_lf_before << " -> "
            << result.validation_lf_after << " (policy frozen: "
            << (result.policy_checksum_before == result.policy_checksum_after)
            << ")\n";
  return 0;
}

struct LoadedVariant {
  PolicyVariant variant;
  // Owning storage behind the non-owning PolicyVariant pointers.
  std::unique_ptr<PolicyNet> policy;
  std::unique_ptr<EncoderNet> encoder;
  std::unique_ptr<AdaptNet> adapt;
};

LoadedVariant load_variant(const Config& config, const std::string& kind_key,
                           const std::string& prefix) {
  LoadedVariant lv;
  const std::string kind = config.get(kind_key, "bp");
  const auto path = [&](const std::string& name, const std::string& fallback) {
    return config.get(prefix.empty() ? name : prefix + "_" + name, fallback);
  };
  if (kind == "oracle") {
    lv.variant.kind = VariantKind::Oracle;
  } else if (kind == "random") {
    lv.variant.kind = VariantKind::Random;
  } else if (kind == "bp" || kind == "single" || kind == "dr" || kind == "velsup") {
    lv.variant.kind = VariantKind::BasePolicy;
    lv.policy = std::make_unique<PolicyNet>();
    lv.policy->load(path("policy", "policy.ckpt"));
    lv.encoder = std::make_unique<EncoderNet>();
    lv.encoder->load(path("encoder", "encoder.ckpt"));
  } else if (kind == "ap" || kind == "fap") {
    lv.variant.kind = kind == "ap" ? VariantKind::Adaptive : VariantKind::FineTuned;
    lv.policy = std::make_unique<PolicyNet>();
    lv.policy->load(path("policy", "policy.ckpt"));
    lv.adapt = std::make_unique<AdaptNet>(config.get_int("window", 50));
    lv.adapt->load(path("adapt", kind == "ap" ? "adapt.ckpt" : "adapt_finetuned.ckpt"));
    lv.variant.sample_latent = config.get_int("sample_latent", 1) != 0;
  } else if (kind == "woe") {
    lv.variant.kind = VariantKind::NoEncoder;
    lv.policy = std::make_unique<PolicyNet>();
    lv.policy->load(path("policy", "policy.ckpt"));
    lv.adapt = std::make_unique<AdaptNet>(config.get_int("window", 50));
    lv.adapt->load(path("feature", "feature.ckpt"));
  } else if (kind == "6dof") {
    lv.variant.kind = VariantKind::SixDof;
    lv.policy = std::make_unique<PolicyNet>(kLatentDim + kStateDim + 6, 6);
    lv.policy->load(path("policy", "policy.ckpt"));
    lv.encoder = std::make_unique<EncoderNet>();
    lv.encoder->load(path("encoder", "encoder.ckpt"));
  } else {
    throw std::runtime_error("unknown variant kind: " + kind);
  }
  lv.variant.policy = lv.policy.get();
  lv.variant.encoder = lv.encoder.get();
  lv.variant.adapt = lv.adapt.get();
  return lv;
}

EvalOptions eval_options_from(const Config& config, std::uint64_t seed) {
  EvalOptions opt;
  opt.episodes = config.get_int("episodes", 20);
  opt.seed = seed;
  opt.feasible_doors_only = config.get_int("feasible_only", 0) != 0;
  opt.feasibility_margin = config.get_double("feasibility_margin", 1.3);
  opt.per_episode_stats = config.get_int("per_episode", 0) != 0;
  return opt;
}

int cmd_eval(const CommonArgs& args) {
  const Config config = load_config(args);
  const fs::path out_dir = ensure_out_dir(args);
  LoadedVariant lv = load_variant(config, "variant", "");
  const EvalOptions opt = eval_options_from(config, args.seed);

  const EvalResult result = evaluate(lv.variant, opt);
  auto metrics = open_out(out_dir / "metrics.csv");
  write_metrics_csv(metrics, result.report, run_header(config, args.seed));
  if (!result.episodes.empty()) {
    write_trajectory(out_dir / "trajectory.csv", result.episodes.front(),
                     run_header(config, args.seed));
  }
  std::cout << "eval " << config.get("variant", "bp")
            << ": success=" << result.report.success_rate
            << " r_err=" << result.report.r_err_mean
            << " theta_err=" << result.report.theta_err_mean
            << " force=" << result.report.force_mean
            << " torque=" << result.report.torque_mean << "\n";
  return 0;
}

int cmd_ablate(const CommonArgs& args) {
  const Config config = load_config(args);
  const fs::path out_dir = ensure_out_dir(args);
  const ExperimentName name =
      experiment_from_string(config.get("experiment", "sd_vs_dr"));
  EvalOptions opt = eval_options_from(config, args.seed);

  std::vector<std::string> kinds, labels, prefixes;
  switch (name) {
    case ExperimentName::SdVsDr:
      kinds = {"bp", "bp"};
      labels = {"SD", "DR"};
      prefixes = {"sd", "dr"};
      break;
    case ExperimentName::WeVsWoe:
      kinds = {"woe", "bp"};
      labels = {"WoE", "WE"};
      prefixes = {"woe", "we"};
      break;
    case ExperimentName::TwoDofVsSixDof:
      kinds = {"6dof", "bp"};
      labels = {"6-DoF", "2-DoF"};
      prefixes = {"sixdof", "twodof"};
      opt.feasible_doors_only = config.get_int("feasible_only", 1) != 0;
      break;
    case ExperimentName::ApVsFap:
      kinds = {"bp", "ap", "fap"};
      labels = {"BP", "AP", "FAP"};
      prefixes = {"bp", "ap", "fap"};
      // Deterministic latent for the module comparison unless overridden.
      if (!config.has("sample_latent")) {
        const_cast<Config&>(config).set("sample_latent", "0");
      }
      break;
    case ExperimentName::RthetaVsVelocity:
      kinds = {"bp", "bp"};
      labels = {"r-theta", "velocity"};
      prefixes = {"rtheta", "vel"};
      break;
  }

  std::vector<LoadedVariant> loaded;
  std::vector<PolicyVariant> variants;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    Config arm_config = config;
    arm_config.set("variant", kinds[i]);
    loaded.push_back(load_variant(arm_config, "variant", prefixes[i]));
    variants.push_back(loaded.back().variant);
  }

  const AblationResult result = run_paired_evaluation(name, variants, labels, opt);
  auto table = open_out(out_dir / "ablation.csv");
  write_ablation_csv(table, result, run_header(config, args.seed));
  auto box = open_out(out_dir / "boxplot.csv");
  write_boxplot_csv(box, result, run_header(config, args.seed));

  std::cout << "experiment " << to_string(name)
            << " (paired=" << result.paired_doors << ")\n";
  for (const auto& arm : result.arms) {
    std::cout << "  " << arm.label << ": success=" << arm.eval.report.success_rate
              << " r_err=" << arm.eval.report.r_err_mean
              << " theta_err=" << arm.eval.report.theta_err_mean
              << " force=" << arm.eval.report.force_mean
              << " torque=" << arm.eval.report.torque_mean << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"door-opening training and evaluation pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "flat key=value config file");
    sub->add_option("--seed", args.seed, "seed for every random stream");
    sub->add_option("--out", args.out_dir, "output directory");
  };

  std::map<std::string, int (*)(const CommonArgs&)> handlers = {
      {"sample-env", cmd_sample_env},     {"train-vae", cmd_train_vae},
      {"train-policy", cmd_train_policy}, {"train-adapt", cmd_train_adapt},
      {"finetune-adapt", cmd_finetune_adapt}, {"eval", cmd_eval},
      {"ablate", cmd_ablate},
  };
  std::map<std::string, CLI::App*> subs;
  subs["sample-env"] = app.add_subcommand("sample-env", "sample door instances");
  subs["train-vae"] = app.add_subcommand("train-vae", "train the parameter encoder");
  subs["train-policy"] = app.add_subcommand("train-policy", "train a policy by PPO");
  subs["train-adapt"] = app.add_subcommand("train-adapt", "train the adaptation module");
  subs["finetune-adapt"] =
      app.add_subcommand("finetune-adapt", "fine-tune the adaptation module");
  subs["eval"] = app.add_subcommand("eval", "evaluate a policy variant");
  subs["ablate"] = app.add_subcommand("ablate", "run a paired ablation experiment");
  for (auto& [name, sub] : subs) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [name, sub] : subs) {
      if (sub->parsed()) return handlers[name](args);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}
