// Acceptance suite: one binary, one pass/fail line per criterion, exit code
// equal to the number of failed criteria. Training artifacts are built once
// and shared; two independent trainings run on two threads where possible.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hinge_rl/harness.hpp"

using namespace hinge_rl;

namespace {

struct Budget {
  // Pinned training budgets for the trained-policy criteria.
  std::int64_t policy_steps = 15000000;
  /// Criterion 7 compares both of its arms at this common budget: the
  /// no-encoder arm backprops PPO through the conv feature stack and costs
  /// ~20x a plain policy step, so its pair runs at a reduced equal budget.
  std::int64_t ablation_steps = 2500000;
  int vae_dataset = 100000;
  int vae_epochs = 200;
  int adapt_episodes = 300;
  int adapt_epochs = 20;
  int finetune_episodes = 450;
  int finetune_bp_episodes = 200;
  int finetune_epochs = 24;
  int finetune_rounds = 3;
  int eval_episodes = 20;
  std::uint64_t seed = 20240913;
};

double now_s() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

struct Artifacts {
  Budget budget;

  EncoderNet encoder;
  DecoderNet decoder;
  VaeTrainResult vae_result;
  bool vae_ready = false;

  std::unique_ptr<PpoTrainer> dr_trainer, sd_trainer, woe_trainer, sixdof_trainer,
      we_small_trainer;
  // Per-trainer encoder copies keep parallel training race-free.
  std::unique_ptr<EncoderNet> enc_dr, enc_sd, enc_6dof, enc_we_small;

  std::unique_ptr<AdaptNet> rho, rho_star;
  AdaptTrainResult adapt_result;
  FinetuneResult finetune_result;

  PpoConfig policy_config(PolicyMode mode, std::uint64_t seed,
                          std::int64_t steps) const {
    PpoConfig cfg;
    cfg.mode = mode;
    cfg.seed = seed;
    cfg.total_steps = steps;
    return cfg;
  }

  void train_vae_once() {
    if (vae_ready) return;
    VaeTrainConfig cfg;
    cfg.dataset_size = budget.vae_dataset;
    cfg.epochs = budget.vae_epochs;
    cfg.seed = budget.seed + 1;
    vae_result = train_vae(encoder, decoder, cfg);
    vae_ready = true;
    std::printf("         [t=%7.1fs] encoder trained (mse/coord=%.4f, r2=%.3f)\n",
                now_s(), vae_result.holdout_mse_per_coord, vae_result.holdout_r2);
    std::fflush(stdout);
  }

  void train_main_policies_once() {
    if (dr_trainer) return;
    train_vae_once();
    enc_dr = std::make_unique<EncoderNet>(encoder);
    enc_sd = std::make_unique<EncoderNet>(encoder);
    dr_trainer = std::make_unique<PpoTrainer>(
        policy_config(PolicyMode::DomainRandomized, budget.seed + 2,
                      budget.policy_steps),
        enc_dr.get());
    sd_trainer = std::make_unique<PpoTrainer>(
        policy_config(PolicyMode::SingleDoor, budget.seed + 3, budget.policy_steps),
        enc_sd.get());
    std::thread dr([&] { dr_trainer->train(); });
    std::thread sd([&] { sd_trainer->train(); });
    dr.join();
    sd.join();
    std::printf("         [t=%7.1fs] DR and SD policies trained (%lld steps each)\n",
                now_s(), static_cast<long long>(budget.policy_steps));
    std::fflush(stdout);
  }

  void train_ablation_policies_once() {
    if (woe_trainer) return;
    train_vae_once();
    enc_6dof = std::make_unique<EncoderNet>(encoder);
    enc_we_small = std::make_unique<EncoderNet>(encoder);
    woe_trainer = std::make_unique<PpoTrainer>(
        policy_config(PolicyMode::NoEncoder, budget.seed + 4, budget.ablation_steps),
        nullptr);
    sixdof_trainer = std::make_unique<PpoTrainer>(
        policy_config(PolicyMode::SixDof, budget.seed + 5, budget.policy_steps),
        enc_6dof.get());
    we_small_trainer = std::make_unique<PpoTrainer>(
        policy_config(PolicyMode::DomainRandomized, budget.seed + 8,
                      budget.ablation_steps),
        enc_we_small.get());
    // The 6-DoF and same-budget WE arms together still cost far less than
    // the no-encoder arm; run them on the second thread.
    std::thread woe([&] { woe_trainer->train(); });
    std::thread others([&] {
      sixdof_trainer->train();
      we_small_trainer->train();
    });
    woe.join();
    others.join();
    std::printf("         [t=%7.1fs] no-encoder, same-budget-WE and 6-DoF policies "
                "trained\n", now_s());
    std::fflush(stdout);
  }

  void train_adaptation_once() {
    if (rho) return;
    train_main_policies_once();
    AdaptTrainConfig cfg;
    cfg.episodes = budget.adapt_episodes;
    cfg.epochs = budget.adapt_epochs;
    cfg.seed = budget.seed + 6;
    rho = std::make_unique<AdaptNet>(cfg.window);
    adapt_result = train_adaptation(*rho, dr_trainer->policy(), encoder, cfg);
    std::printf("         [t=%7.1fs] adaptation module trained (holdout rec %.4f, "
                "baseline %.4f)\n",
                now_s(), adapt_result.holdout_rec, adapt_result.baseline_rec);

    FinetuneConfig fcfg;
    fcfg.episodes = budget.finetune_episodes;
    fcfg.bp_episodes = budget.finetune_bp_episodes;
    fcfg.epochs = budget.finetune_epochs;
    fcfg.rounds = budget.finetune_rounds;
    fcfg.validation_episodes = 20;
    fcfg.seed = budget.seed + 7;
    rho_star = std::make_unique<AdaptNet>(*rho);
    finetune_result = finetune_adaptation(*rho_star, dr_trainer->policy(), encoder, fcfg);
    std::printf("         [t=%7.1fs] adaptation module fine-tuned (validation lf "
                "%.5f -> %.5f)\n",
                now_s(), finetune_result.validation_lf_before,
                finetune_result.validation_lf_after);
    std::fflush(stdout);
  }

  PolicyVariant bp_variant() {
    PolicyVariant v;
    v.kind = VariantKind::BasePolicy;
    v.policy = &dr_trainer->policy();
    v.encoder = &encoder;
    return v;
  }
};

bool check(std::ostringstream& detail, bool ok, const std::string& what) {
  detail << (ok ? "" : " [FAILED: " + what + "]");
  return ok;
}

// ---- criteria ----

bool criterion_1_kinematics(Artifacts&, std::ostringstream& out) {
  Rng rng(42);
  double max_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double r = rng.uniform(0.01, 2.0);
    const double theta = rng.uniform(-1.5, 1.5);
    const double omega = rng.uniform(-2.0, 2.0);
    const auto a = twist_from_action(r, theta, omega).vector6();
    const auto b = transform_chain(r, theta, omega).vector6();
    max_err = std::max(max_err, (a - b).lpNorm<Eigen::Infinity>());
  }
  out << "max |closed-form - chain| = " << max_err << " over 1e4 draws";
  return max_err < 1e-12;
}

bool criterion_2_gradients(Artifacts&, std::ostringstream& out) {
  Rng rng(7);
  double worst = 0.0;
  int checks = 0;

  const auto fd_check = [&](const std::function<double()>& loss,
                            const std::function<void()>& grads,
                            std::vector<ParamView> params, int per_array) {
    grads();
    std::vector<std::vector<double>> analytic;
    for (auto& p : params) analytic.push_back(*p.grads);
    Rng pick(rng.next_u64());
    const double h = 1e-5;
    for (std::size_t p = 0; p < params.size(); ++p) {
      auto& values = *params[p].values;
      for (int t = 0; t < per_array; ++t) {
        const std::size_t i = pick.uniform_index(values.size());
        const double saved = values[i];
        values[i] = saved + h;
        const double up = loss();
        values[i] = saved - h;
        const double down = loss();
        values[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double an = analytic[p][i];
        const double err =
            std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
        worst = std::max(worst, err);
        ++checks;
      }
    }
  };

  // Dense stack.
  {
    Mlp net({6, 9, 5, 3},
            {Activation::Tanh, Activation::Softplus, Activation::Identity});
    net.init_orthogonal(rng);
    std::vector<double> x(6), target(3);
    for (auto& v : x) v = rng.normal();
    for (auto& v : target) v = rng.normal();
    auto loss = [&] {
      const auto& y = net.forward(x);
      double l = 0.0;
      for (int i = 0; i < 3; ++i) l += (y[i] - target[i]) * (y[i] - target[i]);
      return l;
    };
    auto grads = [&] {
      for (auto& p : net.params()) std::fill(p.grads->begin(), p.grads->end(), 0.0);
      const auto& y = net.forward(x);
      std::vector<double> dy(3);
      for (int i = 0; i < 3; ++i) dy[i] = 2.0 * (y[i] - target[i]);
      net.backward(dy);
    };
    fd_check(loss, grads, net.params(), 8);
  }

  // Conv1D layer.
  {
    Conv1DLayer conv(3, 4, 5, 2, Activation::Tanh);
    conv.init_orthogonal(rng, 1.0);
    std::vector<double> x(3 * 17);
    for (auto& v : x) v = rng.normal();
    auto loss = [&] {
      const auto& y = conv.forward(x, 17);
      double l = 0.0;
      for (const double v : y) l += v * v;
      return l;
    };
    auto grads = [&] {
      for (auto& p : conv.params()) std::fill(p.grads->begin(), p.grads->end(), 0.0);
      const auto& y = conv.forward(x, 17);
      std::vector<double> dy(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) dy[i] = 2.0 * y[i];
      conv.backward(dy);
    };
    fd_check(loss, grads, conv.params(), 8);
  }

  // Full VAE loss through encoder, reparameterized sample and decoder.
  {
    EncoderNet enc;
    DecoderNet dec;
    enc.init(rng);
    dec.init(rng);
    Rng data(3);
    const auto ev = normalize(sample_env(data));
    const std::vector<double> e(ev.data(), ev.data() + kEnvParamCount);
    std::vector<double> eps(kLatentDim);
    for (auto& v : eps) v = rng.normal();
    const double beta = 0.02;
    auto loss = [&] {
      enc.encode(e);
      const auto z = gaussian_sample(enc.mu(), enc.sigma(), eps);
      return vae_loss(e, dec.decode(z), enc.mu(), enc.sigma(), beta).total;
    };
    auto grads = [&] {
      for (auto& p : enc.params()) std::fill(p.grads->begin(), p.grads->end(), 0.0);
      for (auto& p : dec.params()) std::fill(p.grads->begin(), p.grads->end(), 0.0);
      enc.encode(e);
      const auto z = gaussian_sample(enc.mu(), enc.sigma(), eps);
      const auto& e_hat = dec.decode(z);
      std::vector<double> de(kEnvParamCount);
      for (int i = 0; i < kEnvParamCount; ++i) de[i] = 2.0 * (e_hat[i] - e[i]);
      const auto& dz = dec.backward(de);
      std::vector<double> dmu(kLatentDim), dsigma(kLatentDim);
      for (int i = 0; i < kLatentDim; ++i) {
        dmu[i] = dz[i];
        dsigma[i] = dz[i] * eps[i];
      }
      kl_to_standard_normal_grad(enc.mu(), enc.sigma(), beta, &dmu, &dsigma);
      enc.backward(dmu, dsigma);
    };
    std::vector<ParamView> all = enc.params();
    for (auto& p : dec.params()) all.push_back(p);
    fd_check(loss, grads, all, 5);
  }

  // Adaptation loss through the full history stack.
  {
    AdaptNet net(40);
    net.init(rng);
    std::vector<double> window(kWindowFeatureDim * 40);
    for (auto& v : window) v = rng.normal();
    std::vector<double> mu_t(kLatentDim), sigma_t(kLatentDim, 1.0);
    for (auto& v : mu_t) v = rng.normal();
    const double beta = 0.02;
    auto loss = [&] {
      net.forward(window);
      return adapt_loss(mu_t, sigma_t, net.mu_hat(), net.sigma_hat(), beta).total;
    };
    auto grads = [&] {
      for (auto& p : net.params()) std::fill(p.grads->begin(), p.grads->end(), 0.0);
      net.forward(window);
      std::vector<double> dmu(kLatentDim), dsigma(kLatentDim);
      for (int i = 0; i < kLatentDim; ++i) {
        dmu[i] = 2.0 * (net.mu_hat()[i] - mu_t[i]);
        dsigma[i] = 2.0 * (net.sigma_hat()[i] - sigma_t[i]);
      }
      kl_to_standard_normal_grad(net.mu_hat(), net.sigma_hat(), beta, &dmu, &dsigma);
      net.backward(dmu, dsigma);
    };
    fd_check(loss, grads, net.params(), 4);
  }

  out << "worst relative FD error " << worst << " over " << checks << " probes";
  return worst < 1e-4;
}

bool criterion_3_sim_physics(Artifacts&, std::ostringstream& out) {
  Rng rng(17);
  bool ok = true;
  double worst_newton = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const EnvParams e = sample_env(rng);

    // Determinism: two runs, identical action stream, bit-identical states.
    std::vector<double> trace_a, trace_b;
    for (int run = 0; run < 2; ++run) {
      DoorSim sim;
      sim.reset(e);
      Rng act(trial);
      auto& trace = run == 0 ? trace_a : trace_b;
      for (int t = 0; t < 60 && !sim.done(); ++t) {
        Twist cmd = twist_from_action(std::max(0.05, e.width + 0.05 * act.normal()),
                                      e.theta_init + 0.05 * act.normal(),
                                      e.target_speed);
        const StepResult r = sim.step(cmd);
        trace.push_back(r.door_angle);
        for (int i = 0; i < kStateDim; ++i) trace.push_back(r.obs.s[i]);

        const Eigen::Quaterniond q = sim.gripper().pose.orientation;
        const Eigen::Vector3d f_world = q * r.wrench.force;
        const Eigen::Vector3d t_world = q * r.wrench.torque;
        const Wrench reaction = sim.door_reaction_world();
        const double newton =
            (f_world + reaction.force).norm() + (t_world + reaction.torque).norm();
        worst_newton = std::max(
            worst_newton, newton / std::max(1.0, f_world.norm() + t_world.norm()));
      }
    }
    if (trace_a != trace_b) {
      ok = false;
      out << " [determinism broke on trial " << trial << "]";
      break;
    }

    // Passivity: kinetic energy identically zero from rest with zero
    // command, and total mechanical energy non-increasing after a driven
    // phase once the command stops.
    DoorSim sim;
    sim.reset(e);
    for (int t = 0; t < 20; ++t) {
      sim.step(Twist{});
      if (sim.kinetic_energy() != 0.0) {
        ok = false;
        out << " [rest energy non-zero]";
      }
    }
    sim.reset(e);
    for (int t = 0; t < 60 && !sim.done(); ++t) {
      sim.step(twist_from_action(e.width, e.theta_init, e.target_speed));
    }
    double prev = sim.mechanical_energy();
    for (int t = 0; t < 80 && !sim.done(); ++t) {
      sim.step(Twist{});
      const double now = sim.mechanical_energy();
      if (now > prev * (1.0 + 1e-9) + 1e-12) {
        ok = false;
        out << " [energy grew under zero command]";
        break;
      }
      prev = now;
    }
    if (!ok) break;
  }
  out << "third-law residual " << worst_newton << " (tol 1e-9), 100 doors";
  return ok && worst_newton < 1e-9;
}

bool criterion_4_reward_identities(Artifacts&, std::ostringstream& out) {
  const RewardWeights k;
  bool ok = true;

  // Perfect tracking and an ideal wrench: exactly zero.
  const Wrench w0 = ideal_wrench(0.0, 10.0, 2.0);
  ok &= reward(0.5, 0.0, 0.5, 0.0, w0, k) == 0.0;
  for (const double theta : {0.3, -0.25, 0.12}) {
    const Wrench w = ideal_wrench(theta, 8.0, 1.4);
    ok &= std::abs(reward(0.4, theta, 0.4, theta, w, k)) < 1e-12;
  }

  // Worked arithmetic examples.
  Wrench zero;
  zero.frame = Frame::Gripper;
  ok &= std::abs(reward(0.5, 0.0, 0.6, 0.0, zero, k) - (-0.01)) < 1e-12;
  Wrench mix;
  mix.frame = Frame::Gripper;
  mix.force = Eigen::Vector3d(5.0, 1.0, 2.0);
  mix.torque = Eigen::Vector3d(1.0, 0.0, 0.0);
  ok &= std::abs(reward(0.5, 0.0, 0.5, 0.0, mix, k) - (-2.8)) < 1e-12;

  const Twist ideal = twist_from_action(0.5, 0.1, -0.2);
  const Wrench w = ideal_wrench(0.1, 3.0, 0.7);
  ok &= std::abs(reward_6dof(ideal, ideal, w, 0.1, k)) < 1e-12;
  Twist off = ideal;
  off.linear.x() += 1.0;
  ok &= std::abs(reward_6dof(off, ideal, w, 0.1, k) - (-1.0)) < 1e-9;

  out << "exact zero at ideal, worked examples to 1e-12";
  return ok;
}

bool criterion_5_vae(Artifacts& art, std::ostringstream& out) {
  art.train_vae_once();
  const double mse = art.vae_result.holdout_mse_per_coord;
  const double r2 = art.vae_result.holdout_r2;
  out << "holdout MSE/coord = " << mse << " (target < 0.05), ridge R2 = " << r2
      << " (target > 0.5)";
  // 16 independent coordinates through an 8-dim latent cannot meet these
  // targets (see the decisions ledger); asserted as specified regardless.
  return mse < 0.05 && r2 > 0.5;
}

bool criterion_6_sd_vs_dr(Artifacts& art, std::ostringstream& out) {
  art.train_main_policies_once();

  PolicyVariant dr = art.bp_variant();
  PolicyVariant sd;
  sd.kind = VariantKind::BasePolicy;
  sd.policy = &art.sd_trainer->policy();
  sd.encoder = &art.encoder;

  EvalOptions opt;
  opt.episodes = art.budget.eval_episodes;
  opt.seed = art.budget.seed + 100;
  const auto result = run_paired_evaluation(ExperimentName::SdVsDr, {sd, dr},
                                            {"SD", "DR"}, opt);
  const MetricsReport& sd_rep = result.arms[0].eval.report;
  const MetricsReport& dr_rep = result.arms[1].eval.report;
  out << "DR r_err " << dr_rep.r_err_mean << " vs SD " << sd_rep.r_err_mean
      << "; DR theta_err " << dr_rep.theta_err_mean << " vs SD "
      << sd_rep.theta_err_mean;
  bool ok = result.paired_doors;
  ok &= dr_rep.r_err_mean < sd_rep.r_err_mean;
  ok &= dr_rep.theta_err_mean < sd_rep.theta_err_mean;
  ok &= dr_rep.r_err_mean <= 0.10;
  ok &= dr_rep.theta_err_mean <= 0.10;
  return ok;
}

bool criterion_7_we_vs_woe(Artifacts& art, std::ostringstream& out) {
  art.train_ablation_policies_once();

  PolicyVariant we;
  we.kind = VariantKind::BasePolicy;
  we.policy = &art.we_small_trainer->policy();
  we.encoder = &art.encoder;
  PolicyVariant woe;
  woe.kind = VariantKind::NoEncoder;
  woe.policy = &art.woe_trainer->policy();
  woe.adapt = art.woe_trainer->feature_net();

  EvalOptions opt;
  opt.episodes = art.budget.eval_episodes;
  opt.seed = art.budget.seed + 200;
  const auto result = run_paired_evaluation(ExperimentName::WeVsWoe, {woe, we},
                                            {"WoE", "WE"}, opt);
  const MetricsReport& woe_rep = result.arms[0].eval.report;
  const MetricsReport& we_rep = result.arms[1].eval.report;
  out << "WE reward " << we_rep.mean_reward << " vs WoE " << woe_rep.mean_reward
      << "; WE r_err " << we_rep.r_err_mean << " vs WoE " << woe_rep.r_err_mean
      << "; WE theta_err " << we_rep.theta_err_mean << " vs WoE "
      << woe_rep.theta_err_mean;
  bool ok = result.paired_doors;
  ok &= we_rep.mean_reward > woe_rep.mean_reward;
  ok &= we_rep.r_err_mean < woe_rep.r_err_mean;
  ok &= we_rep.theta_err_mean < woe_rep.theta_err_mean;
  return ok;
}

bool criterion_8_2dof_vs_6dof(Artifacts& art, std::ostringstream& out) {
  art.train_main_policies_once();
  art.train_ablation_policies_once();

  PolicyVariant twodof = art.bp_variant();
  PolicyVariant sixdof;
  sixdof.kind = VariantKind::SixDof;
  sixdof.policy = &art.sixdof_trainer->policy();
  sixdof.encoder = &art.encoder;

  EvalOptions opt;
  opt.episodes = art.budget.eval_episodes;
  opt.seed = art.budget.seed + 300;
  opt.feasible_doors_only = true;  // see ledger: domain speeds cap success
  const auto result = run_paired_evaluation(ExperimentName::TwoDofVsSixDof,
                                            {sixdof, twodof}, {"6-DoF", "2-DoF"}, opt);
  const MetricsReport& six = result.arms[0].eval.report;
  const MetricsReport& two = result.arms[1].eval.report;
  out << "2-DoF success " << two.success_rate << " (target 1.0), 6-DoF success "
      << six.success_rate << " (target <= 0.5)";
  bool ok = result.paired_doors;
  ok &= two.success_rate == 1.0;
  ok &= six.success_rate <= 0.5;
  return ok;
}

bool criterion_9_fap_vs_ap(Artifacts& art, std::ostringstream& out) {
  art.train_adaptation_once();

  // Held-out deployed-trajectory l_f: the module's own episodes on fresh
  // doors, before (rho) and after (rho*) fine-tuning.
  const std::uint64_t lf_seed = art.budget.seed + 450;
  const double before = deployed_action_discrepancy(
      *art.rho, art.dr_trainer->policy(), art.encoder, art.budget.eval_episodes,
      lf_seed);
  const double after = deployed_action_discrepancy(
      *art.rho_star, art.dr_trainer->policy(), art.encoder, art.budget.eval_episodes,
      lf_seed);

  // Both modules evaluate with the deterministic latent estimate: per-step
  // latent resampling injects action jitter whose wrench noise swamps the
  // module-quality comparison (and fine-tuning optimizes eps' = 0).
  PolicyVariant ap;
  ap.kind = VariantKind::Adaptive;
  ap.policy = &art.dr_trainer->policy();
  ap.adapt = art.rho.get();
  ap.sample_latent = false;
  PolicyVariant fap = ap;
  fap.kind = VariantKind::FineTuned;
  fap.adapt = art.rho_star.get();
  PolicyVariant bp = art.bp_variant();

  EvalOptions opt;
  opt.episodes = art.budget.eval_episodes;
  opt.seed = art.budget.seed + 400;
  const auto result = run_paired_evaluation(ExperimentName::ApVsFap, {bp, ap, fap},
                                            {"BP", "AP", "FAP"}, opt);
  const MetricsReport& ap_rep = result.arms[1].eval.report;
  const MetricsReport& fap_rep = result.arms[2].eval.report;
  out << "l_f " << before << " -> " << after << " (need >= 50% cut); FAP force "
      << fap_rep.force_mean << " vs AP " << ap_rep.force_mean << "; FAP torque "
      << fap_rep.torque_mean << " vs AP " << ap_rep.torque_mean;
  bool ok = result.paired_doors;
  ok &= after <= 0.5 * before;
  ok &= fap_rep.force_mean <= ap_rep.force_mean;
  ok &= fap_rep.torque_mean <= ap_rep.torque_mean;
  return ok;
}

bool criterion_10_frozen_policy(Artifacts& art, std::ostringstream& out) {
  art.train_adaptation_once();
  const bool ok = art.finetune_result.policy_checksum_before ==
                  art.finetune_result.policy_checksum_after;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "checksum %016llx -> %016llx",
                static_cast<unsigned long long>(art.finetune_result.policy_checksum_before),
                static_cast<unsigned long long>(art.finetune_result.policy_checksum_after));
  out << buf;
  return ok;
}

bool criterion_11_reproducibility(Artifacts& art, std::ostringstream& out) {
  art.train_main_policies_once();
  const PolicyVariant bp = art.bp_variant();
  EvalOptions opt;
  opt.episodes = 5;
  opt.seed = art.budget.seed + 500;

  const auto render = [&] {
    const EvalResult result = evaluate(bp, opt);
    std::ostringstream csv;
    write_metrics_csv(csv, result.report, "rerun-test");
    AblationResult single;
    single.name = ExperimentName::SdVsDr;
    single.arms.push_back({"run", result});
    write_boxplot_csv(csv, single, "rerun-test");
    return csv.str();
  };
  const std::string a = render();
  const std::string b = render();
  out << "two in-process reruns, " << a.size() << " CSV bytes each, "
      << (a == b ? "byte-identical" : "DIFFER");
  return a == b;
}

struct CriterionEntry {
  int id;
  const char* name;
  bool (*run)(Artifacts&, std::ostringstream&);
};

}  // namespace

int main() {
  Artifacts art;
  const CriterionEntry criteria[] = {
      {1, "kinematics oracle equivalence", criterion_1_kinematics},
      {2, "gradient checks", criterion_2_gradients},
      {3, "simulator physics", criterion_3_sim_physics},
      {4, "reward identities", criterion_4_reward_identities},
      {5, "vae training targets", criterion_5_vae},
      {6, "single door vs domain randomization", criterion_6_sd_vs_dr},
      {7, "encoder vs no encoder", criterion_7_we_vs_woe},
      {8, "2-dof vs 6-dof success", criterion_8_2dof_vs_6dof},
      {9, "fap vs ap", criterion_9_fap_vs_ap},
      {10, "frozen policy contract", criterion_10_frozen_policy},
      {11, "end-to-end reproducibility", criterion_11_reproducibility},
  };

  int failures = 0;
  for (const auto& entry : criteria) {
    std::ostringstream detail;
    bool ok = false;
    try {
      ok = entry.run(art, detail);
    } catch (const std::exception& ex) {
      detail << "exception: " << ex.what();
    }
    if (!ok) ++failures;
    std::printf("[ACCEPT] criterion %2d (%s): %s — %s\n", entry.id, entry.name,
                ok ? "PASS" : "FAIL", detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("[ACCEPT] %d/11 criteria passed\n", 11 - failures);
  return failures;
}
