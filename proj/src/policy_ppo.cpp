#include "hinge_rl/policy_ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace hinge_rl {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double wrench_penalty(const Wrench& w, double theta, const RewardWeights& k) {
  const double theta_c = clamp_grasp_angle(theta);
  const double tau_y = w.torque.y();
  const double denom =
      std::abs(tau_y) < kTauYClamp ? std::copysign(kTauYClamp, tau_y) : tau_y;
  const double k5_term = std::abs(w.torque.z() / denom + std::tan(theta_c));
  return k.k2 * std::abs(w.force.y()) + k.k3 * std::abs(w.force.z()) +
         k.k4 * std::abs(w.torque.x()) + k.k5 * k5_term;
}

}  // namespace

double reward(double r, double theta, double r_hat, double theta_hat,
              const Wrench& wrench_gripper, const RewardWeights& weights) {
  const double dr = r - r_hat;
  const double dth = theta - theta_hat;
  return -(weights.k1 * (dr * dr + dth * dth) +
           wrench_penalty(wrench_gripper, theta, weights));
}

double reward_6dof(const Twist& v_g, const Twist& v_ideal, const Wrench& wrench_gripper,
                   double theta, const RewardWeights& weights) {
  const double err = (v_g.vector6() - v_ideal.vector6()).squaredNorm();
  return -(weights.k1 * err + wrench_penalty(wrench_gripper, theta, weights));
}

Eigen::Matrix<double, kStateDim, 1> policy_input_state(
    const Eigen::Matrix<double, kStateDim, 1>& s) {
  Eigen::Matrix<double, kStateDim, 1> out;
  out.segment<3>(0) = 0.1 * s.segment<3>(0);
  out.segment<3>(3) = 0.5 * s.segment<3>(3);
  out.segment<3>(6) = 3.0 * s.segment<3>(6);
  out.segment<3>(9) = 3.0 * s.segment<3>(9);
  return out;
}

Action squash_2dof(const double* raw, const ActionBounds& bounds) {
  Action a;
  a.r_hat = bounds.r_lo + (bounds.r_hi - bounds.r_lo) * sigmoid(raw[0]);
  a.theta_hat = bounds.theta_span * std::tanh(raw[1]);
  return a;
}

void squash_2dof_grad(const double* raw, const ActionBounds& bounds, double* diag) {
  const double s = sigmoid(raw[0]);
  diag[0] = (bounds.r_hi - bounds.r_lo) * s * (1.0 - s);
  const double t = std::tanh(raw[1]);
  diag[1] = bounds.theta_span * (1.0 - t * t);
}

Twist squash_6dof(const double* raw, const ActionBounds& bounds) {
  Twist t;
  t.frame = Frame::Gripper;
  for (int i = 0; i < 3; ++i) t.linear[i] = bounds.linear_span * std::tanh(raw[i]);
  for (int i = 0; i < 3; ++i) t.angular[i] = bounds.angular_span * std::tanh(raw[3 + i]);
  return t;
}

// ---- PolicyNet ----

PolicyNet::PolicyNet(int obs_dim, int act_dim, int hidden)
    : obs_dim_(obs_dim), act_dim_(act_dim),
      trunk_({obs_dim, hidden, hidden}, {Activation::Tanh, Activation::Tanh}),
      actor_(hidden, act_dim), value_head_(hidden, 1, Activation::Identity) {
  actor_.set_sigma_floor(0.01);  // exploration floor keeps ratios bounded
  dtrunk_.assign(hidden, 0.0);
}

void PolicyNet::init(Rng& rng) {
  trunk_.init_orthogonal(rng);
  actor_.init_orthogonal(rng, 1.0);
  value_head_.init_orthogonal(rng, 1.0);
}

void PolicyNet::forward(const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != obs_dim_) {
    throw std::invalid_argument("policy forward: input dimension mismatch");
  }
  const auto& h = trunk_.forward(x);
  actor_.forward(h);
  value_out_ = value_head_.forward(h)[0];
}

const std::vector<double>& PolicyNet::backward(const std::vector<double>& dmu,
                                               const std::vector<double>& dsigma,
                                               double dvalue) {
  const auto& d_actor = actor_.backward(dmu, dsigma);
  const auto& d_value = value_head_.backward({dvalue});
  for (std::size_t i = 0; i < dtrunk_.size(); ++i) dtrunk_[i] = d_actor[i] + d_value[i];
  return trunk_.backward(dtrunk_);
}

std::vector<ParamView> PolicyNet::params() {
  auto p = trunk_.params();
  for (auto& v : actor_.params()) p.push_back(v);
  for (auto& v : value_head_.params()) p.push_back(v);
  return p;
}

std::string PolicyNet::descriptor() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "policy obs=%d act=%d hidden=64", obs_dim_, act_dim_);
  return buf;
}

void PolicyNet::save(const std::string& path) {
  save_checkpoint_file(path, descriptor(), params());
}

void PolicyNet::load(const std::string& path) {
  load_checkpoint_file(path, descriptor(), params());
}

// ---- DoorEpisodeEnv ----

DoorEpisodeEnv::DoorEpisodeEnv(SimConfig sim_config, RewardWeights weights)
    : sim_(sim_config), weights_(weights) {}

void DoorEpisodeEnv::reset_with(const EnvParams& e) {
  env_ = e;
  const Observation obs = sim_.reset(e);
  state_ = obs.s;
  success_ever_ = false;
}

DoorEpisodeEnv::Step DoorEpisodeEnv::finish_step(const StepResult& result,
                                                 double reward_value, double r_hat,
                                                 double theta_hat, double twist_err) {
  state_ = result.obs.s;
  success_ever_ = success_ever_ || sim_.success();
  Step s;
  s.s = result.obs.s;
  s.reward = reward_value;
  s.done = result.done;
  s.r_err = std::abs(result.r_true - r_hat);
  s.theta_err = std::abs(result.theta_true - theta_hat);
  s.force_norm = result.wrench.force.norm();
  s.torque_norm = result.wrench.torque.norm();
  s.twist_err = twist_err;
  return s;
}

DoorEpisodeEnv::Step DoorEpisodeEnv::step_estimate(const Action& action) {
  const Twist cmd =
      twist_from_action(action.r_hat, action.theta_hat, env_.target_speed);
  const StepResult res = sim_.step(cmd);
  const double rew =
      reward(res.r_true, res.theta_true, action.r_hat, action.theta_hat, res.wrench,
             weights_);
  const Twist ideal = twist_from_action(res.r_true, res.theta_true, env_.target_speed);
  const double twist_err = (cmd.vector6() - ideal.vector6()).norm();
  return finish_step(res, rew, action.r_hat, action.theta_hat, twist_err);
}

DoorEpisodeEnv::Step DoorEpisodeEnv::step_estimate_velocity_reward(const Action& action) {
  const Twist cmd =
      twist_from_action(action.r_hat, action.theta_hat, env_.target_speed);
  const StepResult res = sim_.step(cmd);
  const Twist ideal = twist_from_action(res.r_true, res.theta_true, env_.target_speed);
  const double rew = reward_6dof(cmd, ideal, res.wrench, res.theta_true, weights_);
  const double twist_err = (cmd.vector6() - ideal.vector6()).norm();
  return finish_step(res, rew, action.r_hat, action.theta_hat, twist_err);
}

DoorEpisodeEnv::Step DoorEpisodeEnv::step_twist(const Twist& commanded) {
  const StepResult res = sim_.step(commanded);
  const Twist ideal = twist_from_action(res.r_true, res.theta_true, env_.target_speed);
  const double rew = reward_6dof(commanded, ideal, res.wrench, res.theta_true, weights_);
  const double twist_err = (commanded.vector6() - ideal.vector6()).norm();
  return finish_step(res, rew, res.r_true, res.theta_true, twist_err);
}

// ---- PPO ----

std::string to_string(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::SingleDoor: return "single";
    case PolicyMode::DomainRandomized: return "dr";
    case PolicyMode::NoEncoder: return "no-encoder";
    case PolicyMode::SixDof: return "6dof";
    case PolicyMode::VelocityReward: return "velsup";
  }
  return "?";
}

PolicyMode policy_mode_from_string(const std::string& name) {
  if (name == "single") return PolicyMode::SingleDoor;
  if (name == "dr") return PolicyMode::DomainRandomized;
  if (name == "no-encoder") return PolicyMode::NoEncoder;
  if (name == "6dof") return PolicyMode::SixDof;
  if (name == "velsup") return PolicyMode::VelocityReward;
  throw std::invalid_argument("unknown policy mode: " + name);
}

void compute_gae(const std::vector<double>& reward, const std::vector<double>& value,
                 const std::vector<std::uint8_t>& done, double bootstrap_value,
                 double gamma, double lambda, std::vector<double>* advantage,
                 std::vector<double>* returns) {
  const int n = static_cast<int>(reward.size());
  advantage->assign(n, 0.0);
  returns->assign(n, 0.0);
  double gae = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double nonterminal = done[t] ? 0.0 : 1.0;
    const double next_value = (t == n - 1) ? bootstrap_value : value[t + 1];
    // A terminal step has no successor value; a mid-buffer reset restarts
    // the recursion as well.
    const double delta = reward[t] + gamma * next_value * nonterminal - value[t];
    gae = delta + gamma * lambda * nonterminal * gae;
    (*advantage)[t] = gae;
    (*returns)[t] = gae + value[t];
  }
}

namespace {

void clip_grad_norm(const std::vector<ParamView>& params, double max_norm) {
  if (max_norm <= 0.0) return;
  double total = 0.0;
  for (const auto& p : params) {
    for (const double g : *p.grads) total += g * g;
  }
  const double norm = std::sqrt(total);
  if (!std::isfinite(norm)) {
    // Poisoned minibatch: drop it rather than stepping into NaN.
    for (const auto& p : params) {
      std::fill(p.grads->begin(), p.grads->end(), 0.0);
    }
    return;
  }
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (const auto& p : params) {
    for (double& g : *p.grads) g *= scale;
  }
}

}  // namespace

struct PpoTrainer::EnvSlot {
  DoorEpisodeEnv env;
  Rng rng;
  std::vector<double> z;
  std::vector<double> a_prev;
  HistoryWindow window;
  double episode_reward = 0.0;
  int episode_steps = 0;

  EnvSlot(const SimConfig& sim, const RewardWeights& weights, Rng slot_rng,
          int window_len, int act_dim)
      : env(sim, weights), rng(slot_rng), z(kLatentDim, 0.0), a_prev(act_dim, 0.0),
        window(window_len) {}
};

PpoTrainer::~PpoTrainer() = default;

PpoTrainer::PpoTrainer(const PpoConfig& config, EncoderNet* encoder)
    : config_(config), encoder_(encoder), master_rng_(config.seed) {
  const bool six_dof = config_.mode == PolicyMode::SixDof;
  const int act_dim = six_dof ? 6 : 2;
  const int obs_dim = kLatentDim + kStateDim + act_dim;

  if (config_.mode != PolicyMode::NoEncoder && encoder_ == nullptr) {
    throw std::invalid_argument("this policy mode requires a trained encoder");
  }

  policy_ = std::make_unique<PolicyNet>(obs_dim, act_dim);
  Rng init_rng = master_rng_.spawn(1);
  policy_->init(init_rng);
  policy_opt_ = std::make_unique<Adam>(policy_->params(), AdamConfig{.lr = config_.lr});

  if (config_.mode == PolicyMode::NoEncoder) {
    feature_net_ = std::make_unique<AdaptNet>(config_.history_window);
    Rng feat_rng = master_rng_.spawn(2);
    feature_net_->init(feat_rng);
    feature_opt_ =
        std::make_unique<Adam>(feature_net_->params(), AdamConfig{.lr = config_.lr});
  }

  for (int i = 0; i < config_.num_envs; ++i) {
    slots_.push_back(std::make_unique<EnvSlot>(config_.sim, config_.weights,
                                               master_rng_.spawn(1000 + i),
                                               config_.history_window, act_dim));
    begin_episode(*slots_[i]);
  }
}

void PpoTrainer::begin_episode(EnvSlot& slot) {
  const EnvParams e = config_.mode == PolicyMode::SingleDoor ? mean_env()
                                                             : sample_env(slot.rng);
  slot.env.reset_with(e);
  std::fill(slot.a_prev.begin(), slot.a_prev.end(), 0.0);
  slot.window.clear();
  slot.episode_reward = 0.0;
  slot.episode_steps = 0;

  if (encoder_ != nullptr) {
    // One latent draw per episode; e is constant within it.
    const auto en = normalize(e);
    encoder_->encode(std::vector<double>(en.data(), en.data() + kEnvParamCount));
    for (int i = 0; i < kLatentDim; ++i) {
      slot.z[i] = encoder_->mu()[i] + slot.rng.normal() * encoder_->sigma()[i];
    }
  }
}

void PpoTrainer::assemble_input(const EnvSlot& slot, const HistoryWindow& window,
                                std::vector<double>* x) const {
  x->resize(policy_->obs_dim());
  double* out = x->data();
  if (config_.mode == PolicyMode::NoEncoder) {
    feature_net_->forward(window.channel_major());
    const auto& feat = feature_net_->mu_hat();
    std::copy(feat.begin(), feat.end(), out);
  } else {
    std::copy(slot.z.begin(), slot.z.end(), out);
  }
  const auto s = policy_input_state(slot.env.state());
  for (int i = 0; i < kStateDim; ++i) out[kLatentDim + i] = s[i];
  std::copy(slot.a_prev.begin(), slot.a_prev.end(), out + kLatentDim + kStateDim);
}

RolloutBatch PpoTrainer::collect_rollouts() {
  const int act_dim = policy_->act_dim();
  const int obs_dim = policy_->obs_dim();
  const std::size_t total =
      static_cast<std::size_t>(config_.horizon) * config_.num_envs;
  const bool store_windows = config_.mode == PolicyMode::NoEncoder;
  const int window_dim = store_windows ? kWindowFeatureDim * config_.history_window : 0;

  RolloutBatch batch;
  batch.obs_dim = obs_dim;
  batch.act_dim = act_dim;
  batch.window_feature_dim = window_dim;
  batch.obs.resize(total * obs_dim);
  batch.act_raw.resize(total * act_dim);
  batch.logp.resize(total);
  batch.value.resize(total);
  batch.reward.resize(total);
  batch.done.resize(total);
  if (store_windows) batch.windows.resize(total * window_dim);

  diag_reward_ = diag_r_err_ = diag_theta_err_ = 0.0;
  diag_episodes_ = diag_successes_ = 0;

  std::vector<double> x, raw(act_dim);
  std::vector<double> env_reward(config_.horizon), env_value(config_.horizon);
  std::vector<std::uint8_t> env_done(config_.horizon);
  std::vector<double> adv, ret;
  batch.advantage.resize(total);
  batch.returns.resize(total);

  for (int env_idx = 0; env_idx < config_.num_envs; ++env_idx) {
    EnvSlot& slot = *slots_[env_idx];
    const std::size_t base = static_cast<std::size_t>(env_idx) * config_.horizon;
    for (int t = 0; t < config_.horizon; ++t) {
      const std::size_t row = base + t;
      slot.window.push(policy_input_state(slot.env.state()), slot.a_prev[0],
                       slot.a_prev[1]);
      assemble_input(slot, slot.window, &x);
      std::copy(x.begin(), x.end(), batch.obs.begin() + row * obs_dim);
      if (store_windows) {
        const auto& cm = slot.window.channel_major();
        std::copy(cm.begin(), cm.end(), batch.windows.begin() + row * window_dim);
      }

      policy_->forward(x);
      const auto& mean = policy_->action_mean();
      const auto& sigma = policy_->action_sigma();
      for (int i = 0; i < act_dim; ++i) raw[i] = mean[i] + sigma[i] * slot.rng.normal();
      std::copy(raw.begin(), raw.end(), batch.act_raw.begin() + row * act_dim);
      batch.logp[row] = gaussian_log_prob(mean, sigma, raw);
      batch.value[row] = policy_->value() * std::sqrt(ret_var_) + ret_mean_;

      DoorEpisodeEnv::Step step;
      switch (config_.mode) {
        case PolicyMode::SixDof: {
          const Twist cmd = squash_6dof(raw.data(), config_.bounds);
          step = slot.env.step_twist(cmd);
          for (int i = 0; i < 3; ++i) slot.a_prev[i] = cmd.linear[i];
          for (int i = 0; i < 3; ++i) slot.a_prev[3 + i] = cmd.angular[i];
          break;
        }
        case PolicyMode::VelocityReward: {
          const Action a = squash_2dof(raw.data(), config_.bounds);
          step = slot.env.step_estimate_velocity_reward(a);
          slot.a_prev[0] = a.r_hat;
          slot.a_prev[1] = a.theta_hat;
          break;
        }
        default: {
          const Action a = squash_2dof(raw.data(), config_.bounds);
          step = slot.env.step_estimate(a);
          slot.a_prev[0] = a.r_hat;
          slot.a_prev[1] = a.theta_hat;
          break;
        }
      }

      batch.reward[row] = step.reward;
      batch.done[row] = step.done ? 1 : 0;
      slot.episode_reward += step.reward;
      ++slot.episode_steps;
      diag_reward_ += step.reward;
      diag_r_err_ += step.r_err;
      diag_theta_err_ += step.theta_err;

      if (step.done) {
        ++diag_episodes_;
        if (slot.env.success_ever()) ++diag_successes_;
        begin_episode(slot);
      }
    }

    // Bootstrap with the value of the state the slice stopped in; a scratch
    // window copy keeps the live one untouched.
    HistoryWindow peek = slot.window;
    peek.push(policy_input_state(slot.env.state()), slot.a_prev[0], slot.a_prev[1]);
    assemble_input(slot, peek, &x);
    policy_->forward(x);
    const double bootstrap = policy_->value() * std::sqrt(ret_var_) + ret_mean_;

    std::copy(batch.reward.begin() + base, batch.reward.begin() + base + config_.horizon,
              env_reward.begin());
    std::copy(batch.value.begin() + base, batch.value.begin() + base + config_.horizon,
              env_value.begin());
    std::copy(batch.done.begin() + base, batch.done.begin() + base + config_.horizon,
              env_done.begin());
    compute_gae(env_reward, env_value, env_done, bootstrap, config_.gamma,
                config_.gae_lambda, &adv, &ret);
    std::copy(adv.begin(), adv.end(), batch.advantage.begin() + base);
    std::copy(ret.begin(), ret.end(), batch.returns.begin() + base);
  }

  steps_done_ += static_cast<std::int64_t>(total);
  return batch;
}

PpoUpdateStats PpoTrainer::update_policy(RolloutBatch& batch) {
  const std::size_t n = batch.size();
  const int act_dim = batch.act_dim;
  const int obs_dim = batch.obs_dim;

  // Fold this batch's returns into the running statistics, then train the
  // value head against normalized targets.
  {
    double bmean = 0.0;
    for (const double r : batch.returns) bmean += r;
    bmean /= static_cast<double>(n);
    double bvar = 0.0;
    for (const double r : batch.returns) bvar += (r - bmean) * (r - bmean);
    bvar /= static_cast<double>(n);
    const double total = ret_count_ + static_cast<double>(n);
    const double delta = bmean - ret_mean_;
    const double m2 = ret_var_ * ret_count_ + bvar * n +
                      delta * delta * ret_count_ * n / total;
    ret_mean_ += delta * n / total;
    ret_var_ = std::max(m2 / total, 1e-8);
    ret_count_ = total;
  }
  const double ret_std = std::sqrt(ret_var_);

  // Batch-wide advantage normalization; a degenerate batch divides by eps.
  double mean = 0.0;
  for (const double a : batch.advantage) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const double a : batch.advantage) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : batch.advantage) a = (a - mean) * inv_std;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  double kl_sum = 0.0, clip_sum = 0.0, vloss_sum = 0.0, sigma_sum = 0.0;
  std::int64_t sample_count = 0;
  double epoch_kl_sum = 0.0;
  std::int64_t epoch_samples = 0;

  std::vector<double> x(obs_dim), raw(act_dim), dmu(act_dim), dsigma(act_dim);
  std::vector<double> window_buf;

  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    epoch_kl_sum = 0.0;
    epoch_samples = 0;
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = master_rng_.uniform_index(i + 1);
      std::swap(order[i], order[j]);
    }
    for (std::size_t start = 0; start < n; start += config_.minibatch) {
      const std::size_t count = std::min<std::size_t>(config_.minibatch, n - start);
      policy_opt_->zero_grad();
      if (feature_opt_) feature_opt_->zero_grad();
      const double inv = 1.0 / static_cast<double>(count);

      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t row = order[start + k];
        std::copy(batch.obs.begin() + row * obs_dim,
                  batch.obs.begin() + (row + 1) * obs_dim, x.begin());
        if (feature_net_) {
          window_buf.assign(
              batch.windows.begin() + row * batch.window_feature_dim,
              batch.windows.begin() + (row + 1) * batch.window_feature_dim);
          feature_net_->forward(window_buf);
          const auto& feat = feature_net_->mu_hat();
          std::copy(feat.begin(), feat.end(), x.begin());
        }
        std::copy(batch.act_raw.begin() + row * act_dim,
                  batch.act_raw.begin() + (row + 1) * act_dim, raw.begin());

        policy_->forward(x);
        const auto& mu = policy_->action_mean();
        const auto& sigma = policy_->action_sigma();
        const double logp_new = gaussian_log_prob(mu, sigma, raw);
        // Clamped so a shrunken sigma cannot overflow exp() mid-epoch; the
        // gradient clip bounds the step either way.
        const double logratio =
            std::clamp(logp_new - batch.logp[row], -30.0, 30.0);
        const double ratio = std::exp(logratio);
        const double adv = batch.advantage[row];

        const double pg1 = -adv * ratio;
        const double clipped =
            std::clamp(ratio, 1.0 - config_.clip_ratio, 1.0 + config_.clip_ratio);
        const double pg2 = -adv * clipped;
        const bool unclipped_active = pg1 >= pg2;
        const double dlogp = unclipped_active ? -adv * ratio : 0.0;

        const double verr = policy_->value() - (batch.returns[row] - ret_mean_) / ret_std;
        vloss_sum += verr * verr;
        const double sample_kl = (ratio - 1.0) - logratio;
        kl_sum += sample_kl;
        epoch_kl_sum += sample_kl;
        ++epoch_samples;
        clip_sum += std::abs(ratio - 1.0) > config_.clip_ratio ? 1.0 : 0.0;
        for (int d = 0; d < act_dim; ++d) sigma_sum += sigma[d];
        ++sample_count;

        std::fill(dmu.begin(), dmu.end(), 0.0);
        std::fill(dsigma.begin(), dsigma.end(), 0.0);
        gaussian_log_prob_grad(mu, sigma, raw, dlogp * inv, &dmu, &dsigma);
        if (config_.entropy_coef != 0.0) {
          gaussian_entropy_grad(sigma, -config_.entropy_coef * inv, &dsigma);
        }
        const double dvalue = 2.0 * config_.value_coef * verr * inv;

        const auto& dx = policy_->backward(dmu, dsigma, dvalue);
        if (feature_net_) {
          static const std::vector<double> zero8(kLatentDim, 0.0);
          std::vector<double> dfeat(dx.begin(), dx.begin() + kLatentDim);
          feature_net_->backward(dfeat, zero8);
        }
      }
      clip_grad_norm(policy_->params(), config_.max_grad_norm);
      if (feature_net_) clip_grad_norm(feature_net_->params(), config_.max_grad_norm);
      policy_opt_->step();
      if (feature_opt_) feature_opt_->step();
    }
    if (config_.kl_stop > 0.0 && epoch_samples > 0 &&
        epoch_kl_sum / static_cast<double>(epoch_samples) > config_.kl_stop) {
      break;
    }
  }

  for (const auto& p : policy_->params()) {
    for (const double v : *p.values) {
      if (!std::isfinite(v)) {
        throw std::runtime_error("ppo update produced non-finite policy parameters");
      }
    }
  }

  PpoUpdateStats stats;
  stats.update = ++update_index_;
  stats.env_steps = steps_done_;
  const double steps = static_cast<double>(n);
  stats.mean_reward = diag_reward_ / steps;
  stats.mean_r_err = diag_r_err_ / steps;
  stats.mean_theta_err = diag_theta_err_ / steps;
  stats.approx_kl = kl_sum / static_cast<double>(sample_count);
  stats.clip_fraction = clip_sum / static_cast<double>(sample_count);
  stats.value_loss = vloss_sum / static_cast<double>(sample_count);
  stats.mean_sigma = sigma_sum / static_cast<double>(sample_count * act_dim);
  stats.episode_success_rate =
      diag_episodes_ > 0 ? static_cast<double>(diag_successes_) / diag_episodes_ : 0.0;
  return stats;
}

PpoUpdateStats PpoTrainer::train_one_update() {
  RolloutBatch batch = collect_rollouts();
  return update_policy(batch);
}

std::vector<PpoUpdateStats> PpoTrainer::train() {
  std::vector<PpoUpdateStats> rows;
  while (steps_done_ < config_.total_steps) {
    rows.push_back(train_one_update());
  }
  return rows;
}

void write_curve_csv(std::ostream& out, const std::vector<PpoUpdateStats>& rows,
                     const std::string& header_comment) {
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "update,env_steps,mean_reward,mean_r_err,mean_theta_err,approx_kl,"
         "clip_fraction,value_loss,mean_sigma,episode_success_rate\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%lld,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  r.update, static_cast<long long>(r.env_steps), r.mean_reward,
                  r.mean_r_err, r.mean_theta_err, r.approx_kl, r.clip_fraction,
                  r.value_loss, r.mean_sigma, r.episode_success_rate);
    out << buf;
  }
}

}  // namespace hinge_rl
