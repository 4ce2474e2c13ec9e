#include "hinge_rl/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "hinge_rl/policy_ppo.hpp"

namespace hinge_rl {

// ---- HistoryWindow ----

HistoryWindow::HistoryWindow(int length) : length_(length) {
  if (length <= 0) throw std::invalid_argument("window length must be positive");
  rows_.assign(static_cast<std::size_t>(length_) * kWindowFeatureDim, 0.0);
  cm_.assign(rows_.size(), 0.0);
}

void HistoryWindow::clear() {
  fill_ = 0;
  std::fill(rows_.begin(), rows_.end(), 0.0);
}

void HistoryWindow::push(const Eigen::Matrix<double, kStateDim, 1>& s, double a_prev_0,
                         double a_prev_1) {
  // Shift up: oldest row falls off the front, newest goes last.
  std::memmove(rows_.data(), rows_.data() + kWindowFeatureDim,
               sizeof(double) * kWindowFeatureDim * (length_ - 1));
  double* row = rows_.data() + static_cast<std::size_t>(length_ - 1) * kWindowFeatureDim;
  for (int i = 0; i < kStateDim; ++i) row[i] = s[i];
  row[kStateDim] = a_prev_0;
  row[kStateDim + 1] = a_prev_1;
  fill_ = std::min(fill_ + 1, length_);
}

const std::vector<double>& HistoryWindow::channel_major() const {
  for (int f = 0; f < kWindowFeatureDim; ++f) {
    for (int t = 0; t < length_; ++t) {
      cm_[static_cast<std::size_t>(f) * length_ + t] =
          rows_[static_cast<std::size_t>(t) * kWindowFeatureDim + f];
    }
  }
  return cm_;
}

// ---- AdaptNet ----

namespace {
constexpr int kAdaptWidth = 32;
}

AdaptNet::AdaptNet(int window_length)
    : window_(window_length),
      step_mlp1_(kWindowFeatureDim, kAdaptWidth, 1, 1, Activation::Relu),
      step_mlp2_(kAdaptWidth, kAdaptWidth, 1, 1, Activation::Relu),
      conv1_(kAdaptWidth, kAdaptWidth, 8, 4, Activation::Relu),
      conv2_(kAdaptWidth, kAdaptWidth, 5, 1, Activation::Relu),
      conv3_(kAdaptWidth, kAdaptWidth, 5, 1, Activation::Relu),
      head_(1, 1) {
  const auto lens = stage_lengths();
  const int flat = kAdaptWidth * lens.back();
  head_ = GaussianHead(flat, kLatentDim);
}

std::vector<int> AdaptNet::stage_lengths() const {
  const int l1 = Conv1DLayer::output_length(window_, conv1_.kernel(), conv1_.stride());
  const int l2 = Conv1DLayer::output_length(l1, conv2_.kernel(), conv2_.stride());
  const int l3 = Conv1DLayer::output_length(l2, conv3_.kernel(), conv3_.stride());
  return {l1, l2, l3};
}

void AdaptNet::init(Rng& rng) {
  const double relu_gain = std::sqrt(2.0);
  step_mlp1_.init_orthogonal(rng, relu_gain);
  step_mlp2_.init_orthogonal(rng, relu_gain);
  conv1_.init_orthogonal(rng, relu_gain);
  conv2_.init_orthogonal(rng, relu_gain);
  conv3_.init_orthogonal(rng, relu_gain);
  head_.init_orthogonal(rng, 1.0);
}

void AdaptNet::forward(const std::vector<double>& window_cm) {
  if (static_cast<int>(window_cm.size()) != kWindowFeatureDim * window_) {
    throw std::invalid_argument("adapt forward: window length mismatch");
  }
  const auto lens = stage_lengths();
  const auto& e1 = step_mlp1_.forward(window_cm, window_);
  const auto& e2 = step_mlp2_.forward(e1, window_);
  const auto& c1 = conv1_.forward(e2, window_);
  const auto& c2 = conv2_.forward(c1, lens[0]);
  const auto& c3 = conv3_.forward(c2, lens[1]);
  head_.forward(c3);
}

const std::vector<double>& AdaptNet::backward(const std::vector<double>& dmu,
                                              const std::vector<double>& dsigma) {
  const auto& dflat = head_.backward(dmu, dsigma);
  const auto& d3 = conv3_.backward(dflat);
  const auto& d2 = conv2_.backward(d3);
  const auto& d1 = conv1_.backward(d2);
  const auto& de2 = step_mlp2_.backward(d1);
  return step_mlp1_.backward(de2);
}

std::vector<ParamView> AdaptNet::params() {
  std::vector<ParamView> p;
  for (auto* layer : {&step_mlp1_, &step_mlp2_, &conv1_, &conv2_, &conv3_}) {
    for (auto& v : layer->params()) p.push_back(v);
  }
  for (auto& v : head_.params()) p.push_back(v);
  return p;
}

std::string AdaptNet::descriptor() const {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "adapt window=%d feat=%d width=%d", window_,
                kWindowFeatureDim, kAdaptWidth);
  return buf;
}

void AdaptNet::save(const std::string& path) {
  save_checkpoint_file(path, descriptor(), params());
}

void AdaptNet::load(const std::string& path) {
  load_checkpoint_file(path, descriptor(), params());
}

// ---- Losses ----

AdaptLossTerms adapt_loss(const std::vector<double>& mu, const std::vector<double>& sigma,
                          const std::vector<double>& mu_hat,
                          const std::vector<double>& sigma_hat, double beta) {
  if (mu.size() != static_cast<std::size_t>(kLatentDim) || mu.size() != sigma.size() ||
      mu.size() != mu_hat.size() || mu.size() != sigma_hat.size()) {
    throw std::invalid_argument("adapt_loss: all arguments must be 8-dim");
  }
  AdaptLossTerms terms;
  for (int i = 0; i < kLatentDim; ++i) {
    const double dm = mu[i] - mu_hat[i];
    const double ds = sigma[i] - sigma_hat[i];
    terms.rec += dm * dm + ds * ds;
  }
  terms.reg = kl_to_standard_normal(mu_hat, sigma_hat);
  terms.total = terms.rec + beta * terms.reg;
  return terms;
}

// ---- Dataset collection shared by adaptation training and fine-tuning ----

namespace {

struct WindowSample {
  std::vector<double> window_cm;
  std::vector<double> mu_target;     // encoder mu
  std::vector<double> sigma_target;  // encoder sigma
  std::vector<double> s;             // state at the sample step
  std::vector<double> a_prev;        // physical previous action
  std::vector<double> z_true;        // episode latent draw the policy acted with
  int episode = 0;
};

/// Rolls episodes over random doors and snapshots windows every
/// sample_stride steps. Actions come from the base policy (true latent)
/// or, when driver is non-null, from the policy fed driver's deterministic
/// latent estimate — the adaptive policy's own action-state distribution.
std::vector<WindowSample> collect_windows(PolicyNet& policy, EncoderNet& encoder,
                                          AdaptNet* driver, const SimConfig& sim,
                                          int episodes, int window_len, int stride,
                                          std::uint64_t seed) {
  std::vector<WindowSample> out;
  Rng rng(seed);
  DoorEpisodeEnv env(sim);
  HistoryWindow window(window_len);
  const ActionBounds bounds;

  for (int ep = 0; ep < episodes; ++ep) {
    const EnvParams e = sample_env(rng);
    env.reset_with(e);
    window.clear();

    const auto en = normalize(e);
    encoder.encode(std::vector<double>(en.data(), en.data() + kEnvParamCount));
    const std::vector<double> mu = encoder.mu();
    const std::vector<double> sigma = encoder.sigma();
    std::vector<double> z(kLatentDim);
    for (int i = 0; i < kLatentDim; ++i) z[i] = mu[i] + rng.normal() * sigma[i];

    std::vector<double> a_prev = {0.0, 0.0};
    std::vector<double> x(policy.obs_dim());
    int t = 0;
    while (!env.done()) {
      const auto s_scaled = policy_input_state(env.state());
      window.push(s_scaled, a_prev[0], a_prev[1]);
      if (t % stride == 0) {
        WindowSample sample;
        sample.window_cm = window.channel_major();
        sample.mu_target = mu;
        sample.sigma_target = sigma;
        sample.s.assign(s_scaled.data(), s_scaled.data() + kStateDim);
        sample.a_prev = a_prev;
        sample.z_true = z;
        sample.episode = ep;
        out.push_back(std::move(sample));
      }

      if (driver != nullptr) {
        driver->forward(window.channel_major());
        std::copy(driver->mu_hat().begin(), driver->mu_hat().end(), x.begin());
      } else {
        std::copy(z.begin(), z.end(), x.begin());
      }
      for (int i = 0; i < kStateDim; ++i) x[kLatentDim + i] = s_scaled[i];
      x[kLatentDim + kStateDim] = a_prev[0];
      x[kLatentDim + kStateDim + 1] = a_prev[1];
      policy.forward(x);
      const Action a = squash_2dof(policy.action_mean().data(), bounds);
      env.step_estimate(a);
      a_prev[0] = a.r_hat;
      a_prev[1] = a.theta_hat;
      ++t;
    }
  }
  return out;
}

}  // namespace

// ---- Adaptation training ----

AdaptTrainResult train_adaptation(AdaptNet& rho, PolicyNet& policy, EncoderNet& encoder,
                                  const AdaptTrainConfig& config) {
  if (policy.act_dim() != 2) {
    throw std::invalid_argument("train_adaptation expects a 2-DoF base policy");
  }
  Rng rng(config.seed);
  Rng init_rng = rng.spawn(1);
  rho.init(init_rng);

  const auto data =
      collect_windows(policy, encoder, nullptr, config.sim, config.episodes,
                      config.window, config.sample_stride, rng.spawn(2).next_u64());
  if (data.empty()) throw std::runtime_error("train_adaptation: no windows collected");

  const int holdout_episodes =
      std::max(1, static_cast<int>(config.episodes * config.holdout_fraction));
  const int train_episode_limit = config.episodes - holdout_episodes;
  std::vector<std::size_t> train_idx, holdout_idx;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (data[i].episode < train_episode_limit ? train_idx : holdout_idx).push_back(i);
  }

  Adam optimizer(rho.params(), AdamConfig{.lr = config.lr});
  Rng train_rng = rng.spawn(3);
  AdaptTrainResult result;
  std::vector<double> dmu(kLatentDim), dsigma(kLatentDim);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = train_idx.size() - 1; i > 0; --i) {
      const std::size_t j = train_rng.uniform_index(i + 1);
      std::swap(train_idx[i], train_idx[j]);
    }
    double sum_total = 0.0, sum_rec = 0.0, sum_reg = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += config.minibatch) {
      const std::size_t count =
          std::min<std::size_t>(config.minibatch, train_idx.size() - start);
      optimizer.zero_grad();
      const double inv = 1.0 / static_cast<double>(count);
      for (std::size_t k = 0; k < count; ++k) {
        const WindowSample& sample = data[train_idx[start + k]];
        rho.forward(sample.window_cm);
        const auto& mu_hat = rho.mu_hat();
        const auto& sigma_hat = rho.sigma_hat();
        const auto terms =
            adapt_loss(sample.mu_target, sample.sigma_target, mu_hat, sigma_hat,
                       config.beta);
        sum_total += terms.total;
        sum_rec += terms.rec;
        sum_reg += terms.reg;
        for (int i = 0; i < kLatentDim; ++i) {
          dmu[i] = inv * 2.0 * (mu_hat[i] - sample.mu_target[i]);
          dsigma[i] = inv * 2.0 * (sigma_hat[i] - sample.sigma_target[i]);
        }
        kl_to_standard_normal_grad(mu_hat, sigma_hat, inv * config.beta, &dmu, &dsigma);
        rho.backward(dmu, dsigma);
      }
      optimizer.step();
    }
    result.epoch_total.push_back(sum_total / train_idx.size());
    result.epoch_rec.push_back(sum_rec / train_idx.size());
    result.epoch_reg.push_back(sum_reg / train_idx.size());
  }

  // Held-out reconstruction vs the predict-the-training-mean baseline.
  std::vector<double> mean_mu(kLatentDim, 0.0), mean_sigma(kLatentDim, 0.0);
  for (const std::size_t i : train_idx) {
    for (int d = 0; d < kLatentDim; ++d) {
      mean_mu[d] += data[i].mu_target[d];
      mean_sigma[d] += data[i].sigma_target[d];
    }
  }
  for (int d = 0; d < kLatentDim; ++d) {
    mean_mu[d] /= static_cast<double>(train_idx.size());
    mean_sigma[d] /= static_cast<double>(train_idx.size());
  }
  double rec = 0.0, baseline = 0.0;
  for (const std::size_t i : holdout_idx) {
    rho.forward(data[i].window_cm);
    rec += adapt_loss(data[i].mu_target, data[i].sigma_target, rho.mu_hat(),
                      rho.sigma_hat(), 0.0)
               .rec;
    baseline += adapt_loss(data[i].mu_target, data[i].sigma_target, mean_mu, mean_sigma,
                           0.0)
                    .rec;
  }
  result.holdout_rec = rec / static_cast<double>(holdout_idx.size());
  result.baseline_rec = baseline / static_cast<double>(holdout_idx.size());
  return result;
}

// ---- Fine-tuning ----

namespace {

/// Mean ||a - a*||^2 with a* from rho_star's deterministic latent estimate.
double mean_lf(AdaptNet& rho_star, PolicyNet& policy,
               const std::vector<WindowSample>& data,
               const std::vector<std::size_t>& idx, const ActionBounds& bounds) {
  std::vector<double> x(policy.obs_dim());
  double total = 0.0;
  for (const std::size_t i : idx) {
    const WindowSample& sample = data[i];

    std::copy(sample.z_true.begin(), sample.z_true.end(), x.begin());
    for (int d = 0; d < kStateDim; ++d) x[kLatentDim + d] = sample.s[d];
    x[kLatentDim + kStateDim] = sample.a_prev[0];
    x[kLatentDim + kStateDim + 1] = sample.a_prev[1];
    policy.forward(x);
    const Action a = squash_2dof(policy.action_mean().data(), bounds);

    rho_star.forward(sample.window_cm);
    std::copy(rho_star.mu_hat().begin(), rho_star.mu_hat().end(), x.begin());
    policy.forward(x);
    const Action a_star = squash_2dof(policy.action_mean().data(), bounds);

    const double d0 = a.r_hat - a_star.r_hat;
    const double d1 = a.theta_hat - a_star.theta_hat;
    total += d0 * d0 + d1 * d1;
  }
  return total / static_cast<double>(idx.size());
}

}  // namespace

FinetuneResult finetune_adaptation(AdaptNet& rho_star, PolicyNet& policy,
                                   EncoderNet& encoder, const FinetuneConfig& config) {
  Rng rng(config.seed);
  const ActionBounds bounds;
  const int rounds = std::max(1, config.rounds);
  const int ap_per_round = std::max(1, config.episodes / rounds);
  const int epochs_per_round = std::max(1, config.epochs / rounds);
  const std::uint64_t validation_seed = rng.spawn(3).next_u64();

  FinetuneResult result;
  result.policy_checksum_before = param_checksum(policy.params());
  result.validation_lf_before = deployed_action_discrepancy(
      rho_star, policy, encoder, config.validation_episodes, validation_seed,
      config.sim);

  std::vector<WindowSample> data;
  std::vector<std::size_t> train_idx, bp_holdout_idx;
  if (config.bp_episodes > 0) {
    data = collect_windows(policy, encoder, nullptr, config.sim, config.bp_episodes,
                           rho_star.window_length(), config.sample_stride,
                           rng.spawn(1).next_u64());
    const int bp_holdout =
        std::max(1, static_cast<int>(config.bp_episodes * 0.15));
    for (std::size_t i = 0; i < data.size(); ++i) {
      (data[i].episode < config.bp_episodes - bp_holdout ? train_idx : bp_holdout_idx)
          .push_back(i);
    }
  }
  const double bp_lf_before =
      bp_holdout_idx.empty() ? 0.0 : mean_lf(rho_star, policy, data, bp_holdout_idx, bounds);
  result.bp_window_lf_before = bp_lf_before;

  Adam optimizer(rho_star.params(), AdamConfig{.lr = config.lr});
  Rng train_rng = rng.spawn(2);
  std::vector<double> x(policy.obs_dim());
  std::vector<double> target_action(2), dmu_pi(2), dsigma_zero(2, 0.0), squash_diag(2);
  std::vector<double> dz(kLatentDim), dsigma_rho(kLatentDim, 0.0);

  // Track the best module across rounds by the worse of the two normalized
  // discrepancies (deployed episodes and base-policy windows).
  const auto combined_score = [&](double deployed_lf, double bp_lf) {
    const double a = deployed_lf / std::max(result.validation_lf_before, 1e-12);
    const double b = bp_lf / std::max(bp_lf_before, 1e-12);
    return std::max(a, b);
  };
  double best_score = combined_score(result.validation_lf_before, bp_lf_before);
  double best_deployed = result.validation_lf_before;
  double best_bp = bp_lf_before;
  std::vector<std::vector<double>> best_params;
  const auto snapshot = [&] {
    best_params.clear();
    for (auto& p : rho_star.params()) best_params.push_back(*p.values);
  };
  snapshot();

  for (int round = 0; round < rounds; ++round) {
    // Fresh on-policy windows from the current fine-tuned module.
    auto ap_data = collect_windows(policy, encoder, &rho_star, config.sim,
                                   ap_per_round, rho_star.window_length(),
                                   config.sample_stride,
                                   rng.spawn(100 + round).next_u64());
    for (auto& sample : ap_data) {
      train_idx.push_back(data.size());
      data.push_back(std::move(sample));
    }

    for (int epoch = 0; epoch < epochs_per_round; ++epoch) {
      for (std::size_t i = train_idx.size() - 1; i > 0; --i) {
        const std::size_t j = train_rng.uniform_index(i + 1);
        std::swap(train_idx[i], train_idx[j]);
      }
      double sum_lf = 0.0;
      for (std::size_t start = 0; start < train_idx.size(); start += config.minibatch) {
        const std::size_t count =
            std::min<std::size_t>(config.minibatch, train_idx.size() - start);
        optimizer.zero_grad();
        const double inv = 1.0 / static_cast<double>(count);
        for (std::size_t k = 0; k < count; ++k) {
          const WindowSample& sample = data[train_idx[start + k]];

          // Reference action from the true latent; pi is frozen so this is a
          // constant target.
          std::copy(sample.z_true.begin(), sample.z_true.end(), x.begin());
          for (int d = 0; d < kStateDim; ++d) x[kLatentDim + d] = sample.s[d];
          x[kLatentDim + kStateDim] = sample.a_prev[0];
          x[kLatentDim + kStateDim + 1] = sample.a_prev[1];
          policy.forward(x);
          const Action a = squash_2dof(policy.action_mean().data(), bounds);
          target_action[0] = a.r_hat;
          target_action[1] = a.theta_hat;

          // a* through rho_star's deterministic estimate (eps' = 0).
          rho_star.forward(sample.window_cm);
          std::copy(rho_star.mu_hat().begin(), rho_star.mu_hat().end(), x.begin());
          policy.forward(x);
          const auto& mean_raw = policy.action_mean();
          const Action a_star = squash_2dof(mean_raw.data(), bounds);

          const double e0 = a_star.r_hat - target_action[0];
          const double e1 = a_star.theta_hat - target_action[1];
          sum_lf += e0 * e0 + e1 * e1;

          squash_2dof_grad(mean_raw.data(), bounds, squash_diag.data());
          dmu_pi[0] = inv * 2.0 * e0 * squash_diag[0];
          dmu_pi[1] = inv * 2.0 * e1 * squash_diag[1];
          // Gradients flow through pi into the latent slot only; pi's
          // parameter gradients accumulate but are never applied.
          const auto& dx = policy.backward(dmu_pi, dsigma_zero, 0.0);
          std::copy(dx.begin(), dx.begin() + kLatentDim, dz.begin());
          rho_star.backward(dz, dsigma_rho);
        }
        optimizer.step();
      }
      result.epoch_lf.push_back(sum_lf / train_idx.size());
    }

    const double lf_val = deployed_action_discrepancy(
        rho_star, policy, encoder, config.validation_episodes, validation_seed,
        config.sim);
    const double bp_val =
        bp_holdout_idx.empty() ? 0.0 : mean_lf(rho_star, policy, data, bp_holdout_idx, bounds);
    result.round_validation_lf.push_back(lf_val);
    const double score = combined_score(lf_val, bp_val);
    if (score < best_score) {
      best_score = score;
      best_deployed = lf_val;
      best_bp = bp_val;
      snapshot();
    }
  }

  // Restore the best-validated module.
  auto params = rho_star.params();
  for (std::size_t i = 0; i < params.size(); ++i) *params[i].values = best_params[i];
  result.validation_lf_after = best_deployed;
  result.bp_window_lf_after = best_bp;
  result.policy_checksum_after = param_checksum(policy.params());
  return result;
}

double deployed_action_discrepancy(AdaptNet& module, PolicyNet& policy,
                                   EncoderNet& encoder, int episodes,
                                   std::uint64_t seed, const SimConfig& sim) {
  const ActionBounds bounds;
  Rng door_rng(seed);
  Rng latent_rng = door_rng.spawn(0x5EED);
  double total = 0.0;
  std::int64_t steps = 0;

  for (int ep = 0; ep < episodes; ++ep) {
    const EnvParams e = sample_env(door_rng);
    DoorEpisodeEnv env(sim);
    env.reset_with(e);

    // The reference latent is the door's deterministic encoding: a sampled
    // z would inject target noise no window estimator can predict, inflating
    // the discrepancy floor on both sides of a comparison.
    const auto en = normalize(e);
    encoder.encode(std::vector<double>(en.data(), en.data() + kEnvParamCount));
    const std::vector<double> z_true = encoder.mu();

    HistoryWindow window(module.window_length());
    std::vector<double> x(policy.obs_dim());
    double a_prev_0 = 0.0, a_prev_1 = 0.0;
    while (!env.done()) {
      const auto s_scaled = policy_input_state(env.state());
      window.push(s_scaled, a_prev_0, a_prev_1);
      module.forward(window.channel_major());

      const auto fill_state = [&] {
        for (int i = 0; i < kStateDim; ++i) x[kLatentDim + i] = s_scaled[i];
        x[kLatentDim + kStateDim] = a_prev_0;
        x[kLatentDim + kStateDim + 1] = a_prev_1;
      };
      std::copy(module.mu_hat().begin(), module.mu_hat().end(), x.begin());
      fill_state();
      policy.forward(x);
      const Action a_star = squash_2dof(policy.action_mean().data(), bounds);

      std::copy(z_true.begin(), z_true.end(), x.begin());
      fill_state();
      policy.forward(x);
      const Action a = squash_2dof(policy.action_mean().data(), bounds);

      const double d0 = a.r_hat - a_star.r_hat;
      const double d1 = a.theta_hat - a_star.theta_hat;
      total += d0 * d0 + d1 * d1;
      ++steps;

      env.step_estimate(a_star);  // the module's own action drives the episode
      a_prev_0 = a_star.r_hat;
      a_prev_1 = a_star.theta_hat;
    }
  }
  return total / static_cast<double>(steps);
}

// ---- Online adaptive policy ----

EpisodeStats run_adaptive_policy(AdaptNet& rho, PolicyNet& policy, DoorEpisodeEnv& env,
                                 Rng& rng, bool sample_latent) {
  if (policy.act_dim() != 2) {
    throw std::invalid_argument("run_adaptive_policy expects a 2-DoF policy");
  }
  const ActionBounds bounds;
  HistoryWindow window(rho.window_length());
  std::vector<double> x(policy.obs_dim());
  std::vector<double> z_hat(kLatentDim);
  double a_prev_0 = 0.0, a_prev_1 = 0.0;

  EpisodeStats stats;
  double reward_sum = 0.0;
  while (!env.done()) {
    const auto s_scaled = policy_input_state(env.state());
    window.push(s_scaled, a_prev_0, a_prev_1);
    rho.forward(window.channel_major());
    for (int i = 0; i < kLatentDim; ++i) {
      const double eps = sample_latent ? rng.normal() : 0.0;
      z_hat[i] = rho.mu_hat()[i] + eps * rho.sigma_hat()[i];
    }

    std::copy(z_hat.begin(), z_hat.end(), x.begin());
    for (int i = 0; i < kStateDim; ++i) x[kLatentDim + i] = s_scaled[i];
    x[kLatentDim + kStateDim] = a_prev_0;
    x[kLatentDim + kStateDim + 1] = a_prev_1;
    policy.forward(x);
    const Action a = squash_2dof(policy.action_mean().data(), bounds);
    const auto step = env.step_estimate(a);
    a_prev_0 = a.r_hat;
    a_prev_1 = a.theta_hat;

    ++stats.steps;
    reward_sum += step.reward;
    stats.r_err.push_back(step.r_err);
    stats.theta_err.push_back(step.theta_err);
    stats.force_norm.push_back(step.force_norm);
    stats.torque_norm.push_back(step.torque_norm);
    stats.rewards.push_back(step.reward);
    stats.door_angle.push_back(env.door_angle());
    stats.twist_err.push_back(step.twist_err);
    stats.actions.push_back(a.r_hat);
    stats.actions.push_back(a.theta_hat);
    stats.states.push_back(step.s);
  }
  stats.success = env.success_ever();
  stats.mean_reward = stats.steps > 0 ? reward_sum / stats.steps : 0.0;
  return stats;
}

}  // namespace hinge_rl
