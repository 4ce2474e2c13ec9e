#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hinge_rl/doorsim.hpp"
#include "hinge_rl/encoder_vae.hpp"
#include "hinge_rl/neuralcore.hpp"

namespace hinge_rl {

class PolicyNet;
class DoorEpisodeEnv;

inline constexpr int kWindowFeatureDim = 14;  // [s(12), a_prev(2)] per step

/// Rolling action-state history of fixed length n. Rows older than the
/// episode are zero; at step t < n exactly n - t leading rows are zero.
class HistoryWindow {
 public:
  explicit HistoryWindow(int length);

  void clear();
  void push(const Eigen::Matrix<double, kStateDim, 1>& s, double a_prev_0,
            double a_prev_1);

  int length() const { return length_; }
  int fill_count() const { return fill_; }
  /// Row-major [time][feature] view.
  const std::vector<double>& rows() const { return rows_; }
  /// Channel-major [feature][time] layout the conv stack consumes.
  const std::vector<double>& channel_major() const;

 private:
  int length_;
  int fill_ = 0;
  std::vector<double> rows_;
  mutable std::vector<double> cm_;
};

/// History encoder rho: a per-step 2-layer MLP (width 32, realized as
/// 1x1 convolutions so the whole window is one cached pass), a 3-layer
/// 1-D conv stack (32,32,8,4), (32,32,5,1), (32,32,5,1), then a dense
/// Gaussian head on the flattened features.
class AdaptNet {
 public:
  explicit AdaptNet(int window_length = 50);

  void init(Rng& rng);

  /// window must be channel-major with this net's window length.
  void forward(const std::vector<double>& window_cm);
  const std::vector<double>& mu_hat() const { return head_.mu(); }
  const std::vector<double>& sigma_hat() const { return head_.sigma(); }

  const std::vector<double>& backward(const std::vector<double>& dmu,
                                      const std::vector<double>& dsigma);

  std::vector<ParamView> params();
  int window_length() const { return window_; }
  /// Conv time lengths after each stage, e.g. 50 -> 11 -> 7 -> 3.
  std::vector<int> stage_lengths() const;
  std::string descriptor() const;
  void save(const std::string& path);
  void load(const std::string& path);

 private:
  int window_;
  Conv1DLayer step_mlp1_;
  Conv1DLayer step_mlp2_;
  Conv1DLayer conv1_;
  Conv1DLayer conv2_;
  Conv1DLayer conv3_;
  GaussianHead head_;
};

struct AdaptLossTerms {
  double total = 0.0;
  double rec = 0.0;
  double reg = 0.0;
};

/// rec = ||mu - mu_hat||^2 + ||sigma - sigma_hat||^2,
/// reg = (1/2) sum(mu_hat^2 + sigma_hat^2 - ln sigma_hat^2 - 1),
/// total = rec + beta * reg.
AdaptLossTerms adapt_loss(const std::vector<double>& mu, const std::vector<double>& sigma,
                          const std::vector<double>& mu_hat,
                          const std::vector<double>& sigma_hat, double beta = 1.0);

struct AdaptTrainConfig {
  int window = 50;
  double lr = 1e-4;
  int episodes = 300;
  int epochs = 20;
  int minibatch = 64;
  int sample_stride = 8;  // record one window every this many steps
  double beta = 0.02;     // regularizer weight, matching the encoder objective
  double holdout_fraction = 0.1;
  std::uint64_t seed = 0;
  SimConfig sim;
};

struct AdaptTrainResult {
  std::vector<double> epoch_total;
  std::vector<double> epoch_rec;
  std::vector<double> epoch_reg;
  double holdout_rec = 0.0;           // mean per-window rec on held-out episodes
  double baseline_rec = 0.0;          // predict-the-training-mean baseline
};

/// Rolls out the base policy (true latent) over random doors, records
/// windows, and regresses rho onto the encoder's (mu, sigma).
AdaptTrainResult train_adaptation(AdaptNet& rho, PolicyNet& policy, EncoderNet& encoder,
                                  const AdaptTrainConfig& config);

struct FinetuneConfig {
  /// Windows come from rollouts of the adaptive policy itself, re-collected
  /// each round with the current module (the deployed module must fit its
  /// own action-state distribution); the regression target is always the
  /// frozen policy's action under the true latent in the same state context.
  int episodes = 600;      // adaptive-policy episodes, split across rounds
  int bp_episodes = 100;   // base-policy block kept in the training set
  int rounds = 5;
  int epochs = 25;         // total across rounds
  int minibatch = 64;
  int sample_stride = 8;
  double lr = 1e-4;
  /// Deployed-l_f validation between rounds; the best module wins.
  int validation_episodes = 10;
  std::uint64_t seed = 0;
  SimConfig sim;
};

struct FinetuneResult {
  std::vector<double> epoch_lf;
  std::vector<double> round_validation_lf;
  double validation_lf_before = 0.0;   // deployed episodes, validation seed
  double validation_lf_after = 0.0;
  double bp_window_lf_before = 0.0;    // held-out base-policy windows
  double bp_window_lf_after = 0.0;
  std::uint64_t policy_checksum_before = 0;
  std::uint64_t policy_checksum_after = 0;
};

/// Fine-tunes rho_star (initialized from rho by the caller) to minimize
/// ||a - a*||^2 through the frozen policy: gradients flow through pi into
/// rho_star, pi's parameters are never stepped.
FinetuneResult finetune_adaptation(AdaptNet& rho_star, PolicyNet& policy,
                                   EncoderNet& encoder, const FinetuneConfig& config);

/// Mean ||a - a*||^2 of an adaptation module over its own deployed episodes:
/// a* is the executed action from the module's deterministic latent
/// estimate, a the frozen policy's action under the true latent in the same
/// state context — Eq. (16)'s quantity evaluated out-of-sample on the
/// composed system.
double deployed_action_discrepancy(AdaptNet& module, PolicyNet& policy,
                                   EncoderNet& encoder, int episodes,
                                   std::uint64_t seed, const SimConfig& sim = SimConfig{});

struct EpisodeStats {
  int steps = 0;
  bool success = false;
  double mean_reward = 0.0;
  std::vector<double> r_err;
  std::vector<double> theta_err;
  std::vector<double> force_norm;
  std::vector<double> torque_norm;
  std::vector<double> rewards;
  std::vector<double> door_angle;
  std::vector<double> twist_err;
  std::vector<double> actions;  // flattened per-step physical actions
  std::vector<Eigen::Matrix<double, kStateDim, 1>> states;
};

/// Runs one adaptive-policy episode: at each step the latent estimate comes
/// from rho over the online window (sampled via eps' when sample_latent,
/// else mu_hat), the action from the frozen policy. The policy input is
/// assembled only from the latent estimate, s, and the previous action.
EpisodeStats run_adaptive_policy(AdaptNet& rho, PolicyNet& policy, DoorEpisodeEnv& env,
                                 Rng& rng, bool sample_latent = true);

}  // namespace hinge_rl
