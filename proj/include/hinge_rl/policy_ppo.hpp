#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hinge_rl/adaptation.hpp"
#include "hinge_rl/doorsim.hpp"
#include "hinge_rl/encoder_vae.hpp"
#include "hinge_rl/kinematics.hpp"
#include "hinge_rl/neuralcore.hpp"

namespace hinge_rl {

inline constexpr int kPolicyInputDim = 22;  // [z(8), s(12), a_prev(2)]

struct RewardWeights {
  double k1 = 1.0;
  double k2 = 0.7;
  double k3 = 0.7;
  double k4 = 0.7;
  double k5 = 0.3;
};

/// |tau_y| is clamped to at least this (sign preserved) inside the k5
/// quotient; the raw ratio passes through zero during transients.
inline constexpr double kTauYClamp = 1e-3;

/// Tracking-supervision reward: minus the weighted sum of estimation error,
/// off-axis forces, off-axis torque and the torque-direction residual.
/// Always <= 0; exactly 0 under perfect estimates and an ideal wrench.
double reward(double r, double theta, double r_hat, double theta_hat,
              const Wrench& wrench_gripper, const RewardWeights& weights);

/// Velocity-supervised variant: the k1 term is the squared twist error.
double reward_6dof(const Twist& v_g, const Twist& v_ideal, const Wrench& wrench_gripper,
                   double theta, const RewardWeights& weights);

// ---- Actions ----

struct Action {
  double r_hat = 0.0;      // m
  double theta_hat = 0.0;  // rad
};

struct ActionBounds {
  double r_lo = 0.05;
  double r_hi = 1.0;
  double theta_span = 0.45;
  double linear_span = 0.5;   // m/s per axis, 6-DoF actions
  double angular_span = 1.0;  // rad/s per axis
};

/// Fixed feature scaling applied to s wherever it enters a network input
/// (policy x vectors and history-window rows): forces x0.1, torques x0.5,
/// velocities x3. Raw sensor units span two orders of magnitude and would
/// saturate tanh trunks; the scales put every channel near unit range.
Eigen::Matrix<double, kStateDim, 1> policy_input_state(
    const Eigen::Matrix<double, kStateDim, 1>& s);

/// Raw Gaussian samples squash into the bounded action box; the Gaussian
/// lives in raw space, the environment only ever sees bounded values.
Action squash_2dof(const double* raw, const ActionBounds& bounds);
Twist squash_6dof(const double* raw, const ActionBounds& bounds);
/// d(squashed)/d(raw), diagonal.
void squash_2dof_grad(const double* raw, const ActionBounds& bounds, double* diag);

// ---- Policy network ----

/// Shared tanh trunk with a Gaussian actor head and a scalar value head.
class PolicyNet {
 public:
  PolicyNet(int obs_dim = kPolicyInputDim, int act_dim = 2, int hidden = 64);

  void init(Rng& rng);

  void forward(const std::vector<double>& x);
  const std::vector<double>& action_mean() const { return actor_.mu(); }    // raw
  const std::vector<double>& action_sigma() const { return actor_.sigma(); }
  double value() const { return value_out_; }

  /// Backward from gradients on the actor distribution and the value;
  /// returns dL/dx.
  const std::vector<double>& backward(const std::vector<double>& dmu,
                                      const std::vector<double>& dsigma, double dvalue);

  std::vector<ParamView> params();
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  std::string descriptor() const;
  void save(const std::string& path);
  void load(const std::string& path);

 private:
  int obs_dim_;
  int act_dim_;
  Mlp trunk_;
  GaussianHead actor_;
  DenseLayer value_head_;
  double value_out_ = 0.0;
  std::vector<double> dtrunk_;
};

// ---- Episode environment ----

/// DoorSim plus the task conventions: action-to-twist conversion at the
/// door's target speed, reward evaluation against simulator ground truth,
/// success bookkeeping. Policies only ever receive s, never EnvParams.
class DoorEpisodeEnv {
 public:
  explicit DoorEpisodeEnv(SimConfig sim_config = SimConfig{},
                          RewardWeights weights = RewardWeights{});

  void reset_with(const EnvParams& e);

  struct Step {
    Eigen::Matrix<double, kStateDim, 1> s;
    double reward = 0.0;
    bool done = false;
    double r_err = 0.0;
    double theta_err = 0.0;
    double force_norm = 0.0;
    double torque_norm = 0.0;
    double twist_err = 0.0;  // ||commanded - ideal|| (6-vector norm)
  };

  /// Estimate-driven step: command twist_from_action(r_hat, theta_hat, omega).
  Step step_estimate(const Action& action);
  /// Same command, but velocity-supervised reward (ablation arm).
  Step step_estimate_velocity_reward(const Action& action);
  /// Raw 6-DoF twist command with the velocity-supervised reward.
  Step step_twist(const Twist& commanded);

  const Eigen::Matrix<double, kStateDim, 1>& state() const { return state_; }
  bool done() const { return sim_.done(); }
  bool success_ever() const { return success_ever_; }
  int step_index() const { return sim_.step_index(); }
  double door_angle() const { return sim_.door().angle; }

  // Privileged channels for training-time rewards and metrics.
  double ground_truth_r() const { return sim_.ground_truth_r(); }
  double ground_truth_theta() const { return sim_.ground_truth_theta(); }
  double target_speed() const { return env_.target_speed; }
  const EnvParams& env_params() const { return env_; }
  const DoorSim& sim() const { return sim_; }

 private:
  Step finish_step(const StepResult& result, double reward_value, double r_hat,
                   double theta_hat, double twist_err);

  DoorSim sim_;
  RewardWeights weights_;
  EnvParams env_;
  Eigen::Matrix<double, kStateDim, 1> state_ = Eigen::Matrix<double, kStateDim, 1>::Zero();
  bool success_ever_ = false;
};

// ---- PPO ----

enum class PolicyMode {
  SingleDoor,        // mean-domain door every episode
  DomainRandomized,  // fresh door per episode, latent from the encoder
  NoEncoder,         // end-to-end history features, no latent supervision
  SixDof,            // raw twist actions, velocity-supervised reward
  VelocityReward,    // 2-DoF actions, velocity-supervised reward
};

std::string to_string(PolicyMode mode);
PolicyMode policy_mode_from_string(const std::string& name);

struct PpoConfig {
  double lr = 3e-4;
  double clip_ratio = 0.2;
  // Effective GAE horizon ~1/(1-gamma*lambda) ~ 7 steps: the coupling
  // responds to a command within ~0.1 s, and longer horizons bury the
  // per-step supervision in advantage noise (see ledger).
  double gamma = 0.95;
  double gae_lambda = 0.90;
  int epochs = 4;
  int minibatch = 256;
  int horizon = 2048;  // steps per environment per update
  int num_envs = 8;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  double kl_stop = 0.03;  // skip remaining epochs once approx KL passes this
  std::int64_t total_steps = 2000000;
  int history_window = 50;  // NoEncoder feature window
  std::uint64_t seed = 0;
  PolicyMode mode = PolicyMode::DomainRandomized;
  ActionBounds bounds;
  RewardWeights weights;
  SimConfig sim;
};

struct PpoUpdateStats {
  int update = 0;
  std::int64_t env_steps = 0;
  double mean_reward = 0.0;     // per step
  double mean_r_err = 0.0;
  double mean_theta_err = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double value_loss = 0.0;
  double mean_sigma = 0.0;
  double episode_success_rate = 0.0;
};

/// Flat rollout storage, env-major then time-major inside each env.
struct RolloutBatch {
  int obs_dim = 0;
  int act_dim = 0;
  int window_feature_dim = 0;  // > 0 when windows are stored (NoEncoder)
  std::vector<double> obs;
  std::vector<double> windows;
  std::vector<double> act_raw;
  std::vector<double> logp;
  std::vector<double> value;
  std::vector<double> reward;
  std::vector<std::uint8_t> done;
  std::vector<double> advantage;
  std::vector<double> returns;
  std::size_t size() const { return logp.size(); }
};

/// Generalized advantage estimation over one env's time slice;
/// bootstrap_value is used when the slice ends mid-episode.
void compute_gae(const std::vector<double>& reward, const std::vector<double>& value,
                 const std::vector<std::uint8_t>& done, double bootstrap_value,
                 double gamma, double lambda, std::vector<double>* advantage,
                 std::vector<double>* returns);

class PpoTrainer {
 public:
  /// encoder may be null only in NoEncoder mode; the trainer keeps a
  /// non-owning reference and uses it read-only apart from forward caches.
  PpoTrainer(const PpoConfig& config, EncoderNet* encoder);
  ~PpoTrainer();

  /// Runs training to config.total_steps; returns one stats row per update.
  std::vector<PpoUpdateStats> train();

  /// One rollout + one update; exposed for tests.
  PpoUpdateStats train_one_update();

  /// Update on a caller-built batch; exposed for tests.
  PpoUpdateStats update_policy_for_test(RolloutBatch& batch) {
    return update_policy(batch);
  }

  PolicyNet& policy() { return *policy_; }
  AdaptNet* feature_net() { return feature_net_.get(); }
  const PpoConfig& config() const { return config_; }

 private:
  struct EnvSlot;

  void begin_episode(EnvSlot& slot);
  void assemble_input(const EnvSlot& slot, const HistoryWindow& window,
                      std::vector<double>* x) const;
  RolloutBatch collect_rollouts();
  PpoUpdateStats update_policy(RolloutBatch& batch);

  PpoConfig config_;
  EncoderNet* encoder_;
  std::unique_ptr<PolicyNet> policy_;
  std::unique_ptr<AdaptNet> feature_net_;
  std::unique_ptr<Adam> policy_opt_;
  std::unique_ptr<Adam> feature_opt_;
  Rng master_rng_;
  std::vector<std::unique_ptr<EnvSlot>> slots_;
  int update_index_ = 0;
  std::int64_t steps_done_ = 0;
  // Running return statistics; the value head learns normalized targets so
  // early large force penalties cannot blow up shared-trunk gradients.
  double ret_mean_ = 0.0;
  double ret_var_ = 1.0;
  double ret_count_ = 1e-4;
  // rollout diagnostics
  double diag_reward_ = 0.0, diag_r_err_ = 0.0, diag_theta_err_ = 0.0;
  int diag_episodes_ = 0, diag_successes_ = 0;
};

/// Writes the training-curve CSV (update, steps, mean reward, errors, KL,
/// clip fraction, value loss, sigma, success rate).
void write_curve_csv(std::ostream& out, const std::vector<PpoUpdateStats>& rows,
                     const std::string& header_comment);

}  // namespace hinge_rl
