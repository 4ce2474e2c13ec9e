#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hinge_rl/rng.hpp"

namespace hinge_rl {

enum class Activation { Identity, Tanh, Relu, Softplus };

double apply_activation(Activation act, double x);
double activation_grad(Activation act, double pre, double post);

/// Reference to one parameter array and its gradient; optimizers and
/// checkpoints walk these in declaration order.
struct ParamView {
  std::vector<double>* values = nullptr;
  std::vector<double>* grads = nullptr;
};

/// Fully connected layer, y = act(W x + b). Caches the last forward pass so
/// backward() can be called per sample; clones are cheap and are how
/// inference is shared across rollout workers.
class DenseLayer {
 public:
  DenseLayer(int in, int out, Activation act);

  void init_orthogonal(Rng& rng, double gain);

  const std::vector<double>& forward(const std::vector<double>& x);
  /// Accumulates weight/bias gradients from dL/dy and returns dL/dx.
  const std::vector<double>& backward(const std::vector<double>& dy);

  std::vector<ParamView> params();
  int in_dim() const { return in_; }
  int out_dim() const { return out_; }
  Activation activation() const { return act_; }

  std::vector<double> w;  // out*in, row-major
  std::vector<double> b;  // out
  std::vector<double> gw;
  std::vector<double> gb;

 private:
  int in_;
  int out_;
  Activation act_;
  std::vector<double> x_cache_;
  std::vector<double> pre_;
  std::vector<double> y_;
  std::vector<double> dx_;
};

/// 1-D valid (no padding) strided cross-correlation. Input and output are
/// channel-major: index [c*len + t].
class Conv1DLayer {
 public:
  Conv1DLayer(int in_channels, int out_channels, int kernel, int stride,
              Activation act);

  void init_orthogonal(Rng& rng, double gain);

  static int output_length(int input_length, int kernel, int stride);
  int output_length(int input_length) const {
    return output_length(input_length, kernel_, stride_);
  }

  const std::vector<double>& forward(const std::vector<double>& x, int input_length);
  const std::vector<double>& backward(const std::vector<double>& dy);

  std::vector<ParamView> params();
  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }
  int kernel() const { return kernel_; }
  int stride() const { return stride_; }

  std::vector<double> w;  // [out_ch][in_ch][kernel]
  std::vector<double> b;  // [out_ch]
  std::vector<double> gw;
  std::vector<double> gb;

 private:
  int in_ch_;
  int out_ch_;
  int kernel_;
  int stride_;
  Activation act_;
  int len_in_ = 0;
  int len_out_ = 0;
  std::vector<double> x_cache_;
  std::vector<double> pre_;
  std::vector<double> y_;
  std::vector<double> dx_;
  // GEMM scratch (im2col columns and products).
  std::vector<double> cols_;
  std::vector<double> dcols_;
  std::vector<double> gemm_;
  std::vector<double> dpre_;
};

/// Stack of dense layers.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<int>& dims, const std::vector<Activation>& acts);

  void init_orthogonal(Rng& rng);

  const std::vector<double>& forward(const std::vector<double>& x);
  const std::vector<double>& backward(const std::vector<double>& dy);

  std::vector<ParamView> params();
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  int in_dim() const { return layers_.front().in_dim(); }
  int out_dim() const { return layers_.back().out_dim(); }

 private:
  std::vector<DenseLayer> layers_;
};

/// Dense layer producing a diagonal Gaussian: mu = raw[:k],
/// sigma = softplus(raw[k:]) + 1e-6 so log sigma^2 is always defined.
class GaussianHead {
 public:
  GaussianHead() = default;
  GaussianHead(int in, int k);

  void init_orthogonal(Rng& rng, double gain);

  void forward(const std::vector<double>& x);
  /// Backward from dL/dmu and dL/dsigma; returns dL/dx.
  const std::vector<double>& backward(const std::vector<double>& dmu,
                                      const std::vector<double>& dsigma);

  const std::vector<double>& mu() const { return mu_; }
  const std::vector<double>& sigma() const { return sigma_; }
  std::vector<ParamView> params() { return dense_.params(); }
  int k() const { return k_; }
  DenseLayer& dense() { return dense_; }

  /// Raise the additive sigma offset (e.g. an exploration floor for policy
  /// heads, where a collapsed sigma makes likelihood ratios explode).
  void set_sigma_floor(double floor) { sigma_floor_ = floor; }
  double sigma_floor() const { return sigma_floor_; }

  static constexpr double kSigmaFloor = 1e-6;

 private:
  int k_ = 0;
  double sigma_floor_ = kSigmaFloor;
  DenseLayer dense_{1, 2, Activation::Identity};
  std::vector<double> raw_;
  std::vector<double> mu_;
  std::vector<double> sigma_;
  std::vector<double> draw_;
};

// ---- Gaussian utilities (Eq.-level primitives shared by VAE, policy and
// adaptation losses) ----

/// z = mu + eps (.) sigma. Throws if any sigma <= 0.
std::vector<double> gaussian_sample(const std::vector<double>& mu,
                                    const std::vector<double>& sigma,
                                    const std::vector<double>& eps);

/// Sum over dimensions of log N(x; mu, sigma^2).
double gaussian_log_prob(const std::vector<double>& mu, const std::vector<double>& sigma,
                         const std::vector<double>& x);

/// d(log prob)/dmu and /dsigma, accumulated into the outputs.
void gaussian_log_prob_grad(const std::vector<double>& mu,
                            const std::vector<double>& sigma,
                            const std::vector<double>& x, double scale,
                            std::vector<double>* dmu, std::vector<double>* dsigma);

/// Entropy of a diagonal Gaussian.
double gaussian_entropy(const std::vector<double>& sigma);
void gaussian_entropy_grad(const std::vector<double>& sigma, double scale,
                           std::vector<double>* dsigma);

/// (1/2) sum_i (mu_i^2 + sigma_i^2 - ln sigma_i^2 - 1); the regularizer of
/// both the encoder and adaptation objectives. >= 0, zero iff mu=0, sigma=1.
double kl_to_standard_normal(const std::vector<double>& mu,
                             const std::vector<double>& sigma);
void kl_to_standard_normal_grad(const std::vector<double>& mu,
                                const std::vector<double>& sigma, double scale,
                                std::vector<double>* dmu, std::vector<double>* dsigma);

// ---- Optimizer ----

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::vector<ParamView> params, AdamConfig config);

  void zero_grad();
  void step();

  void set_lr(double lr) { config_.lr = lr; }
  double lr() const { return config_.lr; }
  std::int64_t step_count() const { return t_; }

 private:
  std::vector<ParamView> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t t_ = 0;
};

// ---- Checkpoint I/O ----
// Layout: magic "HRLCKPT1", a one-line descriptor string, then for each
// parameter array its length (u64 LE) followed by raw 64-bit LE doubles, in
// declaration order.

void save_checkpoint(std::ostream& out, const std::string& descriptor,
                     const std::vector<ParamView>& params);
void save_checkpoint_file(const std::string& path, const std::string& descriptor,
                          const std::vector<ParamView>& params);
/// Loads into existing arrays; throws on magic/descriptor/shape mismatch.
void load_checkpoint(std::istream& in, const std::string& expected_descriptor,
                     const std::vector<ParamView>& params);
void load_checkpoint_file(const std::string& path, const std::string& expected_descriptor,
                          const std::vector<ParamView>& params);

/// FNV-1a over the raw parameter bytes; the frozen-policy contract is
/// checked with this.
std::uint64_t param_checksum(const std::vector<ParamView>& params);

std::size_t param_count(const std::vector<ParamView>& params);

}  // namespace hinge_rl
