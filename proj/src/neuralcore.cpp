#include "hinge_rl/neuralcore.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

namespace hinge_rl {

namespace {

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Orthogonal rows (or columns when rows > cols) scaled by gain.
void orthogonal_matrix(Rng& rng, int rows, int cols, double gain, double* out) {
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Eigen::MatrixXd a(big, small);
  for (int i = 0; i < big; ++i) {
    for (int j = 0; j < small; ++j) a(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  // Fix signs so the factorization is unique.
  Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (int j = 0; j < small; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  Eigen::MatrixXd m = (rows >= cols) ? q : Eigen::MatrixXd(q.transpose());
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out[i * cols + j] = gain * m(i, j);
  }
}

}  // namespace

double apply_activation(Activation act, double x) {
  switch (act) {
    case Activation::Identity: return x;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Softplus: return softplus(x);
  }
  return x;
}

double activation_grad(Activation act, double pre, double post) {
  switch (act) {
    case Activation::Identity: return 1.0;
    case Activation::Tanh: return 1.0 - post * post;
    case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::Softplus: return sigmoid(pre);
  }
  return 1.0;
}

// ---- DenseLayer ----

DenseLayer::DenseLayer(int in, int out, Activation act) : in_(in), out_(out), act_(act) {
  if (in <= 0 || out <= 0) throw std::invalid_argument("dense dims must be positive");
  w.assign(static_cast<std::size_t>(in) * out, 0.0);
  b.assign(out, 0.0);
  gw.assign(w.size(), 0.0);
  gb.assign(b.size(), 0.0);
  pre_.assign(out, 0.0);
  y_.assign(out, 0.0);
  dx_.assign(in, 0.0);
}

void DenseLayer::init_orthogonal(Rng& rng, double gain) {
  orthogonal_matrix(rng, out_, in_, gain, w.data());
  std::fill(b.begin(), b.end(), 0.0);
}

const std::vector<double>& DenseLayer::forward(const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != in_) {
    throw std::invalid_argument("dense forward: input size mismatch");
  }
  x_cache_ = x;
  for (int o = 0; o < out_; ++o) {
    const double* row = w.data() + static_cast<std::size_t>(o) * in_;
    double acc = b[o];
    for (int i = 0; i < in_; ++i) acc += row[i] * x[i];
    pre_[o] = acc;
    y_[o] = apply_activation(act_, acc);
  }
  return y_;
}

const std::vector<double>& DenseLayer::backward(const std::vector<double>& dy) {
  if (static_cast<int>(dy.size()) != out_) {
    throw std::invalid_argument("dense backward: grad size mismatch");
  }
  std::fill(dx_.begin(), dx_.end(), 0.0);
  for (int o = 0; o < out_; ++o) {
    const double dpre = dy[o] * activation_grad(act_, pre_[o], y_[o]);
    if (dpre == 0.0) continue;
    gb[o] += dpre;
    double* grow = gw.data() + static_cast<std::size_t>(o) * in_;
    const double* row = w.data() + static_cast<std::size_t>(o) * in_;
    for (int i = 0; i < in_; ++i) {
      grow[i] += dpre * x_cache_[i];
      dx_[i] += dpre * row[i];
    }
  }
  return dx_;
}

std::vector<ParamView> DenseLayer::params() {
  return {{&w, &gw}, {&b, &gb}};
}

// ---- Conv1DLayer ----

Conv1DLayer::Conv1DLayer(int in_channels, int out_channels, int kernel, int stride,
                         Activation act)
    : in_ch_(in_channels), out_ch_(out_channels), kernel_(kernel), stride_(stride),
      act_(act) {
  if (in_channels <= 0 || out_channels <= 0 || kernel <= 0 || stride <= 0) {
    throw std::invalid_argument("conv1d spec values must be positive");
  }
  w.assign(static_cast<std::size_t>(out_ch_) * in_ch_ * kernel_, 0.0);
  b.assign(out_ch_, 0.0);
  gw.assign(w.size(), 0.0);
  gb.assign(b.size(), 0.0);
}

int Conv1DLayer::output_length(int input_length, int kernel, int stride) {
  if (input_length < kernel) {
    throw std::invalid_argument("conv1d: sequence shorter than kernel");
  }
  return (input_length - kernel) / stride + 1;
}

void Conv1DLayer::init_orthogonal(Rng& rng, double gain) {
  orthogonal_matrix(rng, out_ch_, in_ch_ * kernel_, gain, w.data());
  std::fill(b.begin(), b.end(), 0.0);
}

const std::vector<double>& Conv1DLayer::forward(const std::vector<double>& x,
                                                int input_length) {
  if (static_cast<int>(x.size()) != in_ch_ * input_length) {
    throw std::invalid_argument("conv1d forward: input size mismatch");
  }
  len_in_ = input_length;
  len_out_ = output_length(input_length, kernel_, stride_);
  x_cache_ = x;
  pre_.resize(static_cast<std::size_t>(out_ch_) * len_out_);
  y_.resize(pre_.size());

  // im2col + one GEMM: columns are the receptive fields.
  cols_.resize(static_cast<std::size_t>(in_ch_) * kernel_ * len_out_);
  Eigen::Map<Eigen::MatrixXd> cols(cols_.data(), in_ch_ * kernel_, len_out_);
  for (int j = 0; j < len_out_; ++j) {
    const int t0 = j * stride_;
    for (int i = 0; i < in_ch_; ++i) {
      const double* xi = x.data() + static_cast<std::size_t>(i) * len_in_ + t0;
      std::copy(xi, xi + kernel_, cols_.data() + (static_cast<std::size_t>(j) * in_ch_ +
                                                  i) * kernel_);
    }
  }
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
      weights(w.data(), out_ch_, in_ch_ * kernel_);
  gemm_.resize(static_cast<std::size_t>(len_out_) * out_ch_);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      gemm(gemm_.data(), len_out_, out_ch_);
  // gemm[j][o] = sum_c weights[o][c] * cols[c][j]
  gemm.noalias() = cols.transpose() * weights.transpose();

  for (int o = 0; o < out_ch_; ++o) {
    for (int j = 0; j < len_out_; ++j) {
      const std::size_t idx = static_cast<std::size_t>(o) * len_out_ + j;
      const double v = gemm(j, o) + b[o];
      pre_[idx] = v;
      y_[idx] = apply_activation(act_, v);
    }
  }
  return y_;
}

const std::vector<double>& Conv1DLayer::backward(const std::vector<double>& dy) {
  if (static_cast<int>(dy.size()) != out_ch_ * len_out_) {
    throw std::invalid_argument("conv1d backward: grad size mismatch");
  }
  // dpre, stored [len_out x out_ch] to match the forward GEMM layout.
  dpre_.resize(static_cast<std::size_t>(len_out_) * out_ch_);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      dpre(dpre_.data(), len_out_, out_ch_);
  for (int o = 0; o < out_ch_; ++o) {
    for (int j = 0; j < len_out_; ++j) {
      const std::size_t idx = static_cast<std::size_t>(o) * len_out_ + j;
      dpre(j, o) = dy[idx] * activation_grad(act_, pre_[idx], y_[idx]);
      gb[o] += dpre(j, o);
    }
  }

  const Eigen::Map<const Eigen::MatrixXd> cols(cols_.data(), in_ch_ * kernel_, len_out_);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      gweights(gw.data(), out_ch_, in_ch_ * kernel_);
  gweights.noalias() += dpre.transpose() * cols.transpose();

  // dcols = W^T * dpre^T, then scatter back to the input layout.
  dcols_.resize(cols_.size());
  Eigen::Map<Eigen::MatrixXd> dcols(dcols_.data(), in_ch_ * kernel_, len_out_);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
      weights(w.data(), out_ch_, in_ch_ * kernel_);
  dcols.noalias() = weights.transpose() * dpre.transpose();

  dx_.assign(static_cast<std::size_t>(in_ch_) * len_in_, 0.0);
  for (int j = 0; j < len_out_; ++j) {
    const int t0 = j * stride_;
    for (int i = 0; i < in_ch_; ++i) {
      const double* src =
          dcols_.data() + (static_cast<std::size_t>(j) * in_ch_ + i) * kernel_;
      double* dst = dx_.data() + static_cast<std::size_t>(i) * len_in_ + t0;
      for (int k = 0; k < kernel_; ++k) dst[k] += src[k];
    }
  }
  return dx_;
}

std::vector<ParamView> Conv1DLayer::params() {
  return {{&w, &gw}, {&b, &gb}};
}

// ---- Mlp ----

Mlp::Mlp(const std::vector<int>& dims, const std::vector<Activation>& acts) {
  if (dims.size() < 2 || acts.size() != dims.size() - 1) {
    throw std::invalid_argument("mlp: dims/acts mismatch");
  }
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers_.emplace_back(dims[i], dims[i + 1], acts[i]);
  }
}

void Mlp::init_orthogonal(Rng& rng) {
  for (auto& layer : layers_) {
    const double gain = layer.activation() == Activation::Relu ? std::sqrt(2.0) : 1.0;
    layer.init_orthogonal(rng, gain);
  }
}

const std::vector<double>& Mlp::forward(const std::vector<double>& x) {
  const std::vector<double>* cur = &x;
  for (auto& layer : layers_) cur = &layer.forward(*cur);
  return *cur;
}

const std::vector<double>& Mlp::backward(const std::vector<double>& dy) {
  const std::vector<double>* cur = &dy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    cur = &it->backward(*cur);
  }
  return *cur;
}

std::vector<ParamView> Mlp::params() {
  std::vector<ParamView> out;
  for (auto& layer : layers_) {
    for (auto& p : layer.params()) out.push_back(p);
  }
  return out;
}

// ---- GaussianHead ----

GaussianHead::GaussianHead(int in, int k) : k_(k), dense_(in, 2 * k, Activation::Identity) {
  mu_.assign(k, 0.0);
  sigma_.assign(k, 0.0);
  draw_.assign(2 * k, 0.0);
}

void GaussianHead::init_orthogonal(Rng& rng, double gain) {
  dense_.init_orthogonal(rng, gain);
}

void GaussianHead::forward(const std::vector<double>& x) {
  raw_ = dense_.forward(x);
  for (int i = 0; i < k_; ++i) {
    mu_[i] = raw_[i];
    sigma_[i] = softplus(raw_[k_ + i]) + sigma_floor_;
  }
}

const std::vector<double>& GaussianHead::backward(const std::vector<double>& dmu,
                                                  const std::vector<double>& dsigma) {
  for (int i = 0; i < k_; ++i) {
    draw_[i] = dmu[i];
    draw_[k_ + i] = dsigma[i] * sigmoid(raw_[k_ + i]);
  }
  return dense_.backward(draw_);
}

// ---- Gaussian utilities ----

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;  // ln(2*pi)

void check_sigma(const std::vector<double>& sigma) {
  for (const double s : sigma) {
    if (!(s > 0.0)) throw std::invalid_argument("sigma must be positive");
  }
}
}  // namespace

std::vector<double> gaussian_sample(const std::vector<double>& mu,
                                    const std::vector<double>& sigma,
                                    const std::vector<double>& eps) {
  if (mu.size() != sigma.size() || mu.size() != eps.size()) {
    throw std::invalid_argument("gaussian_sample: size mismatch");
  }
  check_sigma(sigma);
  std::vector<double> z(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) z[i] = mu[i] + eps[i] * sigma[i];
  return z;
}

double gaussian_log_prob(const std::vector<double>& mu, const std::vector<double>& sigma,
                         const std::vector<double>& x) {
  if (mu.size() != sigma.size() || mu.size() != x.size()) {
    throw std::invalid_argument("gaussian_log_prob: size mismatch");
  }
  check_sigma(sigma);
  double lp = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double d = (x[i] - mu[i]) / sigma[i];
    lp += -0.5 * d * d - std::log(sigma[i]) - 0.5 * kLogTwoPi;
  }
  return lp;
}

void gaussian_log_prob_grad(const std::vector<double>& mu,
                            const std::vector<double>& sigma,
                            const std::vector<double>& x, double scale,
                            std::vector<double>* dmu, std::vector<double>* dsigma) {
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double d = x[i] - mu[i];
    const double s2 = sigma[i] * sigma[i];
    (*dmu)[i] += scale * d / s2;
    (*dsigma)[i] += scale * (d * d / (s2 * sigma[i]) - 1.0 / sigma[i]);
  }
}

double gaussian_entropy(const std::vector<double>& sigma) {
  check_sigma(sigma);
  double h = 0.0;
  for (const double s : sigma) h += std::log(s) + 0.5 * (1.0 + kLogTwoPi);
  return h;
}

void gaussian_entropy_grad(const std::vector<double>& sigma, double scale,
                           std::vector<double>* dsigma) {
  for (std::size_t i = 0; i < sigma.size(); ++i) (*dsigma)[i] += scale / sigma[i];
}

double kl_to_standard_normal(const std::vector<double>& mu,
                             const std::vector<double>& sigma) {
  if (mu.size() != sigma.size()) {
    throw std::invalid_argument("kl_to_standard_normal: size mismatch");
  }
  check_sigma(sigma);
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s2 = sigma[i] * sigma[i];
    kl += 0.5 * (mu[i] * mu[i] + s2 - std::log(s2) - 1.0);
  }
  return kl;
}

void kl_to_standard_normal_grad(const std::vector<double>& mu,
                                const std::vector<double>& sigma, double scale,
                                std::vector<double>* dmu, std::vector<double>* dsigma) {
  for (std::size_t i = 0; i < mu.size(); ++i) {
    (*dmu)[i] += scale * mu[i];
    (*dsigma)[i] += scale * (sigma[i] - 1.0 / sigma[i]);
  }
}

// ---- Adam ----

Adam::Adam(std::vector<ParamView> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.values->size(), 0.0);
    v_.emplace_back(p.values->size(), 0.0);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) std::fill(p.grads->begin(), p.grads->end(), 0.0);
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t p = 0; p < params_.size(); ++p) {
    auto& values = *params_[p].values;
    const auto& grads = *params_[p].grads;
    if (values.size() != grads.size() || values.size() != m_[p].size()) {
      throw std::invalid_argument("adam: parameter/gradient shape mismatch");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[i];
      m_[p][i] = config_.beta1 * m_[p][i] + (1.0 - config_.beta1) * g;
      v_[p][i] = config_.beta2 * v_[p][i] + (1.0 - config_.beta2) * g * g;
      const double mhat = m_[p][i] / bc1;
      const double vhat = v_[p][i] / bc2;
      values[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

// ---- Checkpoint I/O ----

namespace {
constexpr char kMagic[] = "HRLCKPT1";

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  for (const double d : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64(out, bits);
  }
}

void read_doubles(std::istream& in, std::vector<double>& v) {
  for (double& d : v) {
    const std::uint64_t bits = read_u64(in);
    std::memcpy(&d, &bits, 8);
  }
}
}  // namespace

void save_checkpoint(std::ostream& out, const std::string& descriptor,
                     const std::vector<ParamView>& params) {
  out.write(kMagic, 8);
  write_u64(out, descriptor.size());
  out.write(descriptor.data(), static_cast<std::streamsize>(descriptor.size()));
  write_u64(out, params.size());
  for (const auto& p : params) {
    write_u64(out, p.values->size());
    write_doubles(out, *p.values);
  }
}

void load_checkpoint(std::istream& in, const std::string& expected_descriptor,
                     const std::vector<ParamView>& params) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const std::uint64_t dlen = read_u64(in);
  std::string descriptor(dlen, '\0');
  in.read(descriptor.data(), static_cast<std::streamsize>(dlen));
  if (!in || descriptor != expected_descriptor) {
    throw std::runtime_error("checkpoint: descriptor mismatch, got '" + descriptor +
                             "' expected '" + expected_descriptor + "'");
  }
  const std::uint64_t count = read_u64(in);
  if (count != params.size()) throw std::runtime_error("checkpoint: array count mismatch");
  for (const auto& p : params) {
    const std::uint64_t n = read_u64(in);
    if (n != p.values->size()) throw std::runtime_error("checkpoint: array size mismatch");
    read_doubles(in, *p.values);
  }
}

void save_checkpoint_file(const std::string& path, const std::string& descriptor,
                          const std::vector<ParamView>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_checkpoint(out, descriptor, params);
}

void load_checkpoint_file(const std::string& path, const std::string& expected_descriptor,
                          const std::vector<ParamView>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  load_checkpoint(in, expected_descriptor, params);
}

std::uint64_t param_checksum(const std::vector<ParamView>& params) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto& p : params) {
    for (const double d : *p.values) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, 8);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xFF;
        h *= 0x100000001B3ULL;
      }
    }
  }
  return h;
}

std::size_t param_count(const std::vector<ParamView>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.values->size();
  return n;
}

}  // namespace hinge_rl
