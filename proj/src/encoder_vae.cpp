#include "hinge_rl/encoder_vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace hinge_rl {

EncoderNet::EncoderNet()
    : trunk_({kEnvParamCount, 16, 16}, {Activation::Tanh, Activation::Tanh}),
      head_(16, kLatentDim) {}

void EncoderNet::init(Rng& rng) {
  trunk_.init_orthogonal(rng);
  head_.init_orthogonal(rng, 1.0);
}

void EncoderNet::encode(const std::vector<double>& e_normalized) {
  if (static_cast<int>(e_normalized.size()) != kEnvParamCount) {
    throw std::invalid_argument("encode: expected 16-dim input");
  }
  head_.forward(trunk_.forward(e_normalized));
}

const std::vector<double>& EncoderNet::backward(const std::vector<double>& dmu,
                                                const std::vector<double>& dsigma) {
  return trunk_.backward(head_.backward(dmu, dsigma));
}

std::vector<ParamView> EncoderNet::params() {
  auto p = trunk_.params();
  for (auto& hp : head_.params()) p.push_back(hp);
  return p;
}

void EncoderNet::save(const std::string& path) {
  save_checkpoint_file(path, descriptor(), params());
}

void EncoderNet::load(const std::string& path) {
  load_checkpoint_file(path, descriptor(), params());
}

DecoderNet::DecoderNet()
    : net_({kLatentDim, 16, 16, kEnvParamCount},
           {Activation::Tanh, Activation::Tanh, Activation::Identity}) {}

void DecoderNet::init(Rng& rng) { net_.init_orthogonal(rng); }

const std::vector<double>& DecoderNet::decode(const std::vector<double>& z) {
  if (static_cast<int>(z.size()) != kLatentDim) {
    throw std::invalid_argument("decode: expected 8-dim latent");
  }
  return net_.forward(z);
}

const std::vector<double>& DecoderNet::backward(const std::vector<double>& de_hat) {
  return net_.backward(de_hat);
}

std::vector<ParamView> DecoderNet::params() { return net_.params(); }

void DecoderNet::save(const std::string& path) {
  save_checkpoint_file(path, descriptor(), params());
}

void DecoderNet::load(const std::string& path) {
  load_checkpoint_file(path, descriptor(), params());
}

VaeLossTerms vae_loss(const std::vector<double>& e, const std::vector<double>& e_hat,
                      const std::vector<double>& mu, const std::vector<double>& sigma,
                      double beta) {
  if (e.size() != static_cast<std::size_t>(kEnvParamCount) || e.size() != e_hat.size()) {
    throw std::invalid_argument("vae_loss: e/e_hat must be 16-dim");
  }
  if (mu.size() != static_cast<std::size_t>(kLatentDim) || mu.size() != sigma.size()) {
    throw std::invalid_argument("vae_loss: mu/sigma must be 8-dim");
  }
  VaeLossTerms terms;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double d = e[i] - e_hat[i];
    terms.rec += d * d;
  }
  terms.reg = kl_to_standard_normal(mu, sigma);
  terms.total = terms.rec + beta * terms.reg;
  return terms;
}

VaeTrainResult train_vae(EncoderNet& encoder, DecoderNet& decoder,
                         const VaeTrainConfig& config) {
  if (config.dataset_size <= 0) throw std::invalid_argument("train_vae: empty dataset");

  Rng rng(config.seed);
  Rng init_rng = rng.spawn(1);
  encoder.init(init_rng);
  decoder.init(init_rng);

  Rng data_rng = rng.spawn(2);
  std::vector<std::vector<double>> data(config.dataset_size);
  for (auto& row : data) {
    const auto v = normalize(sample_env(data_rng));
    row.assign(v.data(), v.data() + kEnvParamCount);
  }

  const int holdout = std::max(1, static_cast<int>(config.dataset_size *
                                                   config.holdout_fraction));
  const int train_n = config.dataset_size - holdout;
  if (train_n <= 0) throw std::invalid_argument("train_vae: dataset too small");

  Adam optimizer_enc(encoder.params(), {config.lr});
  Adam optimizer_dec(decoder.params(), {config.lr});

  Rng train_rng = rng.spawn(3);
  std::vector<int> order(train_n);
  std::iota(order.begin(), order.end(), 0);

  VaeTrainResult result;
  std::vector<double> eps(kLatentDim), dmu(kLatentDim), dsigma(kLatentDim),
      de_hat(kEnvParamCount);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the deterministic stream.
    for (int i = train_n - 1; i > 0; --i) {
      const int j = static_cast<int>(train_rng.uniform_index(i + 1));
      std::swap(order[i], order[j]);
    }

    double sum_total = 0.0, sum_rec = 0.0, sum_reg = 0.0;
    for (int start = 0; start < train_n; start += config.minibatch) {
      const int count = std::min(config.minibatch, train_n - start);
      optimizer_enc.zero_grad();
      optimizer_dec.zero_grad();
      const double inv = 1.0 / count;
      for (int k = 0; k < count; ++k) {
        const auto& e = data[order[start + k]];
        encoder.encode(e);
        const auto& mu = encoder.mu();
        const auto& sigma = encoder.sigma();
        for (int i = 0; i < kLatentDim; ++i) eps[i] = train_rng.normal();
        const auto z = gaussian_sample(mu, sigma, eps);
        const auto& e_hat = decoder.decode(z);

        const auto terms = vae_loss(e, e_hat, mu, sigma, config.beta);
        sum_total += terms.total;
        sum_rec += terms.rec;
        sum_reg += terms.reg;

        for (int i = 0; i < kEnvParamCount; ++i) {
          de_hat[i] = inv * 2.0 * (e_hat[i] - e[i]);
        }
        const auto& dz = decoder.backward(de_hat);
        for (int i = 0; i < kLatentDim; ++i) {
          dmu[i] = dz[i];
          dsigma[i] = dz[i] * eps[i];
        }
        kl_to_standard_normal_grad(mu, sigma, inv * config.beta, &dmu, &dsigma);
        encoder.backward(dmu, dsigma);
        std::fill(dmu.begin(), dmu.end(), 0.0);
        std::fill(dsigma.begin(), dsigma.end(), 0.0);
      }
      optimizer_enc.step();
      optimizer_dec.step();
    }
    result.epoch_total.push_back(sum_total / train_n);
    result.epoch_rec.push_back(sum_rec / train_n);
    result.epoch_reg.push_back(sum_reg / train_n);
  }

  // Held-out metrics: decode from mu (no sampling noise).
  double sse = 0.0;
  std::vector<std::vector<double>> features;
  std::vector<std::vector<double>> targets;
  features.reserve(holdout);
  targets.reserve(holdout);
  for (int k = train_n; k < config.dataset_size; ++k) {
    const auto& e = data[k];
    encoder.encode(e);
    const auto& e_hat = decoder.decode(encoder.mu());
    for (int i = 0; i < kEnvParamCount; ++i) {
      const double d = e[i] - e_hat[i];
      sse += d * d;
    }
    features.push_back(encoder.mu());
    targets.push_back(e);
  }
  result.holdout_mse_per_coord = sse / (static_cast<double>(holdout) * kEnvParamCount);
  result.holdout_r2 = ridge_r2(features, targets);
  return result;
}

double ridge_r2(const std::vector<std::vector<double>>& features,
                const std::vector<std::vector<double>>& targets) {
  if (features.empty() || features.size() != targets.size()) {
    throw std::invalid_argument("ridge_r2: bad inputs");
  }
  const int n = static_cast<int>(features.size());
  const int d = static_cast<int>(features.front().size()) + 1;  // + bias
  const int t = static_cast<int>(targets.front().size());

  Eigen::MatrixXd x(n, d);
  Eigen::MatrixXd y(n, t);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j + 1 < d; ++j) x(i, j) = features[i][j];
    x(i, d - 1) = 1.0;
    for (int j = 0; j < t; ++j) y(i, j) = targets[i][j];
  }

  const Eigen::MatrixXd gram =
      x.transpose() * x + 1e-3 * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd w = gram.ldlt().solve(x.transpose() * y);
  const Eigen::MatrixXd pred = x * w;

  double r2_sum = 0.0;
  for (int j = 0; j < t; ++j) {
    const double mean = y.col(j).mean();
    const double sst = (y.col(j).array() - mean).square().sum();
    const double sse = (y.col(j) - pred.col(j)).squaredNorm();
    r2_sum += sst > 0.0 ? 1.0 - sse / sst : 0.0;
  }
  return r2_sum / t;
}

}  // namespace hinge_rl
