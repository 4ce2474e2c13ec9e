#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hinge_rl/neuralcore.hpp"
#include "hinge_rl/rng.hpp"

using namespace hinge_rl;

namespace {

/// Central-difference check of every parameter and input gradient of a
/// scalar loss. loss() must be a pure function of params/input; grads()
/// must populate them analytically.
void check_gradients(const std::function<double()>& loss,
                     const std::function<void()>& compute_grads,
                     const std::vector<ParamView>& params, double h = 1e-5,
                     double tol = 1e-4) {
  compute_grads();
  std::vector<std::vector<double>> analytic;
  for (const auto& p : params) analytic.push_back(*p.grads);

  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& values = *params[p].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss();
      values[i] = saved - h;
      const double down = loss();
      values[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = analytic[p][i];
      const double err = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      CHECK(err < tol);
    }
  }
}

}  // namespace

TEST_CASE("dense identity weights reproduce the input") {
  DenseLayer layer(4, 4, Activation::Identity);
  for (int i = 0; i < 4; ++i) layer.w[i * 4 + i] = 1.0;
  const std::vector<double> x = {0.3, -1.2, 0.0, 2.5};
  const auto& y = layer.forward(x);
  for (int i = 0; i < 4; ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("dense zero input with zero bias stays zero through tanh") {
  DenseLayer layer(3, 5, Activation::Tanh);
  Rng rng(1);
  layer.init_orthogonal(rng, 1.0);
  const auto& y = layer.forward({0.0, 0.0, 0.0});
  for (const double v : y) CHECK(v == 0.0);
}

TEST_CASE("dense rejects shape mismatches") {
  DenseLayer layer(3, 2, Activation::Identity);
  CHECK_THROWS_AS(layer.forward({1.0, 2.0}), std::invalid_argument);
  layer.forward({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(layer.backward({1.0}), std::invalid_argument);
}

TEST_CASE("mlp gradients agree with central differences") {
  Rng rng(42);
  Mlp net({5, 7, 4, 3},
          {Activation::Tanh, Activation::Softplus, Activation::Identity});
  net.init_orthogonal(rng);

  std::vector<double> x(5), target(3);
  for (auto& v : x) v = rng.normal();
  for (auto& v : target) v = rng.normal();

  auto loss = [&]() {
    const auto& y = net.forward(x);
    double l = 0.0;
    for (int i = 0; i < 3; ++i) l += (y[i] - target[i]) * (y[i] - target[i]);
    return l;
  };
  auto grads = [&]() {
    for (auto& p : net.params()) std::fill(p.grads->begin(), p.grads->end(), 0.0);
    const auto& y = net.forward(x);
    std::vector<double> dy(3);
    for (int i = 0; i < 3; ++i) dy[i] = 2.0 * (y[i] - target[i]);
    net.backward(dy);
  };
  check_gradients(loss, grads, net.params());
}

TEST_CASE("mlp input gradient agrees with central differences") {
  Rng rng(7);
  Mlp net({4, 6, 2}, {Activation::Relu, Activation::Identity});
  net.init_orthogonal(rng);
  std::vector<double> x(4);
  for (auto& v : x) v = rng.normal() + 0.3;

  const auto& y0 = net.forward(x);
  double base = y0[0] + 2.0 * y0[1];
  std::vector<double> dy = {1.0, 2.0};
  const auto dx = net.backward(dy);

  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    auto xp = x;
    xp[i] += h;
    const auto& yp = net.forward(xp);
    const double fd = (yp[0] + 2.0 * yp[1] - base) / h;
    CHECK(std::abs(fd - dx[i]) < 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("conv1d zero kernel with bias gives a constant map") {
  Conv1DLayer conv(2, 3, 3, 1, Activation::Identity);
  conv.b = {0.5, -1.0, 2.0};
  std::vector<double> x(2 * 8);
  Rng rng(3);
  for (auto& v : x) v = rng.normal();
  const auto& y = conv.forward(x, 8);
  const int lout = conv.output_length(8);
  CHECK(lout == 6);
  for (int o = 0; o < 3; ++o) {
    for (int j = 0; j < lout; ++j) CHECK(y[o * lout + j] == conv.b[o]);
  }
}

TEST_CASE("conv1d unit kernel is the identity map") {
  Conv1DLayer conv(1, 1, 1, 1, Activation::Identity);
  conv.w = {1.0};
  std::vector<double> x = {0.1, -0.7, 3.0, 0.0};
  const auto& y = conv.forward(x, 4);
  for (int i = 0; i < 4; ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("conv1d rejects sequences shorter than the kernel") {
  Conv1DLayer conv(1, 1, 5, 1, Activation::Identity);
  std::vector<double> x(3, 0.0);
  CHECK_THROWS_AS(conv.forward(x, 3), std::invalid_argument);
}

TEST_CASE("conv1d output length formula") {
  CHECK(Conv1DLayer::output_length(50, 8, 4) == 11);
  CHECK(Conv1DLayer::output_length(11, 5, 1) == 7);
  CHECK(Conv1DLayer::output_length(7, 5, 1) == 3);
}

TEST_CASE("conv1d gradients agree with central differences") {
  Rng rng(9);
  Conv1DLayer conv(2, 3, 3, 2, Activation::Tanh);
  conv.init_orthogonal(rng, 1.0);
  const int len = 9;
  std::vector<double> x(2 * len);
  for (auto& v : x) v = rng.normal();

  auto loss = [&]() {
    const auto& y = conv.forward(x, len);
    double l = 0.0;
    for (const double v : y) l += v * v;
    return l;
  };
  auto grads = [&]() {
    for (auto& p : conv.params()) std::fill(p.grads->begin(), p.grads->end(), 0.0);
    const auto& y = conv.forward(x, len);
    std::vector<double> dy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) dy[i] = 2.0 * y[i];
    conv.backward(dy);
  };
  check_gradients(loss, grads, conv.params());
}

TEST_CASE("gaussian head produces positive sigma and exact reparam gradients") {
  Rng rng(12);
  GaussianHead head(6, 4);
  head.init_orthogonal(rng, 1.0);
  std::vector<double> x(6);
  for (auto& v : x) v = rng.normal();

  head.forward(x);
  for (const double s : head.sigma()) CHECK(s > 0.0);

  std::vector<double> eps(4);
  for (auto& v : eps) v = rng.normal();
  std::vector<double> target(4);
  for (auto& v : target) v = rng.normal();

  auto loss = [&]() {
    head.forward(x);
    const auto z = gaussian_sample(head.mu(), head.sigma(), eps);
    double l = 0.0;
    for (int i = 0; i < 4; ++i) l += (z[i] - target[i]) * (z[i] - target[i]);
    return l;
  };
  auto grads = [&]() {
    for (auto& p : head.params()) std::fill(p.grads->begin(), p.grads->end(), 0.0);
    head.forward(x);
    const auto z = gaussian_sample(head.mu(), head.sigma(), eps);
    std::vector<double> dmu(4), dsigma(4);
    for (int i = 0; i < 4; ++i) {
      const double dz = 2.0 * (z[i] - target[i]);
      dmu[i] = dz;
      dsigma[i] = dz * eps[i];
    }
    head.backward(dmu, dsigma);
  };
  check_gradients(loss, grads, head.params());
}

TEST_CASE("gaussian_sample basics") {
  const std::vector<double> mu = {0.5, -1.0};
  const std::vector<double> sigma = {0.1, 2.0};
  const auto z = gaussian_sample(mu, sigma, {0.0, 0.0});
  CHECK(z[0] == mu[0]);
  CHECK(z[1] == mu[1]);

  const auto near_mu = gaussian_sample(mu, {1e-12, 1e-12}, {1.0, -1.0});
  CHECK(near_mu[0] == doctest::Approx(mu[0]).epsilon(1e-9));

  CHECK_THROWS_AS(gaussian_sample(mu, {0.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_sample(mu, {-1.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("gaussian sample statistics over 1e5 draws") {
  Rng rng(2024);
  double sum = 0.0, sumsq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto z = gaussian_sample({0.0}, {1.0}, {rng.normal()});
    sum += z[0];
    sumsq += z[0] * z[0];
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("gaussian_log_prob standard normal peak and symmetry") {
  CHECK(gaussian_log_prob({0.0}, {1.0}, {0.0}) == doctest::Approx(-0.9189385332).epsilon(1e-9));
  const double up = gaussian_log_prob({0.3}, {0.7}, {0.3 + 0.2});
  const double down = gaussian_log_prob({0.3}, {0.7}, {0.3 - 0.2});
  CHECK(up == doctest::Approx(down).epsilon(1e-12));

  std::vector<double> dmu = {0.0}, dsigma = {0.0};
  gaussian_log_prob_grad({0.3}, {0.7}, {0.3}, 1.0, &dmu, &dsigma);
  CHECK(dmu[0] == 0.0);  // stationary at the mean

  CHECK_THROWS_AS(gaussian_log_prob({0.0}, {0.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("kl_to_standard_normal is zero only at the prior") {
  CHECK(kl_to_standard_normal({0.0, 0.0}, {1.0, 1.0}) == 0.0);
  CHECK(kl_to_standard_normal({1.0}, {1.0}) == doctest::Approx(0.5));
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> mu = {rng.normal()};
    const std::vector<double> sigma = {std::exp(rng.normal() * 0.5)};
    CHECK(kl_to_standard_normal(mu, sigma) >= 0.0);
  }
}

TEST_CASE("adam leaves params alone under zero gradient") {
  DenseLayer layer(2, 2, Activation::Identity);
  Rng rng(4);
  layer.init_orthogonal(rng, 1.0);
  const auto before = layer.w;
  Adam adam(layer.params(), {});
  adam.zero_grad();
  adam.step();
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(layer.w[i] == before[i]);
}

TEST_CASE("adam first step moves by about lr under constant gradient") {
  std::vector<double> w = {1.0};
  std::vector<double> g = {0.3};
  Adam adam({{&w, &g}}, {.lr = 1e-3});
  adam.step();
  // Bias-corrected first step: -lr * g / (|g| + eps) = -lr * sign(g).
  CHECK(w[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
}

TEST_CASE("adam training runs are deterministic") {
  auto run = [] {
    Rng rng(77);
    Mlp net({3, 8, 1}, {Activation::Tanh, Activation::Identity});
    net.init_orthogonal(rng);
    Adam adam(net.params(), {.lr = 1e-2});
    std::vector<double> x = {0.2, -0.4, 1.0};
    for (int it = 0; it < 50; ++it) {
      adam.zero_grad();
      const auto& y = net.forward(x);
      net.backward({2.0 * (y[0] - 0.7)});
      adam.step();
    }
    return net.forward(x)[0];
  };
  CHECK(run() == run());
}

TEST_CASE("orthogonal init gives orthonormal rows scaled by gain") {
  Rng rng(13);
  DenseLayer layer(16, 8, Activation::Relu);
  const double gain = std::sqrt(2.0);
  layer.init_orthogonal(rng, gain);
  Eigen::MatrixXd w(8, 16);
  for (int o = 0; o < 8; ++o)
    for (int i = 0; i < 16; ++i) w(o, i) = layer.w[o * 16 + i];
  const Eigen::MatrixXd gram = w * w.transpose();
  CHECK((gram - gain * gain * Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-9);
}

TEST_CASE("checkpoint round trip is bit exact and validated") {
  Rng rng(55);
  Mlp net({4, 6, 2}, {Activation::Tanh, Activation::Identity});
  net.init_orthogonal(rng);
  const auto path =
      (std::filesystem::temp_directory_path() / "hinge_rl_ckpt_test.bin").string();
  save_checkpoint_file(path, "test-net", net.params());
  const std::uint64_t before = param_checksum(net.params());

  Mlp other({4, 6, 2}, {Activation::Tanh, Activation::Identity});
  load_checkpoint_file(path, "test-net", other.params());
  CHECK(param_checksum(other.params()) == before);

  CHECK_THROWS(load_checkpoint_file(path, "different-descriptor", other.params()));
  Mlp wrong({4, 7, 2}, {Activation::Tanh, Activation::Identity});
  CHECK_THROWS(load_checkpoint_file(path, "test-net", wrong.params()));
  std::filesystem::remove(path);
}
