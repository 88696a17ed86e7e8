#include "roughstop/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "roughstop/error.hpp"
#include "roughstop/rng.hpp"

namespace roughstop {

MlpNetwork::MlpNetwork(std::size_t inputs, std::size_t hidden1, std::size_t hidden2)
    : inputs_(inputs), h1_(hidden1), h2_(hidden2),
      params_(hidden1 * inputs + hidden1 + hidden2 * hidden1 + hidden2 + hidden2 + 1, 0.0) {}

void MlpNetwork::initialize(std::uint64_t seed) {
  NormalStream normal(seed, 0x6d6c70ULL);
  double* p = params_.data();
  auto fill = [&](std::size_t fan_in, std::size_t fan_out) {
    const double sd = std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) *p++ = sd * normal();
    for (std::size_t i = 0; i < fan_out; ++i) *p++ = 0.0;
  };
  fill(inputs_, h1_);
  fill(h1_, h2_);
  fill(h2_, 1);
}

double MlpNetwork::forward(std::span<const double> x) const {
  const double* w1 = params_.data();
  const double* b1 = w1 + h1_ * inputs_;
  const double* w2 = b1 + h1_;
  const double* b2 = w2 + h2_ * h1_;
  const double* w3 = b2 + h2_;
  const double b3 = w3[h2_];
  std::vector<double> a1(h1_);
  for (std::size_t j = 0; j < h1_; ++j) {
    double z = b1[j];
    for (std::size_t i = 0; i < inputs_; ++i) z += w1[j * inputs_ + i] * x[i];
    a1[j] = std::tanh(z);
  }
  double out = b3;
  for (std::size_t k = 0; k < h2_; ++k) {
    double z = b2[k];
    for (std::size_t j = 0; j < h1_; ++j) z += w2[k * h1_ + j] * a1[j];
    out += w3[k] * std::tanh(z);
  }
  return out;
}

double MlpNetwork::loss_and_gradient(const Matrix& x, std::span<const double> y,
                                     std::span<double> grad) const {
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return loss_and_gradient(x, y, rows, grad);
}

double MlpNetwork::loss_and_gradient(const Matrix& x, std::span<const double> y,
                                     std::span<const std::size_t> rows, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  const double* w1 = params_.data();
  const double* b1 = w1 + h1_ * inputs_;
  const double* w2 = b1 + h1_;
  const double* b2 = w2 + h2_ * h1_;
  const double* w3 = b2 + h2_;
  const double b3 = w3[h2_];
  double* gw1 = grad.data();
  double* gb1 = gw1 + h1_ * inputs_;
  double* gw2 = gb1 + h1_;
  double* gb2 = gw2 + h2_ * h1_;
  double* gw3 = gb2 + h2_;
  double* gb3 = gw3 + h2_;

  std::vector<double> a1(h1_);
  std::vector<double> a2(h2_);
  std::vector<double> d1(h1_);
  const double scale = 2.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  for (auto r : rows) {
    const auto xr = x.row(r);
    for (std::size_t j = 0; j < h1_; ++j) {
      double z = b1[j];
      for (std::size_t i = 0; i < inputs_; ++i) z += w1[j * inputs_ + i] * xr[i];
      a1[j] = std::tanh(z);
    }
    double out = b3;
    for (std::size_t k = 0; k < h2_; ++k) {
      double z = b2[k];
      for (std::size_t j = 0; j < h1_; ++j) z += w2[k * h1_ + j] * a1[j];
      a2[k] = std::tanh(z);
      out += w3[k] * a2[k];
    }
    const double err = out - y[r];
    loss += err * err;

    const double g_out = scale * err;
    *gb3 += g_out;
    std::fill(d1.begin(), d1.end(), 0.0);
    for (std::size_t k = 0; k < h2_; ++k) {
      gw3[k] += g_out * a2[k];
      const double d2 = g_out * w3[k] * (1.0 - a2[k] * a2[k]);
      gb2[k] += d2;
      for (std::size_t j = 0; j < h1_; ++j) {
        gw2[k * h1_ + j] += d2 * a1[j];
        d1[j] += d2 * w2[k * h1_ + j];
      }
    }
    for (std::size_t j = 0; j < h1_; ++j) {
      const double dz = d1[j] * (1.0 - a1[j] * a1[j]);
      gb1[j] += dz;
      for (std::size_t i = 0; i < inputs_; ++i) gw1[j * inputs_ + i] += dz * xr[i];
    }
  }
  return loss / static_cast<double>(rows.size());
}

double MlpModel::predict(std::span<const double> x) const {
  if (target_scale == 0.0) return target_mean;
  std::vector<double> z(x.size());
  inputs.apply(x, z);
  return target_mean + target_scale * network.forward(z);
}

MlpModel deep_mlp_fit(const Matrix& features, std::span<const double> targets, const MlpConfig& config) {
  if (features.rows() != targets.size()) {
    throw Error(ErrorCode::ShapeMismatch, "feature rows and targets differ");
  }
  if (features.rows() < 1) throw Error(ErrorCode::InsufficientData, "MLP needs at least one row");
  if (config.hidden1 < 1 || config.hidden2 < 1 || config.batch_size < 1 || !(config.learning_rate > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "MLP needs positive widths, batch size and step");
  }
  const std::size_t n = features.rows();
  MlpModel model;
  model.inputs = Standardizer::fit(features);
  model.network = MlpNetwork(features.cols(), config.hidden1, config.hidden2);
  model.network.initialize(config.seed);

  model.target_mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double t : targets) var += (t - model.target_mean) * (t - model.target_mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  if (!std::isfinite(sd)) throw Error(ErrorCode::NonFiniteLoss, "non-finite MLP targets");
  if (!(sd > 1e-12 * std::max(1.0, std::abs(model.target_mean)))) {
    model.target_scale = 0.0;
    return model;
  }
  model.target_scale = sd;

  const Matrix x = model.inputs.apply(features);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = (targets[i] - model.target_mean) / sd;

  const std::size_t p = model.network.parameter_count();
  std::vector<double> grad(p);
  std::vector<double> m1(p, 0.0);
  std::vector<double> m2(p, 0.0);
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  std::size_t step = 0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 gen(substream_seed(config.seed, 0x73687566ULL));
  auto params = model.network.parameters();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[gen() % i]);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      const double loss = model.network.loss_and_gradient(x, y, batch, grad);
      if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, "MLP training diverged");
      ++step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < p; ++k) {
        m1[k] = beta1 * m1[k] + (1.0 - beta1) * grad[k];
        m2[k] = beta2 * m2[k] + (1.0 - beta2) * grad[k] * grad[k];
        params[k] -= config.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + eps);
      }
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = model.network.forward(x.row(i)) - y[i];
      loss += e * e;
    }
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, "MLP training diverged");
    model.loss_trace.push_back(loss);
  }
  return model;
}

}  // namespace roughstop
