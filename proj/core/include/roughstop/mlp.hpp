#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "roughstop/kernels.hpp"
#include "roughstop/matrix.hpp"

namespace roughstop {

struct MlpConfig {
  std::size_t hidden1 = 32;
  std::size_t hidden2 = 32;
  std::size_t epochs = 20;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;  // Adam step
  std::uint64_t seed = 7;
};

// input -> tanh(hidden1) -> tanh(hidden2) -> linear scalar output.
// Parameters are stored flat: W1, b1, W2, b2, w3, b3 (weights row-major by
// output unit).
class MlpNetwork {
 public:
  MlpNetwork() = default;
  MlpNetwork(std::size_t inputs, std::size_t hidden1, std::size_t hidden2);

  // Glorot-normal weights, zero biases.
  void initialize(std::uint64_t seed);

  [[nodiscard]] std::size_t inputs() const noexcept { return inputs_; }
  [[nodiscard]] std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> parameters() noexcept { return params_; }
  [[nodiscard]] std::span<const double> parameters() const noexcept { return params_; }

  [[nodiscard]] double forward(std::span<const double> x) const;

  // Mean squared error over the rows, and its gradient w.r.t. parameters()
  // written into grad (which must have parameter_count() entries).
  double loss_and_gradient(const Matrix& x, std::span<const double> y, std::span<double> grad) const;
  double loss_and_gradient(const Matrix& x, std::span<const double> y,
                           std::span<const std::size_t> rows, std::span<double> grad) const;

 private:
  std::size_t inputs_ = 0;
  std::size_t h1_ = 0;
  std::size_t h2_ = 0;
  std::vector<double> params_;
};

// Network plus the input/target scaling captured at fit time.
struct MlpModel {
  MlpNetwork network;
  Standardizer inputs;
  double target_mean = 0.0;
  double target_scale = 1.0;  // 0 means a constant predictor
  std::vector<double> loss_trace;  // full-data training loss after each epoch

  [[nodiscard]] double predict(std::span<const double> x) const;
};

// Mini-batch Adam on squared error with a fixed epoch budget. Throws
// NonFiniteLoss if training diverges.
MlpModel deep_mlp_fit(const Matrix& features, std::span<const double> targets, const MlpConfig& config);

}  // namespace roughstop
