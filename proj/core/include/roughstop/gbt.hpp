#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "roughstop/matrix.hpp"

namespace roughstop {

struct GbtConfig {
  std::size_t rounds = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  std::size_t min_samples_leaf = 2;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] < threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;

  [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  [[nodiscard]] double predict(std::span<const double> x) const;
  [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::size_t depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

// Least-squares gradient boosting. prediction(x) = base_prediction +
// learning_rate * sum of tree leaves.
struct GbtModel {
  std::vector<RegressionTree> trees;
  double learning_rate = 0.1;
  double base_prediction = 0.0;
  std::size_t max_depth = 3;
  std::vector<double> training_mse;  // before the first tree, then after each round

  [[nodiscard]] double predict(std::span<const double> x) const;
};

// Exact greedy splits at midpoints between sorted unique feature values.
// Requires rows >= 2 * 2^max_depth.
GbtModel fit_gbt(const Matrix& features, std::span<const double> targets, const GbtConfig& config);

}  // namespace roughstop
