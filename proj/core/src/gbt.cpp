#include "roughstop/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "roughstop/error.hpp"

namespace roughstop {

double RegressionTree::predict(std::span<const double> x) const {
  if (nodes_.empty()) return 0.0;
  int i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack;
  if (!nodes_.empty()) stack.emplace_back(0, 0);
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes_[i].is_leaf()) {
      stack.emplace_back(nodes_[i].left, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return best;
}

double GbtModel::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return base_prediction + learning_rate * sum;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t left_count = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> residual, const GbtConfig& config)
      : x_(x), residual_(residual), config_(config) {}

  RegressionTree build() {
    std::vector<std::size_t> all(x_.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    grow(all, 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  int grow(std::vector<std::size_t>& idx, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    double sum = 0.0;
    for (auto i : idx) sum += residual_[i];
    const double mean = sum / static_cast<double>(idx.size());

    Split best;
    if (depth < config_.max_depth && idx.size() >= 2 * config_.min_samples_leaf) {
      best = find_split(idx, sum);
    }
    if (best.feature < 0) {
      nodes_[id].value = mean;
      return id;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto i : idx) {
      (x_(i, static_cast<std::size_t>(best.feature)) < best.threshold ? left : right).push_back(i);
    }
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  Split find_split(const std::vector<std::size_t>& idx, double total) const {
    const std::size_t n = idx.size();
    const double parent = total * total / static_cast<double>(n);
    double ss = 0.0;
    for (auto i : idx) ss += residual_[i] * residual_[i];
    // Gains below this are rounding noise on an already-fitted node.
    const double min_gain = 1e-12 * ss;

    Split best;
    std::vector<std::size_t> order(idx);
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x_(a, f) < x_(b, f); });
      double left_sum = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        left_sum += residual_[order[k - 1]];
        if (k < config_.min_samples_leaf || n - k < config_.min_samples_leaf) continue;
        const double lo = x_(order[k - 1], f);
        const double hi = x_(order[k], f);
        if (!(lo < hi)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(k) +
                            right_sum * right_sum / static_cast<double>(n - k) - parent;
        if (gain > min_gain && gain > best.gain) {
          double mid = lo + 0.5 * (hi - lo);
          if (!(mid > lo)) mid = hi;
          best = Split{static_cast<int>(f), mid, gain, k};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const double> residual_;
  const GbtConfig& config_;
  std::vector<TreeNode> nodes_;
};

double mse(std::span<const double> targets, std::span<const double> fitted) {
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double e = targets[i] - fitted[i];
    s += e * e;
  }
  return s / static_cast<double>(targets.size());
}

}  // namespace

GbtModel fit_gbt(const Matrix& features, std::span<const double> targets, const GbtConfig& config) {
  if (features.rows() != targets.size()) {
    throw Error(ErrorCode::ShapeMismatch, "feature rows and targets differ");
  }
  if (config.max_depth < 1 || config.learning_rate <= 0.0 || config.min_samples_leaf < 1) {
    throw Error(ErrorCode::InvalidParams, "GBT needs depth >= 1, learning rate > 0");
  }
  const std::size_t needed = 2 * (std::size_t{1} << config.max_depth);
  if (targets.size() < needed) {
    throw Error(ErrorCode::InsufficientData, std::to_string(targets.size()) + " rows, need " +
                                                 std::to_string(needed));
  }
  for (double v : features.storage()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "non-finite feature");
  }
  for (double v : targets) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "non-finite target");
  }

  GbtModel model;
  model.learning_rate = config.learning_rate;
  model.max_depth = config.max_depth;
  const bool constant = std::all_of(targets.begin(), targets.end(),
                                    [&](double t) { return t == targets.front(); });
  model.base_prediction =
      constant ? targets.front()
               : std::accumulate(targets.begin(), targets.end(), 0.0) /
                     static_cast<double>(targets.size());

  const std::size_t n = targets.size();
  std::vector<double> fitted(n, model.base_prediction);
  std::vector<double> residual(n);
  model.training_mse.push_back(mse(targets, fitted));
  model.trees.reserve(config.rounds);
  for (std::size_t round = 0; round < config.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = targets[i] - fitted[i];
    auto tree = TreeBuilder(features, residual, config).build();
    for (std::size_t i = 0; i < n; ++i) fitted[i] += config.learning_rate * tree.predict(features.row(i));
    model.trees.push_back(std::move(tree));
    model.training_mse.push_back(mse(targets, fitted));
  }
  return model;
}

}  // namespace roughstop
