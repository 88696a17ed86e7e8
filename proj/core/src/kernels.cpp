#include "roughstop/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "roughstop/error.hpp"
#include "roughstop/parallel.hpp"
#include "roughstop/rng.hpp"

namespace roughstop {

double rbf(std::span<const double> x, std::span<const double> y, double gamma) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "rbf inputs differ in length");
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidParams, "rbf bandwidth must be >= 0");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
  return std::exp(-gamma * d2);
}

RffMap sample_rff(std::size_t m, std::size_t frequencies, double gamma, std::uint64_t seed) {
  if (m < 1 || frequencies < 1 || !(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::InvalidParams, "RFF needs m >= 1, D >= 1, gamma > 0");
  }
  RffMap map;
  map.gamma = gamma;
  map.seed = seed;
  map.projection = Matrix(m, frequencies);
  NormalStream normal(seed, 0);
  const double sd = std::sqrt(2.0 * gamma);
  for (auto& w : map.projection.storage()) w = sd * normal();
  return map;
}

void rff_embed(std::span<const double> x, const RffMap& map, std::span<double> out) {
  if (x.size() != map.input_dim()) {
    throw Error(ErrorCode::LengthMismatch, "RFF input has " + std::to_string(x.size()) +
                                               " coordinates, map expects " +
                                               std::to_string(map.input_dim()));
  }
  const std::size_t D = map.frequencies();
  std::vector<double> proj(D, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const auto row = map.projection.row(i);
    for (std::size_t j = 0; j < D; ++j) proj[j] += row[j] * xi;
  }
  const double norm = std::sqrt(1.0 / static_cast<double>(D));
  for (std::size_t j = 0; j < D; ++j) {
    out[j] = norm * std::cos(proj[j]);
    out[D + j] = norm * std::sin(proj[j]);
  }
}

RffEmbedding rff_embed(std::span<const double> x, const RffMap& map) {
  RffEmbedding e{std::vector<double>(map.embedding_dim())};
  rff_embed(x, map, e.features);
  return e;
}

Matrix rff_embed_rows(const Matrix& x, const RffMap& map) {
  Matrix out(x.rows(), map.embedding_dim());
  parallel_for(x.rows(), [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) rff_embed(x.row(r), map, out.row(r));
  });
  return out;
}

double median_heuristic_gamma(const Matrix& x, std::uint64_t seed, std::size_t subset) {
  if (x.rows() < 2) return 1.0;
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (idx.size() > subset) {
    std::mt19937_64 gen(substream_seed(seed, 0x6d656469616eULL));
    // Partial Fisher-Yates; written out so the choice does not depend on the
    // standard library's shuffle.
    for (std::size_t i = 0; i < subset; ++i) {
      const std::size_t j = i + gen() % (idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(subset);
  }
  std::vector<double> dist;
  dist.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      double d2 = 0.0;
      const auto ra = x.row(idx[a]);
      const auto rb = x.row(idx[b]);
      for (std::size_t c = 0; c < x.cols(); ++c) d2 += (ra[c] - rb[c]) * (ra[c] - rb[c]);
      dist.push_back(std::sqrt(d2));
    }
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  if (!(median > 0.0)) return 1.0;
  return 1.0 / (2.0 * median * median);
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const std::size_t n = x.rows();
  s.means.assign(x.cols(), 0.0);
  s.scales.assign(x.cols(), 0.0);
  if (n == 0) return s;
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols(); ++c) s.means[c] += row[c];
  }
  for (auto& m : s.means) m /= static_cast<double>(n);
  std::vector<double> var(x.cols(), 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double d = row[c] - s.means[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(n));
    s.scales[c] = sd > 1e-12 * std::max(1.0, std::abs(s.means[c])) ? sd : 0.0;
  }
  return s;
}

void Standardizer::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t c = 0; c < means.size(); ++c) {
    out[c] = scales[c] > 0.0 ? (in[c] - means[c]) / scales[c] : 0.0;
  }
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) apply(x.row(r), out.row(r));
  return out;
}

double RidgeModel::predict(std::span<const double> x) const {
  double y = intercept;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    if (standardizer.scales[c] > 0.0) {
      y += weights[c] * (x[c] - standardizer.means[c]) / standardizer.scales[c];
    }
  }
  return y;
}

RidgeModel ridge_fit(const Matrix& features, std::span<const double> targets, double lambda) {
  if (features.rows() != targets.size()) {
    throw Error(ErrorCode::ShapeMismatch, "feature rows and targets differ");
  }
  if (features.rows() < 1) throw Error(ErrorCode::InsufficientData, "ridge needs at least one row");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidParams, "ridge lambda must be >= 0");

  RidgeModel model;
  model.lambda = lambda;
  model.standardizer = Standardizer::fit(features);
  model.weights.assign(features.cols(), 0.0);
  const std::size_t n = features.rows();
  model.intercept = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);

  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < features.cols(); ++c) {
    if (model.standardizer.active(c)) active.push_back(c);
  }
  if (active.empty()) return model;

  const auto p = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), p);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = features.row(r);
    for (Eigen::Index k = 0; k < p; ++k) {
      const auto c = active[static_cast<std::size_t>(k)];
      z(static_cast<Eigen::Index>(r), k) =
          (row[c] - model.standardizer.means[c]) / model.standardizer.scales[c];
    }
    y(static_cast<Eigen::Index>(r)) = targets[r] - model.intercept;
  }
  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = z.transpose() * y;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const auto d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  const bool singular = lambda == 0.0 && !(d.minCoeff() > 1e-12 * dmax);
  if (ldlt.info() != Eigen::Success || singular) {
    throw Error(ErrorCode::SingularSystem, "normal equations are rank-deficient");
  }
  const Eigen::VectorXd w = ldlt.solve(rhs);
  for (Eigen::Index k = 0; k < p; ++k) {
    if (!std::isfinite(w(k))) throw Error(ErrorCode::SingularSystem, "non-finite ridge solution");
    model.weights[active[static_cast<std::size_t>(k)]] = w(k);
  }
  return model;
}

}  // namespace roughstop
