#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "roughstop/matrix.hpp"

namespace roughstop {

// exp(-gamma * |x - y|^2)
double rbf(std::span<const double> x, std::span<const double> y, double gamma);

struct RffMap {
  Matrix projection;  // m x D, entries N(0, 2 gamma)
  double gamma = 1.0;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t input_dim() const noexcept { return projection.rows(); }
  [[nodiscard]] std::size_t frequencies() const noexcept { return projection.cols(); }
  [[nodiscard]] std::size_t embedding_dim() const noexcept { return 2 * projection.cols(); }
};

struct RffEmbedding {
  std::vector<double> features;  // sqrt(1/D) [cos(W'x), sin(W'x)], unit norm
};

RffMap sample_rff(std::size_t m, std::size_t frequencies, double gamma, std::uint64_t seed);
RffEmbedding rff_embed(std::span<const double> x, const RffMap& map);
void rff_embed(std::span<const double> x, const RffMap& map, std::span<double> out);
Matrix rff_embed_rows(const Matrix& x, const RffMap& map);

// gamma = 1 / (2 median^2) of pairwise distances over a seeded subset of
// at most `subset` rows. Falls back to 1 when every sampled row coincides.
double median_heuristic_gamma(const Matrix& x, std::uint64_t seed, std::size_t subset = 256);

// Per-column centring and scaling captured at fit time. Columns with no
// spread get scale 0 and map to 0.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> scales;

  static Standardizer fit(const Matrix& x);
  void apply(std::span<const double> in, std::span<double> out) const;
  [[nodiscard]] Matrix apply(const Matrix& x) const;
  [[nodiscard]] bool active(std::size_t column) const { return scales[column] > 0.0; }
};

// Ridge regression on standardised features with an unpenalised intercept:
// prediction = intercept + weights . standardised(x).
struct RidgeModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;
  Standardizer standardizer;

  [[nodiscard]] double predict(std::span<const double> x) const;
};

// Solves the normal equations (Z'Z + lambda I) w = Z'(y - mean y). Throws
// SingularSystem when lambda == 0 and the active columns are rank-deficient.
RidgeModel ridge_fit(const Matrix& features, std::span<const double> targets, double lambda);

}  // namespace roughstop
