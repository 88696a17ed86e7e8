#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roughstop/engines.hpp"
#include "roughstop/kernels.hpp"
#include "roughstop/market_data.hpp"
#include "roughstop/mlp.hpp"
#include "roughstop/signatures.hpp"

namespace roughstop {

double payoff(double x, double strike, OptionType type);

// Exercise dates as indices into the simulation grid.
struct ExerciseGrid {
  std::vector<std::size_t> indices;  // strictly increasing, last == steps
  std::vector<double> times;         // years

  // Every simulation date t_0 .. t_N.
  static ExerciseGrid daily(const PathEnsemble& ensemble);
  // Exercise at maturity only.
  static ExerciseGrid terminal(const PathEnsemble& ensemble);
  static ExerciseGrid from_indices(const PathEnsemble& ensemble, std::vector<std::size_t> indices);

  // Start of the martingale: index 0 followed by the exercise dates.
  [[nodiscard]] std::vector<std::size_t> control_points() const;
};

enum class RegressorKind { LinearSignature, ExtendedLinearSignature, DeepLogSignature, DeepKernelRff };

std::string_view to_string(RegressorKind kind) noexcept;     // linear, extended, deeplog, deepkernel
std::string_view display_name(RegressorKind kind) noexcept;  // "Linear Signature", ...
RegressorKind parse_regressor(std::string_view name);
std::vector<RegressorKind> all_regressors();

struct FeatureConfig {
  std::size_t rff_dim = 128;
  std::optional<double> rff_gamma;  // median heuristic when unset
  std::uint64_t seed = 0;
};

// Regression inputs for one exercise date, fitted on training signatures:
//   linear     raw signature coordinates
//   extended   raw coordinates plus products of level-1 pairs (i <= j)
//   deeplog    log-signature coordinates
//   deepkernel standardised signature -> random Fourier features
class SliceFeatures {
 public:
  static SliceFeatures fit(RegressorKind kind, const Matrix& signatures, std::size_t channels,
                           const FeatureConfig& config, std::uint64_t slice_seed);

  [[nodiscard]] RegressorKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] const RffMap& rff() const noexcept { return rff_; }
  void transform(std::span<const double> signature, std::span<double> out) const;
  [[nodiscard]] Matrix transform(const Matrix& signatures) const;

 private:
  RegressorKind kind_ = RegressorKind::LinearSignature;
  std::size_t channels_ = 0;
  std::size_t dim_ = 0;
  Standardizer standardizer_;
  RffMap rff_;
};

struct ContinuationModel {
  enum class Form { Constant, Ridge, Mlp };

  Form form = Form::Constant;
  double constant = 0.0;
  SliceFeatures features;
  RidgeModel ridge;
  MlpModel mlp;

  [[nodiscard]] double predict(std::span<const double> signature) const;
  static ContinuationModel always(double value);
};

struct PrimalConfig {
  double linear_lambda = 1e-6;  // linear and extended bases
  double kernel_lambda = 1e-3;  // ridge on random features
  std::size_t min_itm = 32;     // below this, regress on all paths
  MlpConfig mlp;
  FeatureConfig features;
};

// Stopping rule: one continuation model per exercise date except the last.
struct PrimalModel {
  RegressorKind kind = RegressorKind::LinearSignature;
  ExerciseGrid grid;
  std::vector<ContinuationModel> slices;
  std::vector<std::size_t> degenerate_slices;  // no in-the-money paths: never exercise there
  std::vector<std::size_t> mlp_fallbacks;      // diverged MLP replaced by the linear basis
};

struct OptionSpec {
  double strike = 100.0;
  OptionType type = OptionType::Put;
  double r = 0.045;
};

// signatures[k] holds the per-path signature at grid.indices[k].
PrimalModel fit_continuation(const PathEnsemble& train, std::span<const Matrix> signatures,
                             const ExerciseGrid& grid, RegressorKind kind, const OptionSpec& option,
                             const PrimalConfig& config = {});

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

// Exercise at the first date where payoff > 0 and the discounted payoff is
// at least the predicted continuation; always at maturity if in the money.
Estimate lower_bound(const PathEnsemble& eval, std::span<const Matrix> signatures,
                     const PrimalModel& model, const OptionSpec& option);

struct DualConfig {
  std::size_t iterations = 200;
  double step_scale = 0.5;  // step k is step_scale * objective(0) / sqrt(k)
};

// M_{t_i} = sum over control intervals before t_i of
// (coefficients_j . [1, z_j]) * dW over the interval, z_j the slice features.
struct MartingaleControl {
  RegressorKind kind = RegressorKind::LinearSignature;
  std::vector<std::size_t> points;  // control points (simulation indices)
  std::vector<SliceFeatures> features;  // one per interval
  std::vector<Standardizer> scaling;    // applied to features before the coefficients
  std::vector<std::vector<double>> coefficients;  // per interval, 1 + feature dim
  std::vector<double> objective_trace;  // training objective per iterate, starting at zero control
  double zero_objective = 0.0;
  double best_objective = 0.0;

  static MartingaleControl zero(const ExerciseGrid& grid);
};

// signatures[k] holds the per-path signature at grid.control_points()[k].
MartingaleControl fit_martingale_control(const PathEnsemble& train, std::span<const Matrix> signatures,
                                         const ExerciseGrid& grid, RegressorKind kind,
                                         const OptionSpec& option, const DualConfig& dual = {},
                                         const FeatureConfig& features = {});

Estimate dual_upper_bound(const PathEnsemble& eval, std::span<const Matrix> signatures,
                          const MartingaleControl& control, const ExerciseGrid& grid,
                          const OptionSpec& option);

// Per-path martingale values at each exercise date (paths x exercise dates).
Matrix martingale_values(const PathEnsemble& paths, std::span<const Matrix> signatures,
                         const MartingaleControl& control, const ExerciseGrid& grid);

enum class PremiumStatus { Within, Outside };

std::string_view to_string(PremiumStatus s) noexcept;

struct PriceBounds {
  double lower = 0.0;
  double lower_se = 0.0;
  double upper = 0.0;
  double upper_se = 0.0;
  double gap = 0.0;
  std::optional<double> gap_pct;  // gap / lower, as a fraction
  PremiumStatus premium_status = PremiumStatus::Outside;
};

PriceBounds make_bounds(Estimate lower, Estimate upper, double premium);

struct Ensembles {
  PathEnsemble primal_train;
  PathEnsemble dual_train;
  PathEnsemble evaluation;
};

struct PricingConfig {
  ChannelSet channels;
  PrimalConfig primal;
  DualConfig dual;
};

struct VariantResult {
  RegressorKind kind = RegressorKind::LinearSignature;
  PriceBounds bounds;
  double zero_control_upper = 0.0;
  double dual_training_objective = 0.0;
  double dual_zero_objective = 0.0;
  std::vector<std::size_t> degenerate_slices;
  std::vector<std::size_t> mlp_fallbacks;
};

// Runs each requested variant on the same three ensembles and grid.
std::vector<VariantResult> price_with_all_variants(const Ensembles& ensembles, const ExerciseGrid& grid,
                                                   const OptionSpec& option, double premium,
                                                   std::span<const RegressorKind> kinds,
                                                   const PricingConfig& config);

}  // namespace roughstop
