#include "roughstop/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "roughstop/error.hpp"
#include "roughstop/parallel.hpp"
#include "roughstop/rng.hpp"

namespace roughstop {

double payoff(double x, double strike, OptionType type) {
  return type == OptionType::Put ? std::max(strike - x, 0.0) : std::max(x - strike, 0.0);
}

ExerciseGrid ExerciseGrid::from_indices(const PathEnsemble& ensemble, std::vector<std::size_t> indices) {
  if (indices.empty()) throw Error(ErrorCode::InvalidParams, "exercise grid is empty");
  for (std::size_t k = 1; k < indices.size(); ++k) {
    if (indices[k] <= indices[k - 1]) throw Error(ErrorCode::InvalidParams, "exercise grid must increase");
  }
  if (indices.back() != ensemble.steps()) {
    throw Error(ErrorCode::InvalidParams, "last exercise date must be maturity");
  }
  ExerciseGrid g;
  g.indices = std::move(indices);
  for (auto i : g.indices) g.times.push_back(ensemble.grid[i]);
  return g;
}

ExerciseGrid ExerciseGrid::daily(const PathEnsemble& ensemble) {
  std::vector<std::size_t> idx(ensemble.steps() + 1);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return from_indices(ensemble, std::move(idx));
}

ExerciseGrid ExerciseGrid::terminal(const PathEnsemble& ensemble) {
  return from_indices(ensemble, {ensemble.steps()});
}

std::vector<std::size_t> ExerciseGrid::control_points() const {
  std::vector<std::size_t> points;
  if (indices.empty() || indices.front() != 0) points.push_back(0);
  points.insert(points.end(), indices.begin(), indices.end());
  return points;
}

std::string_view to_string(RegressorKind kind) noexcept {
  switch (kind) {
    case RegressorKind::LinearSignature: return "linear";
    case RegressorKind::ExtendedLinearSignature: return "extended";
    case RegressorKind::DeepLogSignature: return "deeplog";
    case RegressorKind::DeepKernelRff: return "deepkernel";
  }
  return "?";
}

std::string_view display_name(RegressorKind kind) noexcept {
  switch (kind) {
    case RegressorKind::LinearSignature: return "Linear Signature";
    case RegressorKind::ExtendedLinearSignature: return "Extended Linear Signature";
    case RegressorKind::DeepLogSignature: return "Deep Log-Signature";
    case RegressorKind::DeepKernelRff: return "Deep Kernel Method";
  }
  return "?";
}

RegressorKind parse_regressor(std::string_view name) {
  for (auto k : all_regressors()) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown regressor '" + std::string(name) + "'");
}

std::vector<RegressorKind> all_regressors() {
  return {RegressorKind::LinearSignature, RegressorKind::ExtendedLinearSignature,
          RegressorKind::DeepLogSignature, RegressorKind::DeepKernelRff};
}

// ---------------------------------------------------------------------------
// Features

SliceFeatures SliceFeatures::fit(RegressorKind kind, const Matrix& signatures, std::size_t channels,
                                 const FeatureConfig& config, std::uint64_t slice_seed) {
  SliceFeatures f;
  f.kind_ = kind;
  f.channels_ = channels;
  const std::size_t m = signature_size(channels);
  if (signatures.cols() != m) {
    throw Error(ErrorCode::ShapeMismatch, "signature width does not match the channel count");
  }
  switch (kind) {
    case RegressorKind::LinearSignature:
    case RegressorKind::DeepLogSignature:
      f.dim_ = m;
      break;
    case RegressorKind::ExtendedLinearSignature:
      f.dim_ = m + channels * (channels + 1) / 2;
      break;
    case RegressorKind::DeepKernelRff: {
      f.standardizer_ = Standardizer::fit(signatures);
      const Matrix z = f.standardizer_.apply(signatures);
      const double gamma =
          config.rff_gamma ? *config.rff_gamma : median_heuristic_gamma(z, slice_seed);
      f.rff_ = sample_rff(m, config.rff_dim, gamma, substream_seed(config.seed, slice_seed));
      f.dim_ = f.rff_.embedding_dim();
      break;
    }
  }
  return f;
}

void SliceFeatures::transform(std::span<const double> sig, std::span<double> out) const {
  const std::size_t d = channels_;
  const std::size_t m = signature_size(d);
  switch (kind_) {
    case RegressorKind::LinearSignature:
      std::copy(sig.begin(), sig.end(), out.begin());
      break;
    case RegressorKind::ExtendedLinearSignature: {
      std::copy(sig.begin(), sig.end(), out.begin());
      std::size_t k = m;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) out[k++] = sig[1 + i] * sig[1 + j];
      }
      break;
    }
    case RegressorKind::DeepLogSignature: {
      SignatureVector s{std::vector<double>(sig.begin(), sig.end()), d};
      const auto log_sig = log_signature(s);
      std::copy(log_sig.coords.begin(), log_sig.coords.end(), out.begin());
      break;
    }
    case RegressorKind::DeepKernelRff: {
      std::vector<double> z(m);
      standardizer_.apply(sig, z);
      rff_embed(z, rff_, out);
      break;
    }
  }
}

Matrix SliceFeatures::transform(const Matrix& signatures) const {
  Matrix out(signatures.rows(), dim_);
  parallel_for(signatures.rows(), [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) transform(signatures.row(r), out.row(r));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Primal

namespace {

double predict_transformed(const ContinuationModel& model, std::span<const double> features) {
  switch (model.form) {
    case ContinuationModel::Form::Constant: return model.constant;
    case ContinuationModel::Form::Ridge: return model.ridge.predict(features);
    case ContinuationModel::Form::Mlp: return model.mlp.predict(features);
  }
  return model.constant;
}

std::vector<double> discount_factors(const ExerciseGrid& grid, double r) {
  std::vector<double> out;
  out.reserve(grid.times.size());
  for (double t : grid.times) out.push_back(std::exp(-r * t));
  return out;
}

Estimate mean_and_se(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return Estimate{mean, sd / std::sqrt(n)};
}

void check_slices(std::span<const Matrix> signatures, std::size_t expected, std::size_t paths) {
  if (signatures.size() != expected) {
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(expected) + " signature slices, got " +
                                              std::to_string(signatures.size()));
  }
  for (const auto& s : signatures) {
    if (s.rows() != paths) throw Error(ErrorCode::ShapeMismatch, "signature slice has wrong path count");
  }
}

std::size_t channels_of(const Matrix& signatures) {
  for (std::size_t d = 1; d < 64; ++d) {
    if (signature_size(d) == signatures.cols()) return d;
  }
  throw Error(ErrorCode::ShapeMismatch, "signature width is not 1 + d + d^2 + d^3");
}

Matrix select_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = x.row(rows[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

double ContinuationModel::predict(std::span<const double> signature) const {
  if (form == Form::Constant) return constant;
  std::vector<double> f(features.dim());
  features.transform(signature, f);
  return predict_transformed(*this, f);
}

ContinuationModel ContinuationModel::always(double value) {
  ContinuationModel m;
  m.form = Form::Constant;
  m.constant = value;
  return m;
}

PrimalModel fit_continuation(const PathEnsemble& train, std::span<const Matrix> signatures,
                             const ExerciseGrid& grid, RegressorKind kind, const OptionSpec& option,
                             const PrimalConfig& config) {
  const std::size_t n_paths = train.paths();
  const std::size_t k_dates = grid.indices.size();
  check_slices(signatures, k_dates, n_paths);
  const std::size_t channels = channels_of(signatures.front());
  const auto disc = discount_factors(grid, option.r);

  PrimalModel model;
  model.kind = kind;
  model.grid = grid;
  model.slices.resize(k_dates > 0 ? k_dates - 1 : 0);

  // Realised discounted cash flow of the current stopping rule.
  std::vector<double> cash(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    cash[p] = disc.back() * payoff(train.asset(p, grid.indices.back()), option.strike, option.type);
  }

  std::vector<double> h(n_paths);
  for (std::size_t k = k_dates - 1; k-- > 0;) {
    std::vector<std::size_t> itm;
    for (std::size_t p = 0; p < n_paths; ++p) {
      h[p] = payoff(train.asset(p, grid.indices[k]), option.strike, option.type);
      if (h[p] > 0.0) itm.push_back(p);
    }
    auto& slice = model.slices[k];
    if (itm.empty()) {
      slice = ContinuationModel::always(std::numeric_limits<double>::infinity());
      model.degenerate_slices.push_back(k);
      continue;
    }
    std::vector<std::size_t> rows;
    if (itm.size() >= config.min_itm) {
      rows = itm;
    } else {
      rows.resize(n_paths);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    const Matrix sig_rows = select_rows(signatures[k], rows);
    std::vector<double> y(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) y[r] = cash[rows[r]];

    const std::uint64_t slice_seed = splitmix64(config.features.seed + 0x100 * (k + 1));
    auto fit_ridge = [&](RegressorKind basis, double lambda) {
      slice.form = ContinuationModel::Form::Ridge;
      slice.features = SliceFeatures::fit(basis, sig_rows, channels, config.features, slice_seed);
      slice.ridge = ridge_fit(slice.features.transform(sig_rows), y, lambda);
    };
    switch (kind) {
      case RegressorKind::LinearSignature:
      case RegressorKind::ExtendedLinearSignature:
        fit_ridge(kind, config.linear_lambda);
        break;
      case RegressorKind::DeepKernelRff:
        fit_ridge(kind, config.kernel_lambda);
        break;
      case RegressorKind::DeepLogSignature: {
        slice.features = SliceFeatures::fit(kind, sig_rows, channels, config.features, slice_seed);
        auto mlp_config = config.mlp;
        mlp_config.seed = splitmix64(config.mlp.seed + k);
        try {
          slice.mlp = deep_mlp_fit(slice.features.transform(sig_rows), y, mlp_config);
          slice.form = ContinuationModel::Form::Mlp;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NonFiniteLoss) throw;
          fit_ridge(RegressorKind::LinearSignature, config.linear_lambda);
          model.mlp_fallbacks.push_back(k);
        }
        break;
      }
    }

    parallel_for(itm.size(), [&](std::size_t b, std::size_t e) {
      std::vector<double> f(slice.features.dim());
      for (std::size_t q = b; q < e; ++q) {
        const std::size_t p = itm[q];
        slice.features.transform(signatures[k].row(p), f);
        const double exercise = disc[k] * h[p];
        if (exercise >= predict_transformed(slice, f)) cash[p] = exercise;
      }
    });
  }
  return model;
}

Estimate lower_bound(const PathEnsemble& eval, std::span<const Matrix> signatures,
                     const PrimalModel& model, const OptionSpec& option) {
  const auto& grid = model.grid;
  check_slices(signatures, grid.indices.size(), eval.paths());
  const auto disc = discount_factors(grid, option.r);
  const std::size_t last = grid.indices.size() - 1;
  std::vector<double> value(eval.paths(), 0.0);
  parallel_for(eval.paths(), [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      for (std::size_t k = 0; k <= last; ++k) {
        const double h = payoff(eval.asset(p, grid.indices[k]), option.strike, option.type);
        if (!(h > 0.0)) continue;
        const double exercise = disc[k] * h;
        if (k == last || exercise >= model.slices[k].predict(signatures[k].row(p))) {
          value[p] = exercise;
          break;
        }
      }
    }
  });
  return mean_and_se(value);
}

// ---------------------------------------------------------------------------
// Dual

namespace {

// Layout shared by fitting and evaluation: exercise date i sits at control
// point offset + i, so intervals j < offset + i contribute to M_{t_i}.
struct DualLayout {
  std::vector<std::size_t> points;
  std::size_t intervals = 0;
  std::size_t offset = 0;
};

DualLayout layout_for(const ExerciseGrid& grid) {
  DualLayout l;
  l.points = grid.control_points();
  l.intervals = l.points.size() - 1;
  l.offset = l.points.size() - grid.indices.size();
  return l;
}

double interval_increment(const PathEnsemble& e, std::size_t p, std::size_t from, std::size_t to) {
  double w = 0.0;
  for (std::size_t s = from; s < to; ++s) w += e.dW(p, s);
  return w;
}

Matrix discounted_payoffs(const PathEnsemble& e, const ExerciseGrid& grid, const OptionSpec& option) {
  const auto disc = discount_factors(grid, option.r);
  Matrix z(e.paths(), grid.indices.size());
  for (std::size_t p = 0; p < e.paths(); ++p) {
    for (std::size_t i = 0; i < grid.indices.size(); ++i) {
      z(p, i) = disc[i] * payoff(e.asset(p, grid.indices[i]), option.strike, option.type);
    }
  }
  return z;
}

constexpr std::size_t kChunk = 1024;

}  // namespace

MartingaleControl MartingaleControl::zero(const ExerciseGrid& grid) {
  MartingaleControl c;
  c.points = grid.control_points();
  return c;
}

MartingaleControl fit_martingale_control(const PathEnsemble& train, std::span<const Matrix> signatures,
                                         const ExerciseGrid& grid, RegressorKind kind,
                                         const OptionSpec& option, const DualConfig& dual,
                                         const FeatureConfig& feature_config) {
  const auto layout = layout_for(grid);
  const std::size_t n_paths = train.paths();
  check_slices(signatures, layout.points.size(), n_paths);
  const std::size_t channels = channels_of(signatures.front());
  const std::size_t n_dates = grid.indices.size();

  MartingaleControl control;
  control.kind = kind;
  control.points = layout.points;

  // Per interval: fitted features, their scaling, and the cached regressors
  // [1, z] * dW / sqrt(dt) (the sqrt(dt) puts every interval on one scale).
  std::vector<std::size_t> width(layout.intervals);
  std::vector<std::size_t> offset(layout.intervals + 1, 0);
  std::vector<double> root_dt(layout.intervals);
  std::vector<std::vector<float>> cached(layout.intervals);  // float halves the footprint at large M
  for (std::size_t j = 0; j < layout.intervals; ++j) {
    const std::uint64_t slice_seed = splitmix64(feature_config.seed + 0x200 * (j + 1));
    control.features.push_back(SliceFeatures::fit(kind, signatures[j], channels, feature_config, slice_seed));
    const Matrix f = control.features.back().transform(signatures[j]);
    control.scaling.push_back(Standardizer::fit(f));
    width[j] = 1 + f.cols();
    offset[j + 1] = offset[j] + width[j];
    const std::size_t a = layout.points[j];
    const std::size_t b = layout.points[j + 1];
    root_dt[j] = std::sqrt(train.grid[b] - train.grid[a]);
    std::vector<float> g(n_paths * width[j]);
    const auto& scaling = control.scaling.back();
    parallel_for(n_paths, [&](std::size_t pb, std::size_t pe) {
      std::vector<double> z(f.cols());
      for (std::size_t p = pb; p < pe; ++p) {
        const double w = interval_increment(train, p, a, b) / root_dt[j];
        scaling.apply(f.row(p), z);
        float* row = g.data() + p * width[j];
        row[0] = static_cast<float>(w);
        for (std::size_t q = 0; q < z.size(); ++q) row[q + 1] = static_cast<float>(z[q] * w);
      }
    });
    cached[j] = std::move(g);
  }
  const std::size_t n_params = offset.back();
  const Matrix payoffs = discounted_payoffs(train, grid, option);

  // Objective and a subgradient at theta, reduced in fixed-size chunks so the
  // result does not depend on the thread count.
  const std::size_t n_chunks = (n_paths + kChunk - 1) / kChunk;
  std::vector<double> chunk_obj(n_chunks);
  std::vector<std::vector<double>> chunk_grad(n_chunks, std::vector<double>(n_params));
  auto evaluate = [&](const std::vector<double>& theta, std::vector<double>& grad) {
    parallel_for(n_chunks, [&](std::size_t cb, std::size_t ce) {
      std::vector<double> m(n_dates);
      for (std::size_t c = cb; c < ce; ++c) {
        auto& g = chunk_grad[c];
        std::fill(g.begin(), g.end(), 0.0);
        double obj = 0.0;
        const std::size_t end = std::min(n_paths, (c + 1) * kChunk);
        for (std::size_t p = c * kChunk; p < end; ++p) {
          double running = 0.0;
          std::size_t j = 0;
          std::size_t best_i = 0;
          double best = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < n_dates; ++i) {
            for (; j < layout.offset + i; ++j) {
              const float* row = cached[j].data() + p * width[j];
              double v = 0.0;
              for (std::size_t q = 0; q < width[j]; ++q) v += theta[offset[j] + q] * row[q];
              running += v;
            }
            const double candidate = payoffs(p, i) - running;
            if (candidate > best) {
              best = candidate;
              best_i = i;
            }
          }
          obj += best;
          for (std::size_t jj = 0; jj < layout.offset + best_i; ++jj) {
            const float* row = cached[jj].data() + p * width[jj];
            for (std::size_t q = 0; q < width[jj]; ++q) g[offset[jj] + q] -= row[q];
          }
        }
        chunk_obj[c] = obj;
      }
    });
    double total = 0.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c) {
      total += chunk_obj[c];
      for (std::size_t q = 0; q < n_params; ++q) grad[q] += chunk_grad[c][q];
    }
    const double inv = 1.0 / static_cast<double>(n_paths);
    for (auto& v : grad) v *= inv;
    return total * inv;
  };

  std::vector<double> theta(n_params, 0.0);
  std::vector<double> grad(n_params);
  std::vector<double> best_theta = theta;
  double objective = evaluate(theta, grad);
  control.zero_objective = objective;
  control.best_objective = objective;
  control.objective_trace.push_back(objective);
  const double step0 = dual.step_scale * std::abs(control.zero_objective);
  for (std::size_t k = 1; k <= dual.iterations && step0 > 0.0; ++k) {
    double norm = 0.0;
    for (double v : grad) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) break;
    const double step = step0 / std::sqrt(static_cast<double>(k)) / norm;
    for (std::size_t q = 0; q < n_params; ++q) theta[q] -= step * grad[q];
    objective = evaluate(theta, grad);
    control.objective_trace.push_back(objective);
    if (objective < control.best_objective) {
      control.best_objective = objective;
      best_theta = theta;
    }
  }

  control.coefficients.resize(layout.intervals);
  for (std::size_t j = 0; j < layout.intervals; ++j) {
    control.coefficients[j].resize(width[j]);
    for (std::size_t q = 0; q < width[j]; ++q) {
      control.coefficients[j][q] = best_theta[offset[j] + q] / root_dt[j];
    }
  }
  // The search ran on the float cache; recheck in double so the returned
  // control never loses to the zero martingale on these paths.
  const auto zero = MartingaleControl::zero(grid);
  const double zero_obj = dual_upper_bound(train, signatures, zero, grid, option).value;
  const double best_obj = dual_upper_bound(train, signatures, control, grid, option).value;
  control.zero_objective = zero_obj;
  if (best_obj <= zero_obj) {
    control.best_objective = best_obj;
  } else {
    for (auto& c : control.coefficients) std::fill(c.begin(), c.end(), 0.0);
    control.best_objective = zero_obj;
  }
  return control;
}

Matrix martingale_values(const PathEnsemble& paths, std::span<const Matrix> signatures,
                         const MartingaleControl& control, const ExerciseGrid& grid) {
  const auto layout = layout_for(grid);
  if (control.points != layout.points) {
    throw Error(ErrorCode::ShapeMismatch, "control was fitted on a different exercise grid");
  }
  const std::size_t n_dates = grid.indices.size();
  Matrix m(paths.paths(), n_dates, 0.0);
  if (control.coefficients.empty()) return m;
  check_slices(signatures, layout.points.size(), paths.paths());
  std::vector<Matrix> features;
  for (std::size_t j = 0; j < layout.intervals; ++j) {
    features.push_back(control.scaling[j].apply(control.features[j].transform(signatures[j])));
  }
  parallel_for(paths.paths(), [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      double running = 0.0;
      std::size_t j = 0;
      for (std::size_t i = 0; i < n_dates; ++i) {
        for (; j < layout.offset + i; ++j) {
          const auto& c = control.coefficients[j];
          const auto z = features[j].row(p);
          double v = c[0];
          for (std::size_t q = 0; q < z.size(); ++q) v += c[q + 1] * z[q];
          running += v * interval_increment(paths, p, layout.points[j], layout.points[j + 1]);
        }
        m(p, i) = running;
      }
    }
  });
  return m;
}

Estimate dual_upper_bound(const PathEnsemble& eval, std::span<const Matrix> signatures,
                          const MartingaleControl& control, const ExerciseGrid& grid,
                          const OptionSpec& option) {
  const Matrix m = martingale_values(eval, signatures, control, grid);
  const Matrix z = discounted_payoffs(eval, grid, option);
  std::vector<double> value(eval.paths());
  for (std::size_t p = 0; p < eval.paths(); ++p) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.indices.size(); ++i) best = std::max(best, z(p, i) - m(p, i));
    value[p] = best;
  }
  return mean_and_se(value);
}

// ---------------------------------------------------------------------------
// Reporting

std::string_view to_string(PremiumStatus s) noexcept {
  return s == PremiumStatus::Within ? "Within" : "Outside";
}

PriceBounds make_bounds(Estimate lower, Estimate upper, double premium) {
  PriceBounds b;
  b.lower = lower.value;
  b.lower_se = lower.standard_error;
  b.upper = upper.value;
  b.upper_se = upper.standard_error;
  b.gap = b.upper - b.lower;
  if (b.lower > 0.0) b.gap_pct = b.gap / b.lower;
  b.premium_status =
      (b.lower <= premium && premium <= b.upper) ? PremiumStatus::Within : PremiumStatus::Outside;
  return b;
}

std::vector<VariantResult> price_with_all_variants(const Ensembles& ensembles, const ExerciseGrid& grid,
                                                   const OptionSpec& option, double premium,
                                                   std::span<const RegressorKind> kinds,
                                                   const PricingConfig& config) {
  const auto points = grid.control_points();
  const std::size_t offset = points.size() - grid.indices.size();

  // Signatures at every control point; the exercise dates are a suffix.
  auto slices_for = [&](const PathEnsemble& e) {
    return signature_slices(e, config.channels, points);
  };
  const auto primal_sig = slices_for(ensembles.primal_train);
  const auto dual_sig = slices_for(ensembles.dual_train);
  const auto eval_sig = slices_for(ensembles.evaluation);
  const std::span<const Matrix> primal_ex(primal_sig.data() + offset, grid.indices.size());
  const std::span<const Matrix> eval_ex(eval_sig.data() + offset, grid.indices.size());

  const auto zero = MartingaleControl::zero(grid);
  const double zero_upper = dual_upper_bound(ensembles.evaluation, eval_sig, zero, grid, option).value;

  std::vector<VariantResult> results;
  for (auto kind : kinds) {
    VariantResult res;
    res.kind = kind;
    const auto primal = fit_continuation(ensembles.primal_train, primal_ex, grid, kind, option, config.primal);
    const auto lower = lower_bound(ensembles.evaluation, eval_ex, primal, option);
    const auto control = fit_martingale_control(ensembles.dual_train, dual_sig, grid, kind, option,
                                                config.dual, config.primal.features);
    const auto upper = dual_upper_bound(ensembles.evaluation, eval_sig, control, grid, option);
    res.bounds = make_bounds(lower, upper, premium);
    res.zero_control_upper = zero_upper;
    res.dual_training_objective = control.best_objective;
    res.dual_zero_objective = control.zero_objective;
    res.degenerate_slices = primal.degenerate_slices;
    res.mlp_fallbacks = primal.mlp_fallbacks;
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace roughstop
