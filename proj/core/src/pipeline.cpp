#include "roughstop/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "roughstop/roughness.hpp"
#include "roughstop/signatures.hpp"

namespace roughstop {

using json = nlohmann::json;

std::string_view to_string(OutputFormat f) noexcept {
  switch (f) {
    case OutputFormat::Json: return "json";
    case OutputFormat::Table: return "table";
    case OutputFormat::Csv: return "csv";
  }
  return "?";
}

std::string_view to_string(EngineChoice e) noexcept {
  switch (e) {
    case EngineChoice::Auto: return "auto";
    case EngineChoice::RoughBergomi: return "rbergomi";
    case EngineChoice::Heston: return "heston";
  }
  return "?";
}

OutputFormat parse_output_format(std::string_view text) {
  for (auto f : {OutputFormat::Json, OutputFormat::Table, OutputFormat::Csv}) {
    if (to_string(f) == text) return f;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown output format '" + std::string(text) + "'");
}

EngineChoice parse_engine_choice(std::string_view text) {
  for (auto e : {EngineChoice::Auto, EngineChoice::RoughBergomi, EngineChoice::Heston}) {
    if (to_string(e) == text) return e;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown engine '" + std::string(text) + "'");
}

Compensator parse_compensator(std::string_view text) {
  for (auto c : {Compensator::Exact, Compensator::Continuous}) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown compensator '" + std::string(text) + "'");
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (dte < 1) fail("dte must be >= 1");
  if (hurst_window < 2) fail("hurst window must be >= 2");
  if (forecast_lags < 1) fail("forecast lags must be >= 1");
  if (gbt_depth < 1) fail("gbt depth must be >= 1");
  if (!(gbt_learning_rate > 0.0)) fail("gbt learning rate must be positive");
  if (calib_window < 2) fail("calibration window must be >= 2");
  if (paths < 2) fail("need at least 2 paths");
  if (sig_depth != 3) fail("signature depth is fixed at 3");
  if (rff_dim < 1) fail("rff dimension must be >= 1");
  if (rff_gamma && !(*rff_gamma > 0.0)) fail("rff gamma must be positive");
  if (ridge_lambda < 0.0 || linear_lambda < 0.0) fail("ridge lambda must be >= 0");
  if (regressors.empty()) fail("no regressors selected");
  if (mlp_width < 1) fail("mlp width must be >= 1");
  if (atm_min_days > atm_max_days) fail("empty ATM dte band");
  (void)ChannelSet::parse(sig_channels);
  (void)parse_date(quote_date);
}

// ---------------------------------------------------------------------------
// Config serialisation

namespace {

json config_json(const PipelineConfig& c) {
  json regs = json::array();
  for (auto k : c.regressors) regs.push_back(std::string(to_string(k)));
  return json{
      {"options_path", c.options_path},
      {"prices_path", c.prices_path},
      {"ticker", c.ticker},
      {"quote_date", c.quote_date},
      {"dte", c.dte},
      {"cp", std::string(to_string(c.cp))},
      {"hurst_window", c.hurst_window},
      {"forecast_lags", c.forecast_lags},
      {"gbt_rounds", c.gbt_rounds},
      {"gbt_learning_rate", c.gbt_learning_rate},
      {"gbt_depth", c.gbt_depth},
      {"calib_window", c.calib_window},
      {"kappa", c.kappa},
      {"risk_free_rate", c.risk_free_rate},
      {"atm_min_days", c.atm_min_days},
      {"atm_max_days", c.atm_max_days},
      {"paths", c.paths},
      {"steps", c.steps},
      {"engine", std::string(to_string(c.engine))},
      {"compensator", std::string(to_string(c.compensator))},
      {"seed", c.seed},
      {"sig_channels", c.sig_channels},
      {"sig_depth", c.sig_depth},
      {"rff_dim", c.rff_dim},
      {"rff_gamma", c.rff_gamma ? json(*c.rff_gamma) : json(nullptr)},
      {"ridge_lambda", c.ridge_lambda},
      {"linear_lambda", c.linear_lambda},
      {"regressors", regs},
      {"dual_iters", c.dual_iters},
      {"dual_step", c.dual_step},
      {"mlp_width", c.mlp_width},
      {"mlp_epochs", c.mlp_epochs},
      {"injected_mean_hurst", c.injected_mean_hurst ? json(*c.injected_mean_hurst) : json(nullptr)},
      {"output", std::string(to_string(c.output))},
  };
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_optional(const json& j, const char* key, std::optional<double>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
  } else {
    out = j.at(key).get<double>();
  }
}

}  // namespace

std::string config_to_json(const PipelineConfig& config) { return config_json(config).dump(2); }

PipelineConfig config_from_json(std::string_view text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    const json known = config_json(c);
    for (const auto& [key, value] : j.items()) {
      if (!known.contains(key)) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
    read_field(j, "options_path", c.options_path);
    read_field(j, "prices_path", c.prices_path);
    read_field(j, "ticker", c.ticker);
    read_field(j, "quote_date", c.quote_date);
    read_field(j, "dte", c.dte);
    if (j.contains("cp")) c.cp = parse_option_type(j.at("cp").get<std::string>());
    read_field(j, "hurst_window", c.hurst_window);
    read_field(j, "forecast_lags", c.forecast_lags);
    read_field(j, "gbt_rounds", c.gbt_rounds);
    read_field(j, "gbt_learning_rate", c.gbt_learning_rate);
    read_field(j, "gbt_depth", c.gbt_depth);
    read_field(j, "calib_window", c.calib_window);
    read_field(j, "kappa", c.kappa);
    read_field(j, "risk_free_rate", c.risk_free_rate);
    read_field(j, "atm_min_days", c.atm_min_days);
    read_field(j, "atm_max_days", c.atm_max_days);
    read_field(j, "paths", c.paths);
    read_field(j, "steps", c.steps);
    if (j.contains("engine")) c.engine = parse_engine_choice(j.at("engine").get<std::string>());
    if (j.contains("compensator")) c.compensator = parse_compensator(j.at("compensator").get<std::string>());
    read_field(j, "seed", c.seed);
    read_field(j, "sig_channels", c.sig_channels);
    read_field(j, "sig_depth", c.sig_depth);
    read_field(j, "rff_dim", c.rff_dim);
    read_optional(j, "rff_gamma", c.rff_gamma);
    read_field(j, "ridge_lambda", c.ridge_lambda);
    read_field(j, "linear_lambda", c.linear_lambda);
    if (j.contains("regressors")) {
      c.regressors.clear();
      for (const auto& r : j.at("regressors")) c.regressors.push_back(parse_regressor(r.get<std::string>()));
    }
    read_field(j, "dual_iters", c.dual_iters);
    read_field(j, "dual_step", c.dual_step);
    read_field(j, "mlp_width", c.mlp_width);
    read_field(j, "mlp_epochs", c.mlp_epochs);
    read_optional(j, "injected_mean_hurst", c.injected_mean_hurst);
    if (j.contains("output")) c.output = parse_output_format(j.at("output").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return c;
}

ForecastDiagnostics forecast_diagnostics(std::span<const double> forecast, std::span<const double> realized) {
  if (forecast.size() != realized.size()) {
    throw Error(ErrorCode::LengthMismatch, "forecast has " + std::to_string(forecast.size()) +
                                               " values, realized has " + std::to_string(realized.size()));
  }
  ForecastDiagnostics d;
  if (forecast.empty()) return d;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    const double e = forecast[i] - realized[i];
    d.mae += std::abs(e);
    d.mse += e * e;
  }
  d.mae /= static_cast<double>(forecast.size());
  d.mse /= static_cast<double>(forecast.size());
  return d;
}

StageError::StageError(std::string stage, const Error& cause)
    : Error(Verbatim{}, cause.code(), "[" + stage + "] " + cause.what()), stage_(std::move(stage)) {}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

class StageRunner {
 public:
  explicit StageRunner(std::vector<StageTiming>& timings) : timings_(timings) {}

  template <class F>
  auto operator()(const char* name, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      auto result = body();
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
      if (!timings_.empty() && timings_.back().stage == name) {
        timings_.back().seconds += took.count();
      } else {
        timings_.push_back({name, took.count()});
      }
      return result;
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(name, e);
    }
  }

 private:
  std::vector<StageTiming>& timings_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return in;
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& config) {
  RunReport rep;
  rep.config = config;
  StageRunner stage(rep.timings);

  struct Inputs {
    PriceSeries prices;
    std::vector<OptionQuote> quotes;
    Date quote_date;
  };
  stage("config", [&] {
    config.validate();
    return 0;
  });
  const Date quote_date = parse_date(config.quote_date);

  auto data = stage("market_data", [&] {
    Inputs in;
    auto prices_file = open_input(config.prices_path);
    in.prices = load_price_series(prices_file, config.ticker);
    auto options_file = open_input(config.options_path);
    in.quotes = load_option_quotes(options_file);
    in.quote_date = quote_date;
    return in;
  });
  rep.contract = stage("market_data", [&] {
    return select_contract(data.quotes, config.ticker, quote_date, config.dte, config.cp);
  });
  const PriceSeries history = stage("market_data", [&] {
    auto h = truncate_through(data.prices, quote_date);
    if (h.dates.empty() || h.dates.back() != quote_date) {
      throw Error(ErrorCode::NoMatch, "no close for " + config.ticker + " on " + config.quote_date);
    }
    return h;
  });
  rep.spot = history.closes.back();
  rep.history_days = history.dates.size();

  const HurstSeries hurst = stage("roughness", [&] { return rolling_hurst(history, config.hurst_window); });
  rep.hurst_windows = hurst.values.size();
  rep.degenerate_hurst_windows = hurst.degenerate_windows;
  if (hurst.values.empty()) {
    throw StageError("roughness", Error(ErrorCode::InsufficientData, "no complete Hurst window"));
  }
  rep.hurst_current = hurst.values.back();

  rep.forecast = stage("forecaster", [&] {
    ForecastConfig fc;
    fc.lags = config.forecast_lags;
    fc.gbt.rounds = config.gbt_rounds;
    fc.gbt.learning_rate = config.gbt_learning_rate;
    fc.gbt.max_depth = config.gbt_depth;
    const auto horizon = static_cast<std::size_t>(config.dte);
    const auto ensemble = train_horizon_models(hurst, horizon, fc);
    if (hurst.values.size() < fc.lags) {
      throw Error(ErrorCode::InsufficientData, "fewer Hurst values than lags");
    }
    const std::span<const double> all(hurst.values);
    return predict_path(ensemble, all.subspan(all.size() - fc.lags));
  });
  rep.mean_hurst_injected = config.injected_mean_hurst.has_value();
  rep.mean_hurst = config.injected_mean_hurst.value_or(rep.forecast.mean);
  rep.regime = select_regime(rep.mean_hurst);
  rep.engine_forced = config.engine != EngineChoice::Auto;
  switch (config.engine) {
    case EngineChoice::Auto: rep.engine = engine_for(rep.regime); break;
    case EngineChoice::RoughBergomi: rep.engine = EngineKind::RoughBergomi; break;
    case EngineChoice::Heston: rep.engine = EngineKind::Heston; break;
  }

  // Realised roughness after the quote date, when the price file has it.
  rep.realized = stage("diagnostics", [&]() -> std::optional<RealizedComparison> {
    if (data.prices.dates.size() <= history.dates.size()) return std::nullopt;
    const auto full = rolling_hurst(data.prices, config.hurst_window);
    RealizedComparison cmp;
    for (std::size_t i = 0; i < full.values.size() && cmp.realized.size() < rep.forecast.values.size(); ++i) {
      if (full.dates[i] > quote_date) {
        cmp.dates.push_back(full.dates[i]);
        cmp.realized.push_back(full.values[i]);
      }
    }
    if (cmp.realized.empty()) return std::nullopt;
    cmp.forecast.assign(rep.forecast.values.begin(), rep.forecast.values.begin() + cmp.realized.size());
    cmp.errors = forecast_diagnostics(cmp.forecast, cmp.realized);
    return cmp;
  });

  rep.params = stage("calibration", [&] {
    auto atm = extract_atm_vol_series(data.quotes, config.ticker, DteBand{config.atm_min_days, config.atm_max_days});
    const auto end = std::upper_bound(atm.dates.begin(), atm.dates.end(), quote_date);
    const auto keep = static_cast<std::size_t>(end - atm.dates.begin());
    atm.dates.resize(keep);
    atm.atm_implied_vols.resize(keep);
    CalibrationConfig cc;
    cc.window = config.calib_window;
    cc.kappa = config.kappa;
    cc.risk_free_rate = config.risk_free_rate;
    const double h = std::clamp(rep.hurst_current, 0.01, 0.99);
    return calibrate(history, atm, h, rep.contract.implied_vol, cc);
  });

  const std::size_t steps = config.simulation_steps();
  rep.seeds = {config.seed, config.seed + 1, config.seed + 2};
  const auto ensembles = stage("engines", [&] {
    const HurstPath hpath = extend_forecast(rep.forecast.values, steps);
    if (rep.engine == EngineKind::RoughBergomi) rep.simulation_hurst = hpath.values;
    SimulationSpec spec;
    spec.spot = rep.spot;
    spec.maturity_years = rep.contract.maturity_years();
    spec.paths = config.paths;
    spec.steps = steps;
    auto run = [&](std::uint64_t seed) {
      spec.seed = seed;
      return simulate(rep.engine, rep.params, hpath, spec, config.compensator);
    };
    return Ensembles{run(rep.seeds[0]), run(rep.seeds[1]), run(rep.seeds[2])};
  });

  rep.variants = stage("pricing", [&] {
    const auto grid = ExerciseGrid::daily(ensembles.evaluation);
    OptionSpec option{rep.contract.strike, rep.contract.type, rep.params.r};
    PricingConfig pc;
    pc.channels = ChannelSet::parse(config.sig_channels);
    pc.primal.linear_lambda = config.linear_lambda;
    pc.primal.kernel_lambda = config.ridge_lambda;
    pc.primal.mlp.hidden1 = config.mlp_width;
    pc.primal.mlp.hidden2 = config.mlp_width;
    pc.primal.mlp.epochs = config.mlp_epochs;
    pc.primal.features.rff_dim = config.rff_dim;
    pc.primal.features.rff_gamma = config.rff_gamma;
    pc.primal.features.seed = config.seed;
    pc.dual.iterations = config.dual_iters;
    pc.dual.step_scale = config.dual_step;

    const auto& eval = ensembles.evaluation;
    const double df = std::exp(-option.r * eval.grid.back());
    double sum = 0.0;
    for (std::size_t p = 0; p < eval.paths(); ++p) {
      sum += df * payoff(eval.asset(p, eval.steps()), option.strike, option.type);
    }
    rep.european_mc = sum / static_cast<double>(eval.paths());
    return price_with_all_variants(ensembles, grid, option, rep.contract.premium, config.regressors, pc);
  });
  return rep;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

json params_json(const EngineParams& p) {
  return json{{"rho", p.rho},     {"eta", p.eta}, {"xi0", p.xi0}, {"kappa", p.kappa},
              {"theta", p.theta}, {"v0", p.v0},   {"r", p.r},     {"dt", p.dt}};
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<std::string> format_dates(std::span<const Date> dates) {
  std::vector<std::string> out;
  for (auto d : dates) out.push_back(format_date(d));
  return out;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

std::string report_to_json(const RunReport& r, bool include_timings) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = config_json(r.config);
  j["seeds"] = {{"primal_train", r.seeds.size() > 0 ? r.seeds[0] : 0},
                {"dual_train", r.seeds.size() > 1 ? r.seeds[1] : 0},
                {"evaluation", r.seeds.size() > 2 ? r.seeds[2] : 0}};
  j["contract"] = {{"ticker", r.contract.ticker},
                   {"quote_date", format_date(r.contract.quote_date)},
                   {"dte", r.contract.dte},
                   {"maturity_years", r.contract.maturity_years()},
                   {"strike", r.contract.strike},
                   {"forward_price", r.contract.forward_price},
                   {"premium", r.contract.premium},
                   {"implied_vol", r.contract.implied_vol},
                   {"cp", std::string(to_string(r.contract.type))}};
  j["data"] = {{"spot", r.spot},
               {"history_days", r.history_days},
               {"hurst_windows", r.hurst_windows},
               {"degenerate_hurst_windows", r.degenerate_hurst_windows},
               {"hurst_current", r.hurst_current}};
  j["forecast"] = {{"values", r.forecast.values}, {"mean", r.forecast.mean}};
  j["regime"] = {{"mean_hurst", r.mean_hurst},
                 {"mean_hurst_injected", r.mean_hurst_injected},
                 {"threshold", kRoughThreshold},
                 {"regime", std::string(to_string(r.regime))},
                 {"engine", std::string(to_string(r.engine))},
                 {"engine_forced", r.engine_forced}};
  j["params"] = params_json(r.params);
  j["simulation_hurst"] = r.simulation_hurst;
  if (r.realized) {
    j["diagnostics"] = {{"dates", format_dates(r.realized->dates)},
                        {"forecast", r.realized->forecast},
                        {"realized", r.realized->realized},
                        {"mae", r.realized->errors.mae},
                        {"mse", r.realized->errors.mse}};
  } else {
    j["diagnostics"] = nullptr;
  }
  j["european_mc"] = r.european_mc;
  json variants = json::array();
  for (const auto& v : r.variants) {
    variants.push_back({{"method", std::string(to_string(v.kind))},
                        {"name", std::string(display_name(v.kind))},
                        {"lower", v.bounds.lower},
                        {"lower_se", v.bounds.lower_se},
                        {"upper", v.bounds.upper},
                        {"upper_se", v.bounds.upper_se},
                        {"gap", v.bounds.gap},
                        {"gap_pct", optional_number(v.bounds.gap_pct)},
                        {"premium_status", std::string(to_string(v.bounds.premium_status))},
                        {"zero_control_upper", v.zero_control_upper},
                        {"dual_training_objective", v.dual_training_objective},
                        {"dual_zero_objective", v.dual_zero_objective},
                        {"degenerate_slices", v.degenerate_slices},
                        {"mlp_fallbacks", v.mlp_fallbacks}});
  }
  j["variants"] = variants;
  if (include_timings) {
    json t = json::array();
    for (const auto& s : r.timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    j["timings"] = t;
  }
  return j.dump(2) + "\n";
}

std::string report_to_table(const RunReport& r) {
  std::ostringstream out;
  out << r.contract.ticker << ' ' << format_date(r.contract.quote_date) << ' ' << to_string(r.contract.type)
      << " K=" << fmt("%.2f", r.contract.strike) << " dte=" << r.contract.dte
      << " premium=" << fmt("%.2f", r.contract.premium) << '\n';
  out << "mean H " << fmt("%.4f", r.mean_hurst) << (r.mean_hurst_injected ? " (injected)" : "") << " -> "
      << to_string(r.regime) << ", engine " << to_string(r.engine) << (r.engine_forced ? " (forced)" : "")
      << '\n';
  if (r.realized) {
    out << "forecast MAE " << fmt("%.4f", r.realized->errors.mae) << " MSE " << fmt("%.4f", r.realized->errors.mse)
        << " over " << r.realized->realized.size() << " days\n";
  }
  out << '\n';

  const std::vector<std::string> header{"Method", "Lower", "Upper", "Std Error", "Gap", "Gap %", "Premium Status"};
  std::vector<std::vector<std::string>> rows{header};
  for (const auto& v : r.variants) {
    const auto& b = v.bounds;
    rows.push_back({std::string(display_name(v.kind)), fmt("$%.2f", b.lower), fmt("$%.2f", b.upper),
                    fmt("$%.2f", b.lower_se) + " / " + fmt("$%.2f", b.upper_se), fmt("$%.2f", b.gap),
                    b.gap_pct ? fmt("%.2f%%", *b.gap_pct * 100.0) : std::string("n/a"),
                    std::string(to_string(b.premium_status))});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      const auto& cell = rows[i][c];
      const std::string pad(width[c] - cell.size(), ' ');
      // text columns left, numbers right
      if (c + 1 == rows[i].size()) {
        out << cell;
      } else if (c == 0) {
        out << cell << pad;
      } else {
        out << pad << cell;
      }
      out << (c + 1 < rows[i].size() ? "  " : "\n");
    }
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out << std::string(total - 2, '-') << '\n';
    }
  }
  return out.str();
}

std::string report_to_csv(const RunReport& r) {
  std::ostringstream out;
  out << "method,lower,lower_se,upper,upper_se,gap,gap_pct,premium_status\n";
  for (const auto& v : r.variants) {
    const auto& b = v.bounds;
    out << to_string(v.kind) << ',' << fmt("%.17g", b.lower) << ',' << fmt("%.17g", b.lower_se) << ','
        << fmt("%.17g", b.upper) << ',' << fmt("%.17g", b.upper_se) << ',' << fmt("%.17g", b.gap) << ','
        << (b.gap_pct ? fmt("%.17g", *b.gap_pct) : std::string()) << ',' << to_string(b.premium_status) << '\n';
  }
  return out.str();
}

std::string render_report(const RunReport& report, bool include_timings) {
  switch (report.config.output) {
    case OutputFormat::Json: return report_to_json(report, include_timings);
    case OutputFormat::Table: return report_to_table(report);
    case OutputFormat::Csv: return report_to_csv(report);
  }
  return {};
}

}  // namespace roughstop
