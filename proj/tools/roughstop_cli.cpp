#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "roughstop/calibration.hpp"
#include "roughstop/engines.hpp"
#include "roughstop/forecaster.hpp"
#include "roughstop/kernels.hpp"
#include "roughstop/parallel.hpp"
#include "roughstop/pipeline.hpp"
#include "roughstop/pricing.hpp"
#include "roughstop/roughness.hpp"
#include "roughstop/signatures.hpp"
#include "roughstop/synthetic.hpp"

namespace rs = roughstop;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rs::Error(rs::ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw rs::Error(rs::ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
}

// Flags for `price`. Everything is optional so a --config file can supply
// the base and the command line only overrides what was given.
struct PriceFlags {
  std::optional<std::string> config_path;
  std::string save_config;
  std::string out;
  bool timings = false;

  std::optional<std::string> options, prices, ticker, date, cp;
  std::optional<int> dte;
  std::optional<std::size_t> hurst_window, forecast_lags, gbt_rounds, gbt_depth, calib_window, paths, steps;
  std::optional<double> gbt_lr, kappa, risk_free_rate, ridge_lambda, linear_lambda, dual_step, inject_mean_hurst;
  std::optional<int> atm_min_days, atm_max_days, sig_depth;
  std::optional<std::string> engine, compensator, sig_channels, rff_gamma, regressor, output;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> rff_dim, dual_iters, mlp_width, mlp_epochs;

  void add(CLI::App& app) {
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    app.add_option("--save-config", save_config, "write the effective config as JSON");
    app.add_option("--out", out, "report destination (default stdout)");
    app.add_flag("--timings", timings, "include per-stage timings in JSON output");
    app.add_option("--options", options, "options CSV");
    app.add_option("--prices", prices, "prices CSV");
    app.add_option("--ticker", ticker);
    app.add_option("--date", date, "quote date YYYY-MM-DD");
    app.add_option("--dte", dte, "trading days to expiry");
    app.add_option("--cp", cp, "put|call");
    app.add_option("--hurst-window", hurst_window);
    app.add_option("--forecast-lags", forecast_lags);
    app.add_option("--gbt-rounds", gbt_rounds);
    app.add_option("--gbt-lr", gbt_lr);
    app.add_option("--gbt-depth", gbt_depth);
    app.add_option("--calib-window", calib_window);
    app.add_option("--kappa", kappa);
    app.add_option("--risk-free-rate", risk_free_rate);
    app.add_option("--atm-min-days", atm_min_days);
    app.add_option("--atm-max-days", atm_max_days);
    app.add_option("--paths", paths, "paths per ensemble (default 32768)");
    app.add_option("--steps", steps, "simulation steps (default dte)");
    app.add_option("--engine", engine, "auto|rbergomi|heston");
    app.add_option("--compensator", compensator, "exact|continuous");
    app.add_option("--seed", seed);
    app.add_option("--sig-channels", sig_channels, "e.g. time,vol,price");
    app.add_option("--sig-depth", sig_depth, "must be 3");
    app.add_option("--rff-dim", rff_dim);
    app.add_option("--rff-gamma", rff_gamma, "auto|<value>");
    app.add_option("--ridge-lambda", ridge_lambda, "kernel ridge penalty");
    app.add_option("--linear-lambda", linear_lambda, "ridge penalty for linear bases");
    app.add_option("--regressor", regressor, "all|linear|extended|deeplog|deepkernel (comma list ok)");
    app.add_option("--dual-iters", dual_iters);
    app.add_option("--dual-step", dual_step);
    app.add_option("--mlp-width", mlp_width);
    app.add_option("--mlp-epochs", mlp_epochs);
    app.add_option("--inject-mean-hurst", inject_mean_hurst, "override the forecast mean (testing)");
    app.add_option("--output", output, "json|table|csv");
  }

  rs::PipelineConfig build() const {
    rs::PipelineConfig c;
    if (config_path) c = rs::config_from_json(read_file(*config_path));
    auto set = [](auto& field, const auto& flag) {
      if (flag) field = *flag;
    };
    set(c.options_path, options);
    set(c.prices_path, prices);
    set(c.ticker, ticker);
    set(c.quote_date, date);
    set(c.dte, dte);
    if (cp) c.cp = rs::parse_option_type(*cp);
    set(c.hurst_window, hurst_window);
    set(c.forecast_lags, forecast_lags);
    set(c.gbt_rounds, gbt_rounds);
    set(c.gbt_learning_rate, gbt_lr);
    set(c.gbt_depth, gbt_depth);
    set(c.calib_window, calib_window);
    set(c.kappa, kappa);
    set(c.risk_free_rate, risk_free_rate);
    set(c.atm_min_days, atm_min_days);
    set(c.atm_max_days, atm_max_days);
    set(c.paths, paths);
    set(c.steps, steps);
    if (engine) c.engine = rs::parse_engine_choice(*engine);
    if (compensator) c.compensator = rs::parse_compensator(*compensator);
    set(c.seed, seed);
    set(c.sig_channels, sig_channels);
    set(c.sig_depth, sig_depth);
    set(c.rff_dim, rff_dim);
    if (rff_gamma) {
      if (*rff_gamma == "auto") {
        c.rff_gamma.reset();
      } else {
        try {
          c.rff_gamma = std::stod(*rff_gamma);
        } catch (const std::exception&) {
          throw rs::Error(rs::ErrorCode::InvalidConfig, "--rff-gamma expects auto or a number");
        }
      }
    }
    set(c.ridge_lambda, ridge_lambda);
    set(c.linear_lambda, linear_lambda);
    if (regressor) {
      c.regressors.clear();
      std::stringstream list(*regressor);
      std::string item;
      while (std::getline(list, item, ',')) {
        if (item == "all") {
          c.regressors = rs::all_regressors();
          break;
        }
        c.regressors.push_back(rs::parse_regressor(item));
      }
    }
    set(c.dual_iters, dual_iters);
    set(c.dual_step, dual_step);
    set(c.mlp_width, mlp_width);
    set(c.mlp_epochs, mlp_epochs);
    if (inject_mean_hurst) c.injected_mean_hurst = *inject_mean_hurst;
    if (output) c.output = rs::parse_output_format(*output);
    return c;
  }
};

int run_price(const PriceFlags& flags) {
  const auto config = flags.build();
  config.validate();
  if (!flags.save_config.empty()) write_output(flags.save_config, rs::config_to_json(config) + "\n");
  const auto report = rs::run_pipeline(config);
  write_output(flags.out, rs::render_report(report, flags.timings));
  return 0;
}

struct SimulateFlags {
  std::string engine = "heston";
  std::string compensator = "exact";
  double hurst = 0.1;
  rs::EngineParams params;
  rs::SimulationSpec spec;
  int days = 10;
  std::size_t dump = 0;

  void add(CLI::App& app) {
    spec.paths = 1 << 14;
    app.add_option("--engine", engine, "rbergomi|heston")->capture_default_str();
    app.add_option("--compensator", compensator, "exact|continuous")->capture_default_str();
    app.add_option("--hurst", hurst, "constant Hurst for rbergomi")->capture_default_str();
    app.add_option("--rho", params.rho)->capture_default_str();
    app.add_option("--eta", params.eta)->capture_default_str();
    app.add_option("--xi0", params.xi0)->capture_default_str();
    app.add_option("--kappa", params.kappa)->capture_default_str();
    app.add_option("--theta", params.theta)->capture_default_str();
    app.add_option("--v0", params.v0)->capture_default_str();
    app.add_option("--risk-free-rate", params.r)->capture_default_str();
    app.add_option("--spot", spec.spot)->capture_default_str();
    app.add_option("--days", days, "maturity in trading days")->capture_default_str();
    app.add_option("--steps", spec.steps)->capture_default_str();
    app.add_option("--paths", spec.paths)->capture_default_str();
    app.add_option("--seed", spec.seed)->capture_default_str();
    app.add_option("--dump", dump, "print the first N asset paths instead of step means");
  }
};

int run_simulate(SimulateFlags f) {
  const auto choice = rs::parse_engine_choice(f.engine);
  if (choice == rs::EngineChoice::Auto) throw rs::Error(rs::ErrorCode::InvalidConfig, "simulate needs an explicit engine");
  const auto kind = choice == rs::EngineChoice::Heston ? rs::EngineKind::Heston : rs::EngineKind::RoughBergomi;
  f.spec.maturity_years = f.days / rs::kTradingDaysPerYear;
  const auto e = rs::simulate(kind, f.params, rs::constant_hurst(f.hurst, f.spec.steps), f.spec,
                              rs::parse_compensator(f.compensator));
  if (f.dump > 0) {
    for (std::size_t p = 0; p < std::min(f.dump, e.paths()); ++p) {
      for (std::size_t s = 0; s <= e.steps(); ++s) std::printf("%s%.10g", s ? "," : "", e.asset(p, s));
      std::printf("\n");
    }
    return 0;
  }
  std::printf("step,t,mean_asset,se_asset,mean_variance,se_variance\n");
  const double n = static_cast<double>(e.paths());
  for (std::size_t s = 0; s <= e.steps(); ++s) {
    double sa = 0, sa2 = 0, sv = 0, sv2 = 0;
    for (std::size_t p = 0; p < e.paths(); ++p) {
      sa += e.asset(p, s);
      sa2 += e.asset(p, s) * e.asset(p, s);
      sv += e.variance(p, s);
      sv2 += e.variance(p, s) * e.variance(p, s);
    }
    const double ma = sa / n, mv = sv / n;
    const double sea = std::sqrt(std::max(sa2 / n - ma * ma, 0.0) / n);
    const double sev = std::sqrt(std::max(sv2 / n - mv * mv, 0.0) / n);
    std::printf("%zu,%.10g,%.10g,%.3g,%.10g,%.3g\n", s, e.grid[s], ma, sea, mv, sev);
  }
  return 0;
}

struct HurstFlags {
  std::string prices;
  std::string ticker = "AAPL";
  std::size_t window = rs::kDefaultHurstWindow;
  std::optional<std::string> date;
  std::size_t forecast = 0;
  std::size_t lags = 5;

  void add(CLI::App& app) {
    app.add_option("--prices", prices, "prices CSV")->required();
    app.add_option("--ticker", ticker)->capture_default_str();
    app.add_option("--hurst-window", window)->capture_default_str();
    app.add_option("--date", date, "use data up to this date");
    app.add_option("--forecast", forecast, "also forecast this many steps ahead");
    app.add_option("--forecast-lags", lags)->capture_default_str();
  }
};

int run_hurst(const HurstFlags& f) {
  std::ifstream in(f.prices);
  if (!in) throw rs::Error(rs::ErrorCode::Io, "cannot open '" + f.prices + "'");
  auto series = rs::load_price_series(in, f.ticker);
  if (f.date) series = rs::truncate_through(series, rs::parse_date(*f.date));
  const auto h = rs::rolling_hurst(series, f.window);
  std::printf("date,hurst\n");
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    std::printf("%s,%.10g\n", rs::format_date(h.dates[i]).c_str(), h.values[i]);
  }
  if (f.forecast > 0) {
    rs::ForecastConfig fc;
    fc.lags = f.lags;
    const auto ens = rs::train_horizon_models(h, f.forecast, fc);
    if (h.values.size() < fc.lags) throw rs::Error(rs::ErrorCode::InsufficientData, "fewer Hurst values than lags");
    const std::span<const double> all(h.values);
    const auto path = rs::predict_path(ens, all.subspan(all.size() - fc.lags));
    std::printf("\nhorizon,forecast\n");
    for (std::size_t i = 0; i < path.values.size(); ++i) std::printf("%zu,%.10g\n", i + 1, path.values[i]);
    std::printf("mean,%.10g,regime,%s\n", path.mean, std::string(rs::to_string(rs::select_regime(path.mean))).c_str());
  }
  return 0;
}

struct SynthFlags {
  std::string out_dir = ".";
  rs::SyntheticMarketConfig market;
  std::string start = "2021-01-04";

  void add(CLI::App& app) {
    app.add_option("--out-dir", out_dir)->capture_default_str();
    app.add_option("--ticker", market.ticker)->capture_default_str();
    app.add_option("--start", start)->capture_default_str();
    app.add_option("--days", market.days)->capture_default_str();
    app.add_option("--hurst", market.hurst, "Hurst exponent of the return noise")->capture_default_str();
    app.add_option("--daily-vol", market.daily_vol)->capture_default_str();
    app.add_option("--iv", market.iv_level)->capture_default_str();
    app.add_option("--seed", market.seed)->capture_default_str();
  }
};

int run_synth(SynthFlags f) {
  f.market.start = rs::parse_date(f.start);
  const auto m = rs::make_synthetic_market(f.market);
  std::filesystem::create_directories(f.out_dir);
  const auto dir = std::filesystem::path(f.out_dir);
  std::ofstream prices(dir / "prices.csv");
  std::ofstream options(dir / "options.csv");
  if (!prices || !options) throw rs::Error(rs::ErrorCode::Io, "cannot write into '" + f.out_dir + "'");
  rs::write_price_series(prices, m.prices);
  rs::write_option_quotes(options, m.quotes);
  std::printf("wrote %zu prices and %zu quotes to %s\n", m.prices.dates.size(), m.quotes.size(), f.out_dir.c_str());
  return 0;
}

// Fast smoke checks of the numerical core.
int run_selftest() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
    if (!ok) ++failures;
  };

  {
    // Chen: signature of two segments equals the product of segment signatures
    const std::vector<double> a{0.3, -0.2}, b{0.1, 0.5};
    std::vector<double> ab{a[0] + b[0], a[1] + b[1]};
    const auto s = rs::chen_product(rs::segment_signature(a), rs::segment_signature(b));
    const auto l = rs::log_signature(s);
    const auto back = rs::tensor_exp(l);
    double err = 0.0;
    for (std::size_t i = 0; i < s.coords.size(); ++i) err = std::max(err, std::abs(s.coords[i] - back.coords[i]));
    check("log/exp round trip", err < 1e-12);
    check("level-1 is the total increment", std::abs(s.at(0) - ab[0]) < 1e-15 && std::abs(s.at(1) - ab[1]) < 1e-15);
  }
  {
    const auto map = rs::sample_rff(4, 64, 0.5, 1);
    const std::vector<double> x{0.1, 0.2, -0.3, 0.4};
    const auto phi = rs::rff_embed(x, map);
    double n2 = 0.0;
    for (double v : phi.features) n2 += v * v;
    check("rff self inner product is 1", std::abs(n2 - 1.0) < 1e-12);
  }
  check("regime at 0.4999 is rough", rs::select_regime(0.4999) == rs::Regime::Rough);
  check("regime at 0.5 is smooth", rs::select_regime(0.5) == rs::Regime::Smooth);
  {
    const auto b = rs::make_bounds({2.04, 0.01}, {2.39, 0.01}, 2.0);
    check("gap arithmetic", std::abs(b.gap - 0.35) < 1e-12 && std::abs(*b.gap_pct - 0.35 / 2.04) < 1e-15);
  }
  {
    rs::EngineParams p;
    rs::SimulationSpec spec;
    spec.paths = 4096;
    const auto e = rs::simulate_heston(p, spec);
    double sum = 0.0;
    for (std::size_t i = 0; i < e.paths(); ++i) sum += e.asset(i, e.steps());
    const double disc = std::exp(-p.r * spec.maturity_years) * sum / static_cast<double>(e.paths());
    check("heston discounted mean near spot", std::abs(disc - spec.spot) < 0.5);
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"American option bounds under time-varying roughness"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: hardware)");

  PriceFlags price_flags;
  auto* price = app.add_subcommand("price", "run the full pipeline and report price bounds");
  price_flags.add(*price);

  SimulateFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "simulate an engine and print per-step moments");
  sim_flags.add(*simulate);

  HurstFlags hurst_flags;
  auto* hurst = app.add_subcommand("hurst", "rolling Hurst series (and optional forecast)");
  hurst_flags.add(*hurst);

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "write a synthetic prices/options CSV pair");
  synth_flags.add(*synth);

  auto* selftest = app.add_subcommand("selftest", "quick numerical self checks");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) rs::set_thread_count(threads);

  try {
    if (*price) return run_price(price_flags);
    if (*simulate) return run_simulate(sim_flags);
    if (*hurst) return run_hurst(hurst_flags);
    if (*synth) return run_synth(synth_flags);
    if (*selftest) return run_selftest();
  } catch (const rs::StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const rs::Error& e) {
    const char* stage = *price ? "config" : *simulate ? "engines" : *hurst ? "roughness" : *synth ? "synthetic" : "selftest";
    std::fprintf(stderr, "error: [%s] %s\n", stage, e.what());
    return 1;
  }
  return 0;
}
