#pragma once

#include <fstream>
#include <string>

#include "oracles.hpp"
#include "roughstop/pipeline.hpp"
#include "roughstop/synthetic.hpp"

namespace fixture {

// Writes a synthetic prices/options pair into dir and returns a pipeline
// config pointing at it, sized for quick runs.
inline roughstop::PipelineConfig synthetic_config(const oracle::TempDir& dir, double hurst = 0.3,
                                                  std::uint64_t seed = 11) {
  roughstop::SyntheticMarketConfig m;
  m.ticker = "SYN";
  m.hurst = hurst;
  m.seed = seed;
  m.days = 400;
  m.dtes = {10, 21};
  m.strikes_each_side = 2;
  const auto market = roughstop::make_synthetic_market(m);
  {
    std::ofstream p(dir.file("prices.csv"));
    roughstop::write_price_series(p, market.prices);
    std::ofstream o(dir.file("options.csv"));
    roughstop::write_option_quotes(o, market.quotes);
  }
  roughstop::PipelineConfig c;
  c.prices_path = dir.file("prices.csv");
  c.options_path = dir.file("options.csv");
  c.ticker = "SYN";
  // leave 20 business days after the quote date for realised diagnostics
  c.quote_date = roughstop::format_date(market.prices.dates[market.prices.dates.size() - 21]);
  c.dte = 10;
  c.paths = 1024;
  c.gbt_rounds = 30;
  c.dual_iters = 30;
  c.mlp_epochs = 3;
  c.rff_dim = 32;
  return c;
}

}  // namespace fixture
