#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "flowgan/core/error.hpp"
#include "flowgan/stats/tests.hpp"

namespace flowgan::stats {

/// v_r: realized volatility, v_p: realized volatility per trade,
/// v_d: intraday (high-low range) volatility.
struct VolatilityTriple {
  double realized = 0.0;
  double per_trade = 0.0;
  double intraday = 0.0;
};

/// v_r = sqrt(sum r_i^2) over interval log-returns,
/// v_p = sqrt(sum r_i^2 / max(trades, 1)),
/// v_d = (max p - min p) / p_first.
inline VolatilityTriple volatilities(std::span<const double> prices, std::size_t trade_count) {
  if (prices.size() < 2) throw Error("volatility needs at least two prices");
  const auto r = log_returns(prices);
  double ss = 0.0;
  for (double x : r) ss += x * x;
  const auto [lo, hi] = std::minmax_element(prices.begin(), prices.end());
  VolatilityTriple v;
  v.realized = std::sqrt(ss);
  v.per_trade = std::sqrt(ss / static_cast<double>(std::max<std::size_t>(trade_count, 1)));
  v.intraday = (*hi - *lo) / prices.front();
  return v;
}

}  // namespace flowgan::stats
