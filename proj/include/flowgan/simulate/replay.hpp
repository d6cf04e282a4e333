#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "flowgan/core/error.hpp"
#include "flowgan/lob/apply.hpp"

namespace flowgan::simulate {

struct ReplayCounters {
  std::size_t events = 0;
  std::size_t market_orders = 0;
  std::size_t phantom_cancels = 0;
  std::size_t unfilled_markets = 0;
  std::size_t one_sided = 0;  // events after which the mid had to be held
  friend bool operator==(const ReplayCounters&, const ReplayCounters&) = default;
};

struct ReplayResult {
  /// times[0] / mids[0] are the start time and the initial mid; entry k+1 is
  /// the mid right after event k. While one side is empty the last two-sided
  /// mid is held.
  std::vector<double> times;
  std::vector<double> mids;
  std::vector<double> trade_times;  // market order arrival times
  lob::BookState final_book;
  ReplayCounters counters;
};

inline ReplayResult replay(std::span<const lob::OrderEvent> events, lob::BookState book, double start_time) {
  if (!book.two_sided()) throw Error("replay needs a two-sided initial book");
  ReplayResult out;
  out.times.reserve(events.size() + 1);
  out.mids.reserve(events.size() + 1);
  double mid = book.mid_price();
  out.times.push_back(start_time);
  out.mids.push_back(mid);
  lob::OrderId id = 0;
  for (const auto& ev : events) {
    const auto r = lob::apply_event(book, ev, ++id);
    ++out.counters.events;
    if (ev.kind == lob::OrderKind::market) {
      ++out.counters.market_orders;
      out.trade_times.push_back(ev.time);
    }
    if (r.phantom) ++out.counters.phantom_cancels;
    if (r.unfilled > 0) ++out.counters.unfilled_markets;
    if (book.two_sided())
      mid = book.mid_price();
    else
      ++out.counters.one_sided;
    out.times.push_back(ev.time);
    out.mids.push_back(mid);
  }
  out.final_book = std::move(book);
  return out;
}

/// Mid prices sampled at the end of each fixed interval.
struct MidPriceSeries {
  double interval = 60.0;
  double start_time = 0.0;
  std::vector<double> values;          // values[k]: mid at start_time + (k+1)*interval
  std::vector<std::uint32_t> trades;   // market orders inside interval k
  friend bool operator==(const MidPriceSeries&, const MidPriceSeries&) = default;
};

inline std::size_t interval_count(double horizon, double interval) {
  if (!(interval > 0.0)) throw ConfigError("interval must be positive");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
  return static_cast<std::size_t>(std::ceil(horizon / interval - 1e-9));
}

/// Last-observation-carried-forward sampling of a trajectory at the interval
/// boundaries. Interval k covers (start + k*dt, start + (k+1)*dt], so an
/// event exactly on a boundary belongs to the earlier interval.
inline MidPriceSeries resample(std::span<const double> times, std::span<const double> mids,
                               double start_time, double interval, double horizon,
                               std::span<const double> trade_times = {}) {
  if (times.size() != mids.size() || times.empty())
    throw Error("resample needs a non-empty trajectory with matching times");
  const std::size_t n = interval_count(horizon, interval);
  MidPriceSeries s;
  s.interval = interval;
  s.start_time = start_time;
  s.values.resize(n);
  s.trades.assign(n, 0);
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double boundary = start_time + static_cast<double>(k + 1) * interval;
    while (i + 1 < times.size() && times[i + 1] <= boundary) ++i;
    s.values[k] = mids[i];
  }
  for (double t : trade_times) {
    const double x = (t - start_time) / interval;
    const auto k = x <= 0.0 ? std::size_t{0} : static_cast<std::size_t>(std::ceil(x)) - 1;
    if (k < n) ++s.trades[k];
  }
  return s;
}

inline MidPriceSeries resample(const ReplayResult& r, double interval, double horizon) {
  return resample(r.times, r.mids, r.times.front(), interval, horizon, r.trade_times);
}

}  // namespace flowgan::simulate
