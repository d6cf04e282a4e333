#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>

#include "flowgan/core/error.hpp"

namespace flowgan::lob {

/// Prices are integer multiples of the tick size.
using PriceTicks = std::int64_t;
/// Volumes are integer multiples of the lot size (1e-8 units by default).
using Lots = std::int64_t;
using OrderId = std::uint64_t;

inline constexpr double kDefaultLotSize = 1e-8;

/// Side of the order's owner: `bid` is a buy, `ask` is a sell.
enum class Side : std::uint8_t { bid, ask };
enum class OrderKind : std::uint8_t { limit, market, cancel };

constexpr Side opposite(Side s) noexcept { return s == Side::bid ? Side::ask : Side::bid; }

constexpr std::string_view to_string(Side s) noexcept { return s == Side::bid ? "bid" : "ask"; }

constexpr std::string_view to_string(OrderKind k) noexcept {
  switch (k) {
    case OrderKind::limit: return "limit";
    case OrderKind::market: return "market";
    case OrderKind::cancel: return "cancel";
  }
  return "?";
}

struct OrderEvent {
  OrderKind kind = OrderKind::limit;
  Side side = Side::bid;
  std::optional<PriceTicks> price;  // absent for market orders
  Lots volume = 0;
  double time = 0.0;  // seconds since epoch

  friend bool operator==(const OrderEvent&, const OrderEvent&) = default;
};

/// Converts between currency prices/sizes and the integer grid.
struct Grid {
  double tick_size = 0.01;
  double lot_size = kDefaultLotSize;

  PriceTicks to_ticks(double price) const {
    const double x = price / tick_size;
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-6 * std::max(1.0, std::abs(x)))
      throw Error("price " + std::to_string(price) + " is not on the tick grid");
    return static_cast<PriceTicks>(r);
  }
  double to_price(PriceTicks ticks) const { return scale(static_cast<double>(ticks), tick_size); }
  double to_price(double ticks) const { return scale(ticks, tick_size); }

  Lots to_lots(double size) const { return static_cast<Lots>(std::llround(size / lot_size)); }
  double to_size(Lots lots) const { return scale(static_cast<double>(lots), lot_size); }

  /// x * unit, computed as x / (1 / unit) when 1 / unit is an integer so that
  /// decimal grids print cleanly (9999 ticks of 0.01 -> 99.99).
  static double scale(double x, double unit) {
    const double inv = std::round(1.0 / unit);
    if (inv >= 1.0 && std::abs(1.0 / unit - inv) < 1e-9 * inv) return x / inv;
    return x * unit;
  }
};

}  // namespace flowgan::lob
