#pragma once

// Price-time priority limit order book.
//
// Two price-indexed ladders of FIFO queues. Limit orders that cross the
// opposite best price match immediately and any residue rests at the tail of
// its level. Cancels carry no order identity, so they remove volume from the
// youngest orders of a level first. A cancel aimed at an empty level is a
// no-op that bumps the phantom-cancel counter.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "flowgan/core/error.hpp"
#include "flowgan/lob/types.hpp"

namespace flowgan::lob {

class BookError : public Error {
 public:
  using Error::Error;
};

/// Raised for events the engine refuses outright (non-positive volume).
class RejectedEvent : public BookError {
 public:
  using BookError::BookError;
};

/// Raised when a quote is requested from an empty side.
class NoQuoteError : public BookError {
 public:
  using BookError::BookError;
};

struct Fill {
  OrderId maker = 0;
  OrderId taker = 0;
  PriceTicks price = 0;
  Lots volume = 0;
  std::uint64_t maker_seq = 0;  // book sequence number at which the maker rested
  Side taker_side = Side::bid;

  friend bool operator==(const Fill&, const Fill&) = default;
};

enum class ExecStatus : std::uint8_t { filled, unfilled_market };

struct MarketResult {
  std::vector<Fill> fills;
  Lots filled = 0;
  Lots unfilled = 0;  // residue left when the opposite side ran dry
  ExecStatus status = ExecStatus::filled;
};

struct CancelResult {
  Lots cancelled = 0;
  bool phantom = false;
};

struct LevelView {
  PriceTicks price = 0;
  Lots depth = 0;
  std::size_t orders = 0;
};

class BookState {
 public:
  struct Resting {
    OrderId id = 0;
    Lots remaining = 0;
    std::uint64_t seq = 0;
    friend bool operator==(const Resting&, const Resting&) = default;
  };
  struct Level {
    std::deque<Resting> queue;
    Lots depth = 0;
    friend bool operator==(const Level&, const Level&) = default;
  };

  explicit BookState(double tick_size = 0.01) : tick_size_(tick_size) {
    if (!(tick_size > 0.0)) throw BookError("tick size must be positive");
  }

  double tick_size() const noexcept { return tick_size_; }
  std::uint64_t next_seq() const noexcept { return next_seq_; }
  std::uint64_t phantom_cancels() const noexcept { return phantom_cancels_; }

  /// Submits a limit order. Crossing volume matches in price-time priority,
  /// the remainder rests at `price`.
  std::vector<Fill> apply_limit(Side side, PriceTicks price, Lots volume, OrderId id) {
    if (volume <= 0) throw RejectedEvent("limit order with non-positive volume");
    const std::uint64_t seq = next_seq_++;
    std::vector<Fill> fills;
    Lots left = volume;
    if (side == Side::bid) {
      left = match(asks_, side, left, id, fills, [price](PriceTicks p) { return p <= price; });
      if (left > 0) rest(bids_, price, left, id, seq);
    } else {
      left = match(bids_, side, left, id, fills, [price](PriceTicks p) { return p >= price; });
      if (left > 0) rest(asks_, price, left, id, seq);
    }
    return fills;
  }

  /// Executes a market order against the opposite side, best level outward.
  MarketResult apply_market(Side side, Lots volume, OrderId id = 0) {
    if (volume <= 0) throw RejectedEvent("market order with non-positive volume");
    ++next_seq_;
    MarketResult out;
    const auto any = [](PriceTicks) { return true; };
    const Lots left = side == Side::bid ? match(asks_, side, volume, id, out.fills, any)
                                        : match(bids_, side, volume, id, out.fills, any);
    out.filled = volume - left;
    out.unfilled = left;
    out.status = left > 0 ? ExecStatus::unfilled_market : ExecStatus::filled;
    return out;
  }

  /// Removes up to `volume` from the level, youngest orders first.
  CancelResult apply_cancel(Side side, PriceTicks price, Lots volume) {
    if (volume <= 0) throw RejectedEvent("cancel with non-positive volume");
    ++next_seq_;
    return side == Side::bid ? cancel(bids_, price, volume) : cancel(asks_, price, volume);
  }

  bool has_quote(Side side) const noexcept {
    return side == Side::bid ? !bids_.empty() : !asks_.empty();
  }
  bool two_sided() const noexcept { return !bids_.empty() && !asks_.empty(); }

  PriceTicks best_bid() const {
    if (bids_.empty()) throw NoQuoteError("bid side is empty");
    return bids_.begin()->first;
  }
  PriceTicks best_ask() const {
    if (asks_.empty()) throw NoQuoteError("ask side is empty");
    return asks_.begin()->first;
  }
  PriceTicks best(Side side) const { return side == Side::bid ? best_bid() : best_ask(); }

  /// (a + b) / 2 in ticks.
  double mid_ticks() const {
    return 0.5 * static_cast<double>(best_bid() + best_ask());
  }
  double mid_price() const { return Grid::scale(mid_ticks(), tick_size_); }

  /// Distance in ticks of an order at `price` from the opposite best quote:
  /// buys are measured from the best ask, sells from the best bid. Values
  /// of zero or below mean the order would cross.
  PriceTicks relative_price(Side order_side, PriceTicks price) const {
    return order_side == Side::bid ? best_ask() - price : price - best_bid();
  }

  /// Inverse of relative_price.
  PriceTicks absolute_price(Side order_side, PriceTicks q) const {
    return order_side == Side::bid ? best_ask() - q : best_bid() + q;
  }

  Lots depth_at(Side side, PriceTicks price) const {
    return side == Side::bid ? depth_in(bids_, price) : depth_in(asks_, price);
  }
  Lots total_depth(Side side) const noexcept { return side == Side::bid ? bid_total_ : ask_total_; }
  std::size_t level_count(Side side) const noexcept {
    return side == Side::bid ? bids_.size() : asks_.size();
  }

  /// Levels ordered best first.
  std::vector<LevelView> levels(Side side) const {
    std::vector<LevelView> out;
    const auto collect = [&out](const auto& ladder) {
      out.reserve(ladder.size());
      for (const auto& [p, lvl] : ladder) out.push_back({p, lvl.depth, lvl.queue.size()});
    };
    side == Side::bid ? collect(bids_) : collect(asks_);
    return out;
  }

  /// Orders resting at a level, oldest first.
  std::vector<Resting> queue_at(Side side, PriceTicks price) const {
    const auto grab = [price](const auto& ladder) -> std::vector<Resting> {
      auto it = ladder.find(price);
      if (it == ladder.end()) return {};
      return {it->second.queue.begin(), it->second.queue.end()};
    };
    return side == Side::bid ? grab(bids_) : grab(asks_);
  }

  /// Full structural audit; throws BookError on any violation.
  void check_invariants() const {
    if (two_sided() && !(best_bid() < best_ask())) throw BookError("crossed book");
    const auto audit = [](const auto& ladder, Lots expected_total, const char* name) {
      Lots total = 0;
      for (const auto& [p, lvl] : ladder) {
        if (lvl.queue.empty() || lvl.depth <= 0)
          throw BookError(std::string(name) + ": empty level present");
        Lots sum = 0;
        for (const auto& o : lvl.queue) {
          if (o.remaining <= 0) throw BookError(std::string(name) + ": non-positive resting volume");
          sum += o.remaining;
        }
        if (sum != lvl.depth) throw BookError(std::string(name) + ": level depth mismatch");
        total += sum;
      }
      if (total != expected_total) throw BookError(std::string(name) + ": side total mismatch");
    };
    audit(bids_, bid_total_, "bids");
    audit(asks_, ask_total_, "asks");
  }

  friend bool operator==(const BookState&, const BookState&) = default;

 private:
  template <class Ladder>
  static Lots depth_in(const Ladder& ladder, PriceTicks price) {
    auto it = ladder.find(price);
    return it == ladder.end() ? 0 : it->second.depth;
  }

  Lots& total_of(const std::map<PriceTicks, Level, std::greater<>>&) { return bid_total_; }
  Lots& total_of(const std::map<PriceTicks, Level>&) { return ask_total_; }

  template <class Ladder, class Crosses>
  Lots match(Ladder& ladder, Side taker_side, Lots left, OrderId taker, std::vector<Fill>& fills,
             Crosses crosses) {
    Lots& total = total_of(ladder);
    while (left > 0 && !ladder.empty() && crosses(ladder.begin()->first)) {
      auto level_it = ladder.begin();
      Level& lvl = level_it->second;
      while (left > 0 && !lvl.queue.empty()) {
        Resting& maker = lvl.queue.front();
        const Lots take = std::min(left, maker.remaining);
        fills.push_back({maker.id, taker, level_it->first, take, maker.seq, taker_side});
        maker.remaining -= take;
        lvl.depth -= take;
        total -= take;
        left -= take;
        if (maker.remaining == 0) lvl.queue.pop_front();
      }
      if (lvl.queue.empty()) ladder.erase(level_it);
    }
    return left;
  }

  template <class Ladder>
  void rest(Ladder& ladder, PriceTicks price, Lots volume, OrderId id, std::uint64_t seq) {
    Level& lvl = ladder[price];
    lvl.queue.push_back({id, volume, seq});
    lvl.depth += volume;
    total_of(ladder) += volume;
  }

  template <class Ladder>
  CancelResult cancel(Ladder& ladder, PriceTicks price, Lots volume) {
    auto it = ladder.find(price);
    if (it == ladder.end()) {
      ++phantom_cancels_;
      return {0, true};
    }
    Level& lvl = it->second;
    Lots left = volume;
    while (left > 0 && !lvl.queue.empty()) {
      Resting& youngest = lvl.queue.back();
      const Lots take = std::min(left, youngest.remaining);
      youngest.remaining -= take;
      left -= take;
      if (youngest.remaining == 0) lvl.queue.pop_back();
    }
    const Lots removed = volume - left;
    lvl.depth -= removed;
    total_of(ladder) -= removed;
    if (lvl.queue.empty()) ladder.erase(it);
    return {removed, false};
  }

  double tick_size_;
  std::map<PriceTicks, Level, std::greater<>> bids_;
  std::map<PriceTicks, Level> asks_;
  Lots bid_total_ = 0;
  Lots ask_total_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t phantom_cancels_ = 0;
};

}  // namespace flowgan::lob
