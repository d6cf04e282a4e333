#pragma once

// Token flow -> priced, sized, timestamped order events.
//
// Each token is decoded against the book as it stands after all earlier
// events: relative prices are turned back into absolute ticks from the
// opposite best quote, a volume is drawn, and the event is applied to an
// internal copy of the book so the next token sees the updated state.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "flowgan/core/error.hpp"
#include "flowgan/lob/apply.hpp"
#include "flowgan/poisson/benchmark.hpp"
#include "flowgan/tokenize/vocabulary.hpp"

namespace flowgan::simulate {

using tokenize::TokenId;

/// How out-of-band (eta) tokens become events.
enum class EtaPolicy { q_plus_one, drop };

inline EtaPolicy parse_eta_policy(std::string_view s) {
  if (s == "q_plus_one") return EtaPolicy::q_plus_one;
  if (s == "drop") return EtaPolicy::drop;
  throw ConfigError("unknown eta policy '" + std::string(s) + "'");
}

inline std::string_view to_string(EtaPolicy p) { return p == EtaPolicy::drop ? "drop" : "q_plus_one"; }

struct MaterializeOptions {
  EtaPolicy eta = EtaPolicy::q_plus_one;
  /// Emit only what the book can absorb: cancels are clamped to the level
  /// depth (cancels at empty levels dropped) and markets to the opposite
  /// depth. Used to build clean synthetic feeds.
  bool effective_only = false;
  /// Once both sides are empty no token has a reference quote and the flow
  /// would stall for good. With this set, limit and cancel tokens are then
  /// priced from the last two-sided quotes instead of being skipped.
  bool reanchor_empty_book = true;
};

struct MaterializeCounters {
  std::size_t emitted = 0;
  std::size_t skipped_unquoted = 0;  // reference side empty
  std::size_t dropped_eta = 0;
  std::size_t phantom_cancels = 0;
  std::size_t unfilled_markets = 0;
  std::size_t clamped = 0;  // effective_only adjustments (clamped or dropped)
  std::size_t reanchored = 0;  // priced from the last quotes of an empty book
  friend bool operator==(const MaterializeCounters&, const MaterializeCounters&) = default;
};

class Materializer {
 public:
  Materializer(const tokenize::Vocabulary& vocab, lob::BookState book, MaterializeOptions opts = {})
      : vocab_(vocab), book_(std::move(book)), opts_(opts) {
    remember_quotes();
  }

  /// Decodes one token against the current book and applies it. Returns the
  /// emitted event, or nothing when the token was skipped.
  std::optional<lob::OrderEvent> next(TokenId token, lob::Lots volume, double time) {
    if (volume <= 0) throw Error("materialized volume must be positive");
    const tokenize::TokenInfo info = vocab_.decode(token);
    lob::OrderEvent ev;
    ev.time = time;
    ev.volume = volume;
    switch (info.cls) {
      case tokenize::TokenClass::market: {
        const lob::Side hit = info.side;
        if (!book_.has_quote(hit)) return skip_unquoted();
        ev.kind = lob::OrderKind::market;
        ev.side = lob::opposite(hit);
        if (opts_.effective_only && ev.volume > book_.total_depth(hit)) {
          ev.volume = book_.total_depth(hit);
          ++counters_.clamped;
        }
        break;
      }
      case tokenize::TokenClass::limit:
      case tokenize::TokenClass::cancel:
      case tokenize::TokenClass::out_of_band: {
        int q = info.q;
        ev.kind = info.cls == tokenize::TokenClass::cancel ? lob::OrderKind::cancel : lob::OrderKind::limit;
        if (info.cls == tokenize::TokenClass::out_of_band) {
          if (opts_.eta == EtaPolicy::drop) {
            ++counters_.dropped_eta;
            return std::nullopt;
          }
          q = vocab_.max_relative_price() + 1;
        }
        ev.side = info.side;
        if (book_.has_quote(lob::opposite(info.side))) {
          ev.price = book_.absolute_price(info.side, q);
        } else if (opts_.reanchor_empty_book && last_quotes_ && !book_.has_quote(info.side)) {
          ev.price = info.side == lob::Side::bid ? last_quotes_->second - q : last_quotes_->first + q;
          ++counters_.reanchored;
        } else {
          return skip_unquoted();
        }
        if (opts_.effective_only && ev.kind == lob::OrderKind::cancel) {
          const lob::Lots depth = book_.depth_at(ev.side, *ev.price);
          if (depth == 0) {
            ++counters_.clamped;
            return std::nullopt;
          }
          if (ev.volume > depth) {
            ev.volume = depth;
            ++counters_.clamped;
          }
        }
        break;
      }
    }
    const auto r = lob::apply_event(book_, ev, ++next_id_);
    if (r.phantom) ++counters_.phantom_cancels;
    if (r.unfilled > 0) ++counters_.unfilled_markets;
    ++counters_.emitted;
    remember_quotes();
    return ev;
  }

  const lob::BookState& book() const noexcept { return book_; }
  const MaterializeCounters& counters() const noexcept { return counters_; }

 private:
  std::optional<lob::OrderEvent> skip_unquoted() {
    ++counters_.skipped_unquoted;
    return std::nullopt;
  }

  void remember_quotes() {
    if (book_.two_sided()) last_quotes_.emplace(book_.best_bid(), book_.best_ask());
  }

  tokenize::Vocabulary vocab_;
  lob::BookState book_;
  MaterializeOptions opts_;
  MaterializeCounters counters_;
  lob::OrderId next_id_ = 0;
  std::optional<std::pair<lob::PriceTicks, lob::PriceTicks>> last_quotes_;  // (bid, ask)
};

struct MaterializedFlow {
  std::vector<lob::OrderEvent> events;
  MaterializeCounters counters;
};

/// Materializes a token flow whose timing comes from `next_gap()` (one gap
/// per token, accumulated from `start_time`). `next_volume()` yields lots.
template <class VolumeFn, class GapFn>
MaterializedFlow materialize(std::span<const TokenId> tokens, const lob::BookState& book,
                             const tokenize::Vocabulary& vocab, VolumeFn&& next_volume,
                             GapFn&& next_gap, double start_time, MaterializeOptions opts = {}) {
  Materializer m(vocab, book, opts);
  MaterializedFlow out;
  out.events.reserve(tokens.size());
  double t = start_time;
  for (TokenId tok : tokens) {
    t += next_gap();
    if (auto ev = m.next(tok, next_volume(), t)) out.events.push_back(*ev);
  }
  out.counters = m.counters();
  return out;
}

/// Materializes a flow that already carries its own arrival times (the
/// Poisson benchmark); times are offsets from `start_time`.
template <class VolumeFn>
MaterializedFlow materialize_timed(std::span<const poisson::TimedToken> flow, const lob::BookState& book,
                                   const tokenize::Vocabulary& vocab, VolumeFn&& next_volume,
                                   double start_time, MaterializeOptions opts = {}) {
  Materializer m(vocab, book, opts);
  MaterializedFlow out;
  out.events.reserve(flow.size());
  for (const auto& tt : flow)
    if (auto ev = m.next(tt.token, next_volume(), start_time + tt.time)) out.events.push_back(*ev);
  out.counters = m.counters();
  return out;
}

}  // namespace flowgan::simulate
