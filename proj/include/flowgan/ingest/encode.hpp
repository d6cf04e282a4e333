#pragma once

// Turns a parsed event stream into tokens by walking it through a book.
//
// Encoding starts once the book is quoted on both sides; everything before
// that point only builds the initial snapshot. For each encoded event the
// token is computed against the book *before* the event is applied.

#include <span>
#include <vector>

#include "flowgan/lob/apply.hpp"
#include "flowgan/tokenize/vocabulary.hpp"

namespace flowgan::ingest {

struct WarmUp {
  lob::BookState book;
  std::size_t next_index = 0;  // first event not consumed by the warm-up
};

/// Applies events until the book is two-sided.
inline WarmUp warm_up(std::span<const lob::OrderEvent> events, double tick_size) {
  WarmUp w{lob::BookState(tick_size), 0};
  while (w.next_index < events.size() && !w.book.two_sided()) {
    lob::apply_event(w.book, events[w.next_index], w.next_index + 1);
    ++w.next_index;
  }
  if (!w.book.two_sided()) throw Error("feed never produces a two-sided book");
  return w;
}

struct EncodedFlow {
  std::vector<tokenize::TokenId> tokens;
  std::vector<lob::Lots> volumes;
  std::vector<double> times;
  /// Mid price after each event; held at the last two-sided value.
  std::vector<double> mids;
  double initial_mid = 0.0;
  double start_time = 0.0;
  std::size_t market_orders = 0;
  std::size_t phantom_cancels = 0;
  std::size_t unfilled_markets = 0;
  std::size_t one_sided_events = 0;
};

/// Encodes `events` starting from `book` (which is advanced in place).
inline EncodedFlow encode_feed(std::span<const lob::OrderEvent> events,
                               const tokenize::Vocabulary& vocab, lob::BookState& book,
                               double start_time, lob::OrderId first_id = 1) {
  if (!book.two_sided()) throw Error("encode_feed needs a two-sided starting book");
  EncodedFlow out;
  out.start_time = start_time;
  out.initial_mid = book.mid_price();
  out.tokens.reserve(events.size());
  out.volumes.reserve(events.size());
  out.times.reserve(events.size());
  out.mids.reserve(events.size());
  double mid = out.initial_mid;
  lob::OrderId id = first_id;
  for (const auto& ev : events) {
    out.tokens.push_back(vocab.encode_event(ev, book));
    out.volumes.push_back(ev.volume);
    out.times.push_back(ev.time);
    const auto r = lob::apply_event(book, ev, id++);
    if (ev.kind == lob::OrderKind::market) ++out.market_orders;
    if (r.phantom) ++out.phantom_cancels;
    if (r.unfilled > 0) ++out.unfilled_markets;
    if (book.two_sided())
      mid = book.mid_price();
    else
      ++out.one_sided_events;
    out.mids.push_back(mid);
  }
  return out;
}

/// Inter-arrival gaps between consecutive times, the first measured from `start`.
inline std::vector<double> gaps_of(std::span<const double> times, double start) {
  std::vector<double> gaps;
  gaps.reserve(times.size());
  double prev = start;
  for (double t : times) {
    gaps.push_back(t - prev);
    prev = t;
  }
  return gaps;
}

}  // namespace flowgan::ingest
