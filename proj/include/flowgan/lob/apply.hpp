#pragma once

#include <vector>

#include "flowgan/lob/book.hpp"

namespace flowgan::lob {

/// What happened when a single event went through the engine.
struct ApplyOutcome {
  std::vector<Fill> fills;
  Lots unfilled = 0;    // market residue
  Lots cancelled = 0;
  bool phantom = false;
};

/// Dispatches an OrderEvent to the matching book operation.
inline ApplyOutcome apply_event(BookState& book, const OrderEvent& ev, OrderId id) {
  ApplyOutcome out;
  switch (ev.kind) {
    case OrderKind::limit:
      if (!ev.price) throw RejectedEvent("limit order without price");
      out.fills = book.apply_limit(ev.side, *ev.price, ev.volume, id);
      break;
    case OrderKind::market: {
      auto r = book.apply_market(ev.side, ev.volume, id);
      out.fills = std::move(r.fills);
      out.unfilled = r.unfilled;
      break;
    }
    case OrderKind::cancel: {
      if (!ev.price) throw RejectedEvent("cancel without price");
      const auto r = book.apply_cancel(ev.side, *ev.price, ev.volume);
      out.cancelled = r.cancelled;
      out.phantom = r.phantom;
      break;
    }
  }
  return out;
}

}  // namespace flowgan::lob
