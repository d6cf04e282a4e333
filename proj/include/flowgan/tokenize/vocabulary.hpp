#pragma once

// Discrete order-event alphabet.
//
// For a maximum relative price Q the alphabet holds 4Q + 4 tokens laid out as
//   [l_B,1..Q | l_A,1..Q | c_B,1..Q | c_A,1..Q | mu_B | mu_A | eta_B | eta_A]
// l = limit, c = cancel, mu = market, eta = limit/cancel more than Q ticks out.
// mu_B is a market order arriving at the best bid (a sell), mu_A one arriving
// at the best ask (a buy).

#include <cstdint>
#include <string>
#include <vector>

#include "flowgan/core/error.hpp"
#include "flowgan/lob/book.hpp"

namespace flowgan::tokenize {

using TokenId = std::int32_t;

enum class TokenClass : std::uint8_t { limit, cancel, market, out_of_band };

/// Decoded token: `q` is the relative price for limit/cancel tokens, 0 otherwise.
/// `side` is the book side the token refers to (for mu tokens, the side hit).
struct TokenInfo {
  TokenClass cls = TokenClass::limit;
  lob::Side side = lob::Side::bid;
  int q = 0;
  friend bool operator==(const TokenInfo&, const TokenInfo&) = default;
};

class EncodeError : public Error {
 public:
  using Error::Error;
};

constexpr int vocab_size(int max_relative_price) {
  if (max_relative_price < 1) throw ConfigError("Q must be at least 1");
  return 4 * max_relative_price + 4;
}

class Vocabulary {
 public:
  explicit Vocabulary(int max_relative_price = 10)
      : q_max_(max_relative_price), size_(vocab_size(max_relative_price)) {}

  int max_relative_price() const noexcept { return q_max_; }
  int size() const noexcept { return size_; }
  bool valid(TokenId id) const noexcept { return id >= 0 && id < size_; }

  TokenId limit(lob::Side side, int q) const { return in_band(0, side, q); }
  TokenId cancel(lob::Side side, int q) const { return in_band(2, side, q); }
  TokenId market(lob::Side side_hit) const noexcept {
    return 4 * q_max_ + (side_hit == lob::Side::bid ? 0 : 1);
  }
  TokenId out_of_band(lob::Side side) const noexcept {
    return 4 * q_max_ + 2 + (side == lob::Side::bid ? 0 : 1);
  }

  TokenInfo decode(TokenId id) const {
    if (!valid(id)) throw EncodeError("token id " + std::to_string(id) + " out of range");
    const int block = id / q_max_;
    if (block < 4) {
      return {block < 2 ? TokenClass::limit : TokenClass::cancel,
              block % 2 == 0 ? lob::Side::bid : lob::Side::ask, id % q_max_ + 1};
    }
    const int tail = id - 4 * q_max_;
    return {tail < 2 ? TokenClass::market : TokenClass::out_of_band,
            tail % 2 == 0 ? lob::Side::bid : lob::Side::ask, 0};
  }

  TokenId encode(const TokenInfo& info) const {
    switch (info.cls) {
      case TokenClass::limit: return limit(info.side, info.q);
      case TokenClass::cancel: return cancel(info.side, info.q);
      case TokenClass::market: return market(info.side);
      case TokenClass::out_of_band: return out_of_band(info.side);
    }
    throw EncodeError("unknown token class");
  }

  /// Names such as "l_B_3", "c_A_1", "mu_B", "eta_A".
  std::string name(TokenId id) const {
    const TokenInfo t = decode(id);
    const char s = t.side == lob::Side::bid ? 'B' : 'A';
    switch (t.cls) {
      case TokenClass::limit: return std::string("l_") + s + "_" + std::to_string(t.q);
      case TokenClass::cancel: return std::string("c_") + s + "_" + std::to_string(t.q);
      case TokenClass::market: return std::string("mu_") + s;
      case TokenClass::out_of_band: return std::string("eta_") + s;
    }
    return {};
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(size_));
    for (TokenId id = 0; id < size_; ++id) out.push_back(name(id));
    return out;
  }

  /// Maps an order event to its token given the book *before* the event.
  ///
  /// Limit and cancel events are priced relative to the opposite best quote;
  /// anything beyond Q ticks, or arriving while that quote is absent, becomes
  /// eta. A marketable limit (relative price <= 0) is encoded as the market
  /// token it behaves like. Market buys hit the ask (mu_A), sells the bid (mu_B).
  TokenId encode_event(const lob::OrderEvent& ev, const lob::BookState& book) const {
    if (ev.volume <= 0) throw EncodeError("event with non-positive volume");
    const lob::Side side = ev.side;
    const lob::Side reference = lob::opposite(side);
    switch (ev.kind) {
      case lob::OrderKind::market:
        return market(reference);
      case lob::OrderKind::limit:
      case lob::OrderKind::cancel: {
        if (!ev.price) throw EncodeError("limit/cancel event without a price");
        if (!book.has_quote(reference)) return out_of_band(side);
        const lob::PriceTicks q = book.relative_price(side, *ev.price);
        if (q <= 0) {
          if (ev.kind == lob::OrderKind::cancel)
            throw EncodeError("cancel priced at or through the opposite quote");
          return market(reference);
        }
        if (q > q_max_) return out_of_band(side);
        return ev.kind == lob::OrderKind::limit ? limit(side, static_cast<int>(q))
                                                : cancel(side, static_cast<int>(q));
      }
    }
    throw EncodeError("unknown order kind");
  }

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  TokenId in_band(int base_block, lob::Side side, int q) const {
    if (q < 1 || q > q_max_) throw EncodeError("relative price " + std::to_string(q) + " outside 1..Q");
    return (base_block + (side == lob::Side::bid ? 0 : 1)) * q_max_ + (q - 1);
  }

  int q_max_;
  int size_;
};

enum class Origin : std::uint8_t { real, generated, start };

/// Fixed-length token window (real X, generated Y, or start sequence).
struct FlowSequence {
  std::vector<TokenId> tokens;
  Origin origin = Origin::real;

  std::size_t size() const noexcept { return tokens.size(); }

  void validate(const Vocabulary& vocab, std::size_t length) const {
    if (tokens.size() != length)
      throw EncodeError("sequence length " + std::to_string(tokens.size()) + " != " +
                        std::to_string(length));
    for (TokenId t : tokens)
      if (!vocab.valid(t)) throw EncodeError("token id " + std::to_string(t) + " out of range");
  }
};

}  // namespace flowgan::tokenize
