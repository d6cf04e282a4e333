#pragma once

// Synthetic ground truth with known first-order Markov token dynamics.
//
// MarkovChain is a plain row-stochastic matrix over token ids. The book-flow
// helpers build a chain over the order-event vocabulary (persistent market
// orders on top of a stationary background mix) and turn a sampled token
// stream into a clean, book-consistent event feed.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "flowgan/core/error.hpp"
#include "flowgan/core/rng.hpp"
#include "flowgan/simulate/materialize.hpp"
#include "flowgan/tokenize/vocabulary.hpp"

namespace flowgan::synthetic {

using tokenize::TokenId;

class MarkovChain {
 public:
  MarkovChain() = default;

  MarkovChain(std::vector<std::vector<double>> transition, std::vector<double> initial)
      : p_(std::move(transition)), init_(std::move(initial)) {
    const std::size_t n = p_.size();
    if (n == 0 || init_.size() != n) throw ConfigError("Markov chain needs a square matrix and initial law");
    normalize(init_);
    for (auto& row : p_) {
      if (row.size() != n) throw ConfigError("Markov chain transition matrix must be square");
      normalize(row);
    }
  }

  std::size_t size() const noexcept { return p_.size(); }
  const std::vector<double>& row(TokenId from) const { return p_.at(static_cast<std::size_t>(from)); }
  const std::vector<double>& initial() const noexcept { return init_; }
  double prob(TokenId from, TokenId to) const { return row(from).at(static_cast<std::size_t>(to)); }

  TokenId first(Rng& rng) const { return static_cast<TokenId>(sample_categorical(rng, init_)); }
  TokenId step(TokenId from, Rng& rng) const { return static_cast<TokenId>(sample_categorical(rng, row(from))); }

  /// `length` tokens continuing from `prev` (or from the initial law if prev < 0).
  std::vector<TokenId> sample(std::size_t length, Rng& rng, TokenId prev = -1) const {
    std::vector<TokenId> out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
      prev = prev < 0 ? first(rng) : step(prev, rng);
      out.push_back(prev);
    }
    return out;
  }

  /// -sum ln P(x_t | x_{t-1}) with x_0 = prev.
  double nll(std::span<const TokenId> seq, TokenId prev) const {
    double s = 0.0;
    for (TokenId x : seq) {
      s -= std::log(prob(prev, x));
      prev = x;
    }
    return s;
  }

  /// Stationary law by power iteration.
  std::vector<double> stationary(int iterations = 2000) const {
    std::vector<double> pi(size(), 1.0 / static_cast<double>(size())), next(size());
    for (int it = 0; it < iterations; ++it) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = 0; j < size(); ++j) next[j] += pi[i] * p_[i][j];
      pi.swap(next);
    }
    return pi;
  }

 private:
  static void normalize(std::vector<double>& w) {
    double s = 0.0;
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("Markov chain weights must be finite and >= 0");
      s += x;
    }
    if (!(s > 0.0)) throw ConfigError("Markov chain row has no mass");
    for (double& x : w) x /= s;
  }

  std::vector<std::vector<double>> p_;
  std::vector<double> init_;
};

/// Each row puts `weights` (in random column order) on distinct random
/// columns and spreads `floor` uniformly over all columns.
inline MarkovChain random_sparse_chain(std::size_t n, std::span<const double> weights, double floor, Rng& rng) {
  if (weights.size() > n) throw ConfigError("more row weights than states");
  std::vector<std::vector<double>> p(n, std::vector<double>(n, floor / static_cast<double>(n)));
  std::vector<std::size_t> cols(n);
  for (auto& row : p) {
    std::iota(cols.begin(), cols.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(cols[i - 1], cols[uniform_index(rng, i)]);
    for (std::size_t k = 0; k < weights.size(); ++k) row[cols[k]] += (1.0 - floor) * weights[k];
  }
  return MarkovChain(std::move(p), std::vector<double>(n, 1.0));
}

struct BookFlowSpec {
  int Q = 5;
  double limit_weight = 0.50;
  double cancel_weight = 0.36;
  double market_weight = 0.10;
  double eta_weight = 0.04;
  double level_decay = 0.7;        // weight ratio between q and q+1
  double market_persistence = 0.7;  // P(repeat) after a market token
  double persistence = 0.0;         // P(repeat) after any other token
  double event_rate = 2.0;          // events per second
  lob::Lots unit = 100'000'000;     // one size unit in lots
  int max_units = 3;                // sizes drawn uniformly from 1..max_units units
  int initial_depth_units = 6;      // depth per level of the starting book
  lob::PriceTicks initial_mid_ticks = 10'000;
  double tick_size = 0.01;

  void validate() const {
    if (Q < 1) throw ConfigError("Q must be at least 1");
    if (!(event_rate > 0.0)) throw ConfigError("event rate must be positive");
    if (max_units < 1 || initial_depth_units < 1 || unit < 1) throw ConfigError("sizes must be positive");
    if (!(market_persistence >= 0.0 && market_persistence < 1.0 && persistence >= 0.0 && persistence < 1.0))
      throw ConfigError("persistence must be in [0, 1)");
  }
};

/// Background mix: limit/cancel weights decay geometrically with q and are
/// split evenly between sides; after a market token the same token repeats
/// with probability market_persistence.
inline MarkovChain book_flow_chain(const tokenize::Vocabulary& vocab, const BookFlowSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(vocab.size());
  const int Q = vocab.max_relative_price();
  std::vector<double> base(n, 0.0);
  double norm = 0.0;
  for (int q = 1; q <= Q; ++q) norm += std::pow(spec.level_decay, q - 1);
  for (lob::Side s : {lob::Side::bid, lob::Side::ask}) {
    for (int q = 1; q <= Q; ++q) {
      const double w = std::pow(spec.level_decay, q - 1) / norm / 2.0;
      base[static_cast<std::size_t>(vocab.limit(s, q))] = spec.limit_weight * w;
      base[static_cast<std::size_t>(vocab.cancel(s, q))] = spec.cancel_weight * w;
    }
    base[static_cast<std::size_t>(vocab.market(s))] = spec.market_weight / 2.0;
    base[static_cast<std::size_t>(vocab.out_of_band(s))] = spec.eta_weight / 2.0;
  }
  std::vector<std::vector<double>> p(n, base);
  for (std::size_t i = 0; i < n; ++i) {
    const bool is_market = vocab.decode(static_cast<TokenId>(i)).cls == tokenize::TokenClass::market;
    const double rho = is_market ? spec.market_persistence : spec.persistence;
    double s = std::accumulate(base.begin(), base.end(), 0.0);
    for (double& x : p[i]) x *= (1.0 - rho) / s;
    p[i][i] += rho;
  }
  return MarkovChain(std::move(p), base);
}

/// Q levels per side around the configured mid with a one-tick spread
/// (bid = mid - 1, ask = mid + 1 when mid is the integer tick).
inline lob::BookState symmetric_book(const BookFlowSpec& spec) {
  spec.validate();
  lob::BookState book(spec.tick_size);
  const lob::Lots depth = spec.unit * spec.initial_depth_units;
  lob::OrderId id = 0;
  for (int k = 1; k <= spec.Q; ++k) {
    book.apply_limit(lob::Side::bid, spec.initial_mid_ticks - k, depth, ++id);
    book.apply_limit(lob::Side::ask, spec.initial_mid_ticks + k, depth, ++id);
  }
  return book;
}

/// The snapshot as limit events at `time`, best levels first, alternating sides.
inline std::vector<lob::OrderEvent> snapshot_events(const lob::BookState& book, double time) {
  std::vector<lob::OrderEvent> out;
  const auto bids = book.levels(lob::Side::bid), asks = book.levels(lob::Side::ask);
  for (std::size_t k = 0; k < std::max(bids.size(), asks.size()); ++k) {
    if (k < bids.size()) out.push_back({lob::OrderKind::limit, lob::Side::bid, bids[k].price, bids[k].depth, time});
    if (k < asks.size()) out.push_back({lob::OrderKind::limit, lob::Side::ask, asks[k].price, asks[k].depth, time});
  }
  return out;
}

struct SyntheticFeed {
  std::vector<lob::OrderEvent> events;  // snapshot followed by the flow
  std::vector<TokenId> tokens;          // chain output, one per flow step
  simulate::MaterializeCounters counters;
  std::size_t replenished = 0;          // limit orders injected to refill an emptied side
};

/// Samples `duration` seconds of flow from the chain with exponential gaps
/// and materializes it against the book, keeping only effective events. A
/// side emptied by the flow is refilled one tick from the opposite best so the
/// book never loses both quotes.
inline SyntheticFeed synthesize_feed(const MarkovChain& chain, const tokenize::Vocabulary& vocab,
                                     const BookFlowSpec& spec, double duration, Rng& rng,
                                     double start_time = 0.0) {
  spec.validate();
  if (chain.size() != static_cast<std::size_t>(vocab.size())) throw ConfigError("chain and vocabulary differ in size");
  SyntheticFeed out;
  const lob::BookState book = symmetric_book(spec);
  out.events = snapshot_events(book, start_time);
  simulate::Materializer mat(vocab, book, {simulate::EtaPolicy::q_plus_one, true});
  double t = start_time;
  TokenId prev = -1;
  for (;;) {
    t += exponential(rng, spec.event_rate);
    if (t >= start_time + duration) break;
    prev = prev < 0 ? chain.first(rng) : chain.step(prev, rng);
    out.tokens.push_back(prev);
    const lob::Lots vol = spec.unit * static_cast<lob::Lots>(1 + uniform_index(rng, static_cast<std::size_t>(spec.max_units)));
    if (auto ev = mat.next(prev, vol, t)) out.events.push_back(*ev);
    for (lob::Side side : {lob::Side::bid, lob::Side::ask}) {
      if (mat.book().has_quote(side) || !mat.book().has_quote(lob::opposite(side))) continue;
      if (auto ev = mat.next(vocab.limit(side, 1), spec.unit * spec.max_units, t)) out.events.push_back(*ev);
      ++out.replenished;
    }
  }
  out.counters = mat.counters();
  return out;
}

}  // namespace flowgan::synthetic
