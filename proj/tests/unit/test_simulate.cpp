#include <gtest/gtest.h>

#include "flowgan/ingest/encode.hpp"
#include "flowgan/simulate/paths.hpp"
#include "flowgan/synthetic/markov_flow.hpp"

using namespace flowgan;
using namespace flowgan::simulate;
using lob::OrderKind;
using lob::Side;

namespace {

lob::BookState ladder(int levels = 5, lob::Lots depth = 10) {
  lob::BookState b(0.01);
  lob::OrderId id = 0;
  for (int k = 1; k <= levels; ++k) {
    b.apply_limit(Side::bid, 5470 - k, depth, ++id);
    b.apply_limit(Side::ask, 5470 + k, depth, ++id);
  }
  return b;
}

}  // namespace

TEST(Materialize, AllMarketFlowGivesMarketOrders) {
  const tokenize::Vocabulary v(5);
  std::vector<TokenId> toks(6, v.market(Side::bid));
  const auto out = materialize(toks, ladder(), v, [] { return lob::Lots{1}; }, [] { return 1.0; }, 0.0);
  ASSERT_EQ(out.events.size(), 6u);
  for (const auto& e : out.events) {
    EXPECT_EQ(e.kind, OrderKind::market);
    EXPECT_EQ(e.side, Side::ask);
  }
}

TEST(Materialize, TimestampsIncreaseAndPricesInvertRelative) {
  const tokenize::Vocabulary v(5);
  std::vector<TokenId> toks{v.limit(Side::bid, 3), v.limit(Side::ask, 2)};
  const auto out = materialize(toks, ladder(), v, [] { return lob::Lots{4}; }, [] { return 0.5; }, 10.0);
  ASSERT_EQ(out.events.size(), 2u);
  EXPECT_EQ(*out.events[0].price, 5468);  // 54.71 - 3 ticks
  EXPECT_EQ(*out.events[1].price, 5471);  // best bid 54.69 + 2 ticks
  EXPECT_DOUBLE_EQ(out.events[0].time, 10.5);
  EXPECT_LT(out.events[0].time, out.events[1].time);
}

TEST(Materialize, UnquotedSideSkippedAndEtaPolicies) {
  const tokenize::Vocabulary v(2);
  lob::BookState one(0.01);
  one.apply_limit(Side::bid, 100, 5, 1);
  Materializer m(v, one);
  EXPECT_FALSE(m.next(v.limit(Side::bid, 1), 1, 1.0).has_value());
  EXPECT_EQ(m.counters().skipped_unquoted, 1u);

  const auto book = ladder();
  Materializer q(v, book);
  const auto ev = q.next(v.out_of_band(Side::bid), 3, 1.0);
  ASSERT_TRUE(ev.has_value());
  EXPECT_EQ(*ev->price, 5471 - 3);
  Materializer d(v, book, {EtaPolicy::drop, false});
  EXPECT_FALSE(d.next(v.out_of_band(Side::ask), 3, 1.0).has_value());
  EXPECT_EQ(d.counters().dropped_eta, 1u);
}

TEST(Replay, EmptyAndMarketMovesMid) {
  const auto book = ladder(2, 10);
  const auto r0 = replay({}, book, 0.0);
  ASSERT_EQ(r0.mids.size(), 1u);
  EXPECT_NEAR(r0.mids[0], 54.70, 1e-12);
  std::vector<lob::OrderEvent> ev{{OrderKind::market, Side::bid, std::nullopt, 10, 1.0}};
  const auto r = replay(ev, book, 0.0);
  EXPECT_NEAR(r.mids.back(), 54.705, 1e-12);
  EXPECT_EQ(r.counters.market_orders, 1u);
  EXPECT_TRUE(replay(ev, book, 0.0).final_book == r.final_book);
}

TEST(Resample, ConstantCarryAndBoundary) {
  const std::vector<double> t{0.0}, m{5.0};
  const auto s = resample(t, m, 0.0, 60.0, 300.0);
  EXPECT_EQ(s.values, std::vector<double>(5, 5.0));

  const std::vector<double> times{0.0, 60.0, 61.0, 200.0}, mids{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> trades{60.0, 61.0};
  const auto r = resample(times, mids, 0.0, 60.0, 240.0, trades);
  ASSERT_EQ(r.values.size(), 4u);
  EXPECT_DOUBLE_EQ(r.values[0], 2.0);  // event at t = 60 belongs to interval 0
  EXPECT_DOUBLE_EQ(r.values[1], 3.0);
  EXPECT_DOUBLE_EQ(r.values[2], 3.0);  // nothing in (120, 180]
  EXPECT_DOUBLE_EQ(r.values[3], 4.0);
  EXPECT_EQ(r.trades[0], 1u);
  EXPECT_EQ(r.trades[1], 1u);
  EXPECT_EQ(interval_count(90.0, 60.0), 2u);
}

TEST(ChainGenerate, WindowsAndDeterminism) {
  Rng init(1);
  const seqgan::Generator g(seqgan::GeneratorShape{6, 4, 4}, init);
  const std::vector<TokenId> start{1, 2, 3};
  Rng a(5), b(5);
  EXPECT_TRUE(chain_generate(g, start, 0, 7, a).empty());
  const auto one = chain_generate(g, start, 1, 7, a);
  EXPECT_EQ(one, seqgan::generate(g, start, 7, b).tokens);
  Rng d(9), e(9);
  const auto three = chain_generate(g, start, 3, 7, d);
  EXPECT_EQ(three.size(), 21u);
  EXPECT_EQ(three, chain_generate(g, start, 3, 7, e));
}

TEST(RunPaths, CountLengthAndSeeds) {
  const tokenize::Vocabulary v(5);
  synthetic::BookFlowSpec spec;
  const auto chain = synthetic::book_flow_chain(v, spec);
  std::vector<TokenId> toks;
  Rng rng(2);
  toks = chain.sample(5000, rng);
  const auto rates = poisson::fit_rates(toks, 2500.0, v.size());
  const std::vector<lob::Lots> vols{spec.unit, 2 * spec.unit};
  const auto volumes = ingest::fit_empirical<lob::Lots>(vols);
  SimConfig cfg;
  cfg.horizon = 1800.0;
  cfg.path_count = 1;
  cfg.seed = 4;
  cfg.initial_book = synthetic::symmetric_book(spec);
  const FlowModel model = PoissonFlowModel{&rates};
  const auto single = run_paths(model, v, volumes, cfg);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].series.values.size(), 30u);
  cfg.path_count = 3;
  const auto a = run_paths(model, v, volumes, cfg), b = run_paths(model, v, volumes, cfg);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].series, b[i].series);
    EXPECT_EQ(a[i].seed, derive_seed(4, i));
  }
  EXPECT_EQ(a[0].series, single[0].series);
  cfg.path_count = 0;
  EXPECT_THROW(run_paths(model, v, volumes, cfg), ConfigError);
}

TEST(RunPaths, SeqganModelProducesSeries) {
  const tokenize::Vocabulary v(3);
  Rng init(3);
  const seqgan::Generator g(seqgan::GeneratorShape{v.size(), 4, 4}, init);
  std::vector<tokenize::FlowSequence> starts{{{0, 1, 2, 3}, tokenize::Origin::start}};
  const std::vector<double> gaps{0.5, 1.0};
  const auto gap_s = ingest::fit_empirical<double>(gaps);
  const std::vector<lob::Lots> vols{5};
  const auto vol_s = ingest::fit_empirical<lob::Lots>(vols);
  SimConfig cfg;
  cfg.horizon = 600.0;
  cfg.path_count = 2;
  cfg.initial_book = ladder(3, 20);
  const FlowModel model = SeqganFlowModel{&g, starts, 10, &gap_s};
  const auto r = run_paths(model, v, vol_s, cfg);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].series.values.size(), 10u);
  for (double x : r[0].series.values) EXPECT_GT(x, 0.0);
}

TEST(SelfConsistency, EncodeMaterializeReplayReproducesMids) {
  const tokenize::Vocabulary v(5);
  synthetic::BookFlowSpec spec;
  const auto chain = synthetic::book_flow_chain(v, spec);
  Rng rng(21);
  const auto feed = synthetic::synthesize_feed(chain, v, spec, 1800.0, rng);
  auto warm = ingest::warm_up(feed.events, 0.01);
  const auto book0 = warm.book;
  const auto rest = std::span(feed.events).subspan(warm.next_index);
  auto book = warm.book;
  const auto enc = ingest::encode_feed(rest, v, book, 0.0);
  EXPECT_EQ(enc.phantom_cancels, 0u);
  const auto gaps = ingest::gaps_of(enc.times, 0.0);
  std::size_t kv = 0, kg = 0;
  const auto mat = materialize(enc.tokens, book0, v, [&] { return enc.volumes[kv++]; },
                               [&] { return gaps[kg++]; }, 0.0);
  EXPECT_EQ(mat.counters.emitted, enc.tokens.size());
  const auto rep = replay(mat.events, book0, 0.0);
  ASSERT_EQ(rep.mids.size(), enc.mids.size() + 1);
  for (std::size_t i = 0; i < enc.mids.size(); ++i) ASSERT_EQ(rep.mids[i + 1], enc.mids[i]) << i;
}

TEST(Materialize, EmptyBookReanchorsOnLastQuotes) {
  const tokenize::Vocabulary v(5);
  lob::BookState b(0.01);
  b.apply_limit(Side::bid, 99, 5, 1);
  b.apply_limit(Side::ask, 101, 5, 2);
  Materializer m(v, b);
  ASSERT_TRUE(m.next(v.market(Side::bid), 5, 1.0).has_value());  // bids gone
  ASSERT_TRUE(m.next(v.market(Side::ask), 5, 2.0).has_value());  // asks gone
  const auto ev = m.next(v.limit(Side::bid, 2), 3, 3.0);
  ASSERT_TRUE(ev.has_value());
  EXPECT_EQ(*ev->price, 99);  // last ask 101 - 2 ticks
  EXPECT_EQ(m.counters().reanchored, 1u);
  EXPECT_FALSE(m.next(v.market(Side::ask), 1, 4.0).has_value());  // no asks to hit

  Materializer off(v, b, {EtaPolicy::q_plus_one, false, false});
  off.next(v.market(Side::bid), 5, 1.0);
  off.next(v.market(Side::ask), 5, 2.0);
  EXPECT_FALSE(off.next(v.limit(Side::bid, 2), 3, 3.0).has_value());
  EXPECT_EQ(off.counters().skipped_unquoted, 1u);
}
