// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "flowgan/cli/pipeline.hpp"
#include "flowgan/flowgan.hpp"
#include "support/oracles.hpp"

using namespace flowgan;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Options {
  std::string cli;
  fs::path work = fs::temp_directory_path() / "flowgan-acceptance";
  std::set<int> only;
  std::size_t seeds = 3;
  bool verbose = false;
  double market_persistence = 0.9;
  double persistence = 0.0;
  double train_hours = 8.0;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Order book invariants

struct SideLedger {
  lob::Lots limit_submitted = 0, market_submitted = 0;
  lob::Lots taker_filled_limit = 0, taker_filled_market = 0, maker_filled = 0;
  lob::Lots cancelled = 0, market_residue = 0;
};

std::vector<lob::OrderEvent> random_events(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const lob::PriceTicks center = 10000;
  std::vector<lob::OrderEvent> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    lob::OrderEvent ev;
    ev.time = static_cast<double>(i);
    ev.side = uniform01(rng) < 0.5 ? lob::Side::bid : lob::Side::ask;
    const double u = uniform01(rng);
    const auto off = static_cast<lob::PriceTicks>(uniform_index(rng, 24)) - 3;  // -3..20 ticks behind center
    const lob::PriceTicks price = ev.side == lob::Side::bid ? center - off : center + off;
    if (u < 0.55) {
      ev.kind = lob::OrderKind::limit;
      ev.price = price;
      ev.volume = 1 + static_cast<lob::Lots>(uniform_index(rng, 100));
    } else if (u < 0.85) {
      ev.kind = lob::OrderKind::cancel;
      ev.price = price;
      ev.volume = 1 + static_cast<lob::Lots>(uniform_index(rng, 100));
    } else {
      ev.kind = lob::OrderKind::market;
      ev.volume = 1 + static_cast<lob::Lots>(uniform_index(rng, 250));
    }
    out.push_back(ev);
  }
  return out;
}

// Reference matcher: walks the pre-event book best level outward, oldest
// order first, and checks the engine's fills one by one.
std::optional<std::string> audit_priority(const lob::BookState& before, const lob::OrderEvent& ev,
                                          const std::vector<lob::Fill>& fills) {
  const lob::Side maker = lob::opposite(ev.side);
  lob::Lots left = ev.volume;
  std::size_t k = 0;
  for (const auto& level : before.levels(maker)) {
    if (ev.kind == lob::OrderKind::limit) {
      const bool crosses = ev.side == lob::Side::bid ? level.price <= *ev.price : level.price >= *ev.price;
      if (!crosses) break;
    }
    for (const auto& o : before.queue_at(maker, level.price)) {
      if (left == 0) break;
      const lob::Lots take = std::min(left, o.remaining);
      if (k >= fills.size()) return "missing fill";
      const auto& f = fills[k++];
      if (f.maker != o.id || f.price != level.price || f.volume != take || f.maker_seq != o.seq)
        return "fill out of price-time order";
      left -= take;
    }
    if (left == 0) break;
  }
  if (k != fills.size()) return "unexpected extra fill";
  return std::nullopt;
}

struct LobRun {
  std::vector<lob::Fill> fills;
  lob::BookState book;
  std::optional<std::string> violation;
  SideLedger ledger[2];
};

LobRun run_lob(const std::vector<lob::OrderEvent>& events, bool audit) {
  LobRun r;
  lob::OrderId id = 0;
  for (const auto& ev : events) {
    const auto s = static_cast<std::size_t>(ev.side);
    const auto m = static_cast<std::size_t>(lob::opposite(ev.side));
    std::optional<lob::BookState> before;
    if (audit && ev.kind != lob::OrderKind::cancel) before = r.book;
    const auto out = lob::apply_event(r.book, ev, ++id);
    lob::Lots filled = 0;
    for (const auto& f : out.fills) filled += f.volume;
    auto& L = r.ledger[s];
    switch (ev.kind) {
      case lob::OrderKind::limit:
        L.limit_submitted += ev.volume;
        L.taker_filled_limit += filled;
        break;
      case lob::OrderKind::market:
        L.market_submitted += ev.volume;
        L.taker_filled_market += filled;
        L.market_residue += out.unfilled;
        break;
      case lob::OrderKind::cancel:
        L.cancelled += out.cancelled;
        break;
    }
    r.ledger[m].maker_filled += filled;
    r.fills.insert(r.fills.end(), out.fills.begin(), out.fills.end());
    if (audit && !r.violation) {
      try {
        r.book.check_invariants();
      } catch (const Error& e) {
        r.violation = e.what();
      }
      if (before && !r.violation) r.violation = audit_priority(*before, ev, out.fills);
      for (lob::Side side : {lob::Side::bid, lob::Side::ask}) {
        const auto& x = r.ledger[static_cast<std::size_t>(side)];
        if (x.limit_submitted != x.taker_filled_limit + x.maker_filled + x.cancelled + r.book.total_depth(side) ||
            x.market_submitted != x.taker_filled_market + x.market_residue)
          r.violation = "volume not conserved";
      }
    }
  }
  return r;
}

Outcome criterion_lob() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto events = random_events(100000, 2024);
  const auto audited = run_lob(events, true);
  const auto a = run_lob(events, false), b = run_lob(events, false);
  const double elapsed = seconds_since(t0);
  const bool deterministic = a.fills == b.fills && a.book == b.book && a.fills == audited.fills;
  const bool ok = !audited.violation && deterministic && elapsed < 10.0;
  return {ok, fmt("1e5 events, %zu fills, %llu phantom cancels, %s, replay %s, %.1fs", audited.fills.size(),
                  static_cast<unsigned long long>(audited.book.phantom_cancels()),
                  audited.violation ? audited.violation->c_str() : "invariants held",
                  deterministic ? "bit-identical" : "DIFFERS", elapsed)};
}

// ---------------------------------------------------------------------------
// 2. Tokenizer bijection and fixture replay

Outcome criterion_tokenizer() {
  for (int Q = 1; Q <= 20; ++Q) {
    const tokenize::Vocabulary v(Q);
    std::set<std::string> names;
    for (tokenize::TokenId id = 0; id < v.size(); ++id) {
      if (v.encode(v.decode(id)) != id) return {false, fmt("round trip failed for Q=%d id=%d", Q, id)};
      names.insert(v.name(id));
    }
    if (static_cast<int>(names.size()) != 4 * Q + 4) return {false, fmt("duplicate names for Q=%d", Q)};
  }

  // Fixture: a synthetic feed written to NDJSON and parsed back as a feed file.
  const tokenize::Vocabulary v(5);
  synthetic::BookFlowSpec spec;
  const auto chain = synthetic::book_flow_chain(v, spec);
  Rng rng(77);
  const auto feed = synthetic::synthesize_feed(chain, v, spec, 2 * 3600.0, rng);
  std::stringstream buf;
  ingest::write_ndjson(buf, feed.events, lob::Grid{});
  const auto events = ingest::parse_feed(buf, ingest::FeedFormat::ndjson);
  if (events != feed.events) return {false, "fixture did not survive the NDJSON round trip"};

  const auto warm = ingest::warm_up(events, spec.tick_size);
  const auto rest = std::span(events).subspan(warm.next_index);
  const auto direct = simulate::replay(rest, warm.book, 0.0);

  auto book = warm.book;
  const auto enc = ingest::encode_feed(rest, v, book, 0.0);
  const auto gaps = ingest::gaps_of(enc.times, 0.0);
  std::size_t kv = 0, kg = 0;
  const auto mat = simulate::materialize(enc.tokens, warm.book, v, [&] { return enc.volumes[kv++]; },
                                         [&] { return gaps[kg++]; }, 0.0);
  const auto rebuilt = simulate::replay(mat.events, warm.book, 0.0);
  std::size_t event_mismatch = 0;
  for (std::size_t i = 0; i < std::min(mat.events.size(), rest.size()); ++i) {
    const auto& x = mat.events[i];
    const auto& y = rest[i];
    event_mismatch += x.kind != y.kind || x.side != y.side || x.price != y.price || x.volume != y.volume;
  }
  const bool same = rebuilt.mids == direct.mids && mat.events.size() == rest.size() && event_mismatch == 0;
  return {same, fmt("Q=1..20 bijective; fixture of %zu events, %zu mid changes checked, %s", rest.size(),
                    direct.mids.size(), same ? "trajectory identical" : "TRAJECTORY DIFFERS")};
}

// ---------------------------------------------------------------------------
// 3. Poisson oracle

Outcome criterion_poisson() {
  const std::vector<double> lambda{0.5, 0.8, 1.0, 1.3, 0.6, 0.7, 2.0, 1.1};
  const double horizon = 2e4;  // smallest lambda * horizon = 1e4
  const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
  const poisson::PoissonRates truth{lambda, horizon};
  const boost::math::chi_squared chi2(static_cast<double>(lambda.size() - 1));
  std::size_t passes = 0;
  double worst_rel = 0.0;
  const std::size_t runs = 100;
  for (std::size_t r = 0; r < runs; ++r) {
    Rng rng(derive_seed(31, r));
    const auto flow = poisson::sample_flow(truth, horizon, rng);
    std::vector<tokenize::TokenId> toks;
    toks.reserve(flow.size());
    for (const auto& t : flow) toks.push_back(t.token);
    const auto fit = poisson::fit_rates(toks, horizon, static_cast<int>(lambda.size()));
    std::vector<double> counts(lambda.size(), 0.0);
    for (auto t : toks) counts[static_cast<std::size_t>(t)] += 1.0;
    double stat = 0.0;
    for (std::size_t k = 0; k < lambda.size(); ++k) {
      worst_rel = std::max(worst_rel, std::abs(fit.lambda[k] - lambda[k]) / lambda[k]);
      const double expected = static_cast<double>(toks.size()) * lambda[k] / total;
      stat += (counts[k] - expected) * (counts[k] - expected) / expected;
    }
    passes += boost::math::cdf(boost::math::complement(chi2, stat)) > 0.01;
  }
  const bool ok = worst_rel <= 0.05 && passes >= 95;
  return {ok, fmt("worst relative rate error %.4f over %zu runs; chi-square accepted in %zu/%zu", worst_rel, runs,
                  passes, runs)};
}

// ---------------------------------------------------------------------------
// 4. Statistical oracles

Outcome criterion_stats() {
  using namespace oracle;
  std::vector<std::string> failures;
  const auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  Rng rng(404);
  std::vector<std::vector<double>> vectors{{1, 2, 3, 4}, {1, 2, 3, 5}, {0.3, -1.2, 2.5, 0.1, 0.0, -0.4, 3.9, -2.2}};
  for (int k = 0; k < 6; ++k) {
    std::vector<double> x(50 + 37 * k);
    for (auto& v : x) v = standard_normal(rng) * (1 + k % 3) + (k % 2 ? std::pow(uniform01(rng), -0.4) : 0.0);
    vectors.push_back(std::move(x));
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      const auto r = stats::ks_two_sample(vectors[i], vectors[j]);
      check(std::abs(r.statistic - brute_ks(vectors[i], vectors[j])) <= 1e-6, "K-S statistic");
      check(std::abs(r.p_value - brute_ks_p(vectors[i], vectors[j])) <= 1e-4, "K-S p-value");
    }
    const auto jb = stats::jarque_bera(vectors[i]);
    const auto ref = brute_jb(vectors[i]);
    check(std::abs(jb.statistic - ref.statistic) <= 1e-6 * std::max(1.0, ref.statistic), "JB statistic");
    check(std::abs(jb.kurtosis - ref.kurtosis) <= 1e-6, "JB kurtosis");
    check(std::abs(jb.p_value - ref.p_value) <= 1e-4, "JB p-value");
    const auto t = stats::t_test_one_sample(vectors[i], 0.25);
    check(std::abs(t.statistic - brute_t(vectors[i], 0.25)) <= 1e-6, "t statistic");
    check(std::abs(t.p_value - t_p_simpson(t.statistic, static_cast<double>(vectors[i].size() - 1))) <= 1e-4,
          "t p-value");
  }
  check(std::abs(stats::ks_two_sample(vectors[0], vectors[1]).statistic - 0.25) <= 1e-12, "K-S example");
  check(std::abs(stats::t_test_one_sample(std::vector<double>{1, 2, 3}, 0.0).statistic - 2 * std::sqrt(3.0)) <= 1e-6,
        "t example");

  std::vector<std::vector<double>> pvals{{0.01, 0.04, 0.03, 0.005}, {1, 1, 1}, {0, 0, 0}, {0.2, 0.001, 0.049, 0.026}};
  for (int k = 0; k < 200; ++k) {
    std::vector<double> p(1 + k % 23);
    for (auto& v : p) v = std::pow(uniform01(rng), 3.0);
    pvals.push_back(std::move(p));
  }
  for (const auto& p : pvals)
    for (double alpha : {0.01, 0.05, 0.1}) check(stats::hochberg(p, alpha) == brute_hochberg(p, alpha), "Hochberg set");

  const double a3 = stats::tail_exponent(pareto(3.0, 100000, 9));
  const double a2 = stats::tail_exponent(pareto(2.0, 100000, 10));
  check(std::abs(a3 - 3.0) <= 0.2, "Hill alpha=3");
  check(std::abs(a2 - 2.0) <= 0.15, "Hill alpha=2");

  std::string detail = fmt("%zu vectors, %zu p-value sets; Hill 3 -> %.3f, 2 -> %.3f", vectors.size(), pvals.size(),
                           a3, a2);
  if (!failures.empty()) detail += "; first failure: " + failures.front() + fmt(" (%zu total)", failures.size());
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------------------
// 5. Rollout value and policy gradient

Outcome criterion_policy_gradient() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng init(12);
  seqgan::Generator g(seqgan::GeneratorShape{3, 4, 5}, init, 0.8);
  const seqgan::Discriminator d(seqgan::DiscriminatorShape{3, 4, {2, 3}, 4}, init, 0.5);
  const std::vector<tokenize::TokenId> start{0, 2, 1, 1};
  const std::size_t T = 4;

  bool terminal_exact = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const auto tr = seqgan::generate_traced(g, seqgan::condition_on_start(g, start), T, rng);
    const auto q = seqgan::action_values(g, d, tr, 16, rng);
    terminal_exact = terminal_exact && q.back() == seqgan::discriminator_score(d, tr.tokens) &&
                     seqgan::rollout_value(g, d, start, tr.tokens, T, 16, rng) == q.back();
  }

  Rng rng(99);
  const auto tr = seqgan::generate_traced(g, seqgan::condition_on_start(g, start), T, rng);
  const auto q = seqgan::action_values(g, d, tr, 64, rng);
  std::vector<double> grad(g.params().size(), 0.0);
  seqgan::log_prob_and_grad(g, start, tr.tokens, q, grad);
  double num = 0.0, den = 0.0;
  const double h = 1e-5;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double keep = g.params()[i];
    g.params()[i] = keep + h;
    const double up = seqgan::log_prob_and_grad(g, start, tr.tokens, q, {});
    g.params()[i] = keep - h;
    const double down = seqgan::log_prob_and_grad(g, start, tr.tokens, q, {});
    g.params()[i] = keep;
    const double fd = (up - down) / (2 * h);
    num += (grad[i] - fd) * (grad[i] - fd);
    den += fd * fd;
  }
  const double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
  const double elapsed = seconds_since(t0);
  const bool ok = terminal_exact && rel < 1e-4 && elapsed < 60.0;
  return {ok, fmt("terminal Q %s D score; gradient relative error %.2e over %zu parameters; %.1fs",
                  terminal_exact ? "equals" : "DIFFERS FROM", rel, grad.size(), elapsed)};
}

// ---------------------------------------------------------------------------
// 6. Oracle experiment on a known Markov chain

double oracle_nll(const seqgan::Generator& g, const synthetic::MarkovChain& chain,
                  std::span<const ingest::TrainingPair> starts, std::size_t T, std::size_t samples,
                  std::uint64_t seed) {
  Rng rng(seed);
  double s = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const auto& start = starts[k % starts.size()].start.tokens;
    const auto seq = seqgan::generate(g, start, T, rng);
    s += chain.nll(seq.tokens, start.back());
  }
  return s / static_cast<double>(samples);
}

struct OracleRun {
  double mle_nll = 0, pre = 0, post = 0, truth = 0;
  double seconds = 0;
};

OracleRun oracle_run(std::uint64_t seed, bool verbose) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(600, seed));
  const std::vector<double> weights{0.6, 0.3, 0.1};
  const auto chain = synthetic::random_sparse_chain(12, weights, 0.03, rng);
  seqgan::TrainConfig cfg;
  cfg.T = 20;
  cfg.rollouts = 8;
  cfg.rounds = 30;
  cfg.batch = 32;
  cfg.mle_epochs = 20;
  cfg.disc_pretrain_epochs = 3;
  cfg.d_epochs = 2;
  cfg.embed = 16;
  cfg.hidden = 32;
  cfg.disc_embed = 16;
  cfg.disc_filters = 16;
  cfg.seed = derive_seed(601, seed);
  const auto flow = chain.sample(2 * cfg.T * 600, rng);
  const auto pairs = ingest::slice_flow(flow, 2 * cfg.T);

  auto state = seqgan::init_trainer(12, cfg);
  seqgan::pretrain(state, pairs, cfg);
  OracleRun r;
  r.mle_nll = state.mle_history.back();
  const std::size_t held = seqgan::detail::heldout_count(pairs.size(), cfg.heldout_fraction);
  const auto eval = std::span(pairs).last(held);
  double truth = 0.0;
  for (const auto& p : eval) truth += chain.nll(p.real.tokens, p.start.tokens.back());
  r.truth = truth / static_cast<double>(eval.size());
  const std::size_t samples = 3000;
  r.pre = oracle_nll(state.gen, chain, eval, cfg.T, samples, 7);
  seqgan::adversarial_train(state, pairs, cfg, cfg.rounds, [&](const seqgan::TrainerState& s) {
    if (verbose && s.round % 5 == 0)
      std::cerr << fmt("  seed %llu round %zu oracle %.3f\n", static_cast<unsigned long long>(seed), s.round,
                       oracle_nll(s.gen, chain, eval, cfg.T, samples, 7));
  });
  r.post = oracle_nll(state.gen, chain, eval, cfg.T, samples, 7);
  r.seconds = seconds_since(t0);
  return r;
}

Outcome criterion_oracle(const Options& o) {
  const double bound = 20 * std::log(12.0);
  std::size_t improved = 0;
  bool mle_ok = true, no_degrade = true;
  double seconds = 0.0;
  std::string per;
  for (std::uint64_t s = 0; s < o.seeds; ++s) {
    const auto r = oracle_run(s, o.verbose);
    mle_ok = mle_ok && r.mle_nll <= 0.7 * bound;
    no_degrade = no_degrade && r.post <= 1.02 * r.pre;
    improved += r.post < r.pre;
    seconds += r.seconds;
    per += fmt("%s[held-out %.2f, oracle %.3f -> %.3f, true %.2f]", s ? " " : "", r.mle_nll, r.pre, r.post, r.truth);
  }
  const bool ok = mle_ok && no_degrade && improved * 3 >= 2 * o.seeds && seconds < 1800.0;
  return {ok, fmt("uniform bound %.2f; ", bound) + per + fmt("; improved %zu/%zu; %.0fs", improved, o.seeds, seconds)};
}

// ---------------------------------------------------------------------------
// 7 and 8. Synthetic ground-truth experiment through the pipeline

struct GroundTruthRun {
  std::size_t seqgan_rejections = 0, poisson_rejections = 0;
  double seqgan_kurtosis = 0, poisson_kurtosis = 0, real_kurtosis = 0;
  std::size_t seqgan_jb = 0, poisson_jb = 0;
  double seconds = 0;
};

json ground_truth_config() {
  return json::parse(R"({
    "feeds": [{"path": "feed.ndjson", "format": "ndjson"}],
    "train": {"start": 0, "end": 28800}, "test": {"start": 28800, "end": 32400},
    "Q": 5, "slice_len": 100,
    "model": {"T": 50, "rollouts": 4, "rounds": 10, "batch": 16, "mle_epochs": 8,
              "embed": 16, "hidden": 32, "disc_embed": 16, "disc_filters": 16},
    "simulate": {"path_count": 100, "interval": 60},
    "stats": {"horizons_hours": [1]},
    "out_dir": "runs"})");
}

GroundTruthRun ground_truth_run(const Options& o, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = o.work / fmt("ground-truth-%llu", static_cast<unsigned long long>(seed));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto cfg_json = ground_truth_config();
  const double split = o.train_hours * 3600.0;
  cfg_json["train"]["end"] = split;
  cfg_json["test"] = {{"start", split}, {"end", split + 3600.0}};
  {
    synthetic::BookFlowSpec spec;
    spec.Q = cfg_json["Q"].get<int>();
    spec.market_persistence = o.market_persistence;
    spec.persistence = o.persistence;
    const tokenize::Vocabulary v(spec.Q);
    const auto chain = synthetic::book_flow_chain(v, spec);
    Rng rng(derive_seed(700, seed));
    const auto feed = synthetic::synthesize_feed(chain, v, spec, cfg_json["test"]["end"].get<double>(), rng);
    std::ofstream out(dir / "feed.ndjson");
    ingest::write_ndjson(out, feed.events, lob::Grid{});
  }
  io::write_json(dir / "run.json", cfg_json);
  const auto c = cli::load_config(dir / "run.json");
  cli::cmd_ingest(c);
  cli::cmd_fit_benchmark(c);
  cli::cmd_train(c, {seed, std::nullopt, false});
  cli::cmd_simulate(c, {"seqgan", seed, std::nullopt, std::nullopt});
  cli::cmd_simulate(c, {"poisson", seed, std::nullopt, std::nullopt});
  cli::cmd_evaluate(c, seed);
  const auto rep = io::read_json(cli::run_paths_for(c).report(seed) / "report.json");
  if (o.verbose) std::cerr << cli::cmd_report(c, seed);

  GroundTruthRun r;
  const auto models = rep.at("models").get<std::vector<std::string>>();
  const auto& ks = rep.at("ks_rejections").at(0).at("rejections");
  const auto& kurt = rep.at("model_kurtosis").at(0).at("models");
  for (std::size_t m = 0; m < models.size(); ++m) {
    const bool sg = models[m] == "seqgan";
    (sg ? r.seqgan_rejections : r.poisson_rejections) = ks.at(m).get<std::size_t>();
    (sg ? r.seqgan_kurtosis : r.poisson_kurtosis) = kurt.at(m).at("mean_kurtosis").get<double>();
    (sg ? r.seqgan_jb : r.poisson_jb) = kurt.at(m).at("rejections").get<std::size_t>();
  }
  r.real_kurtosis = rep.at("real_tails").at(0).at("kurtosis").get<double>();
  r.seconds = seconds_since(t0);
  return r;
}

const std::vector<GroundTruthRun>& ground_truth(const Options& o) {
  static std::vector<GroundTruthRun> runs;
  if (runs.empty())
    for (std::uint64_t s = 1; s <= o.seeds; ++s) runs.push_back(ground_truth_run(o, s));
  return runs;
}

Outcome criterion_table_one(const Options& o) {
  const auto& runs = ground_truth(o);
  std::size_t wins = 0;
  std::string per;
  for (const auto& r : runs) {
    wins += r.seqgan_rejections <= r.poisson_rejections;
    per += fmt("%s%zu vs %zu", per.empty() ? "" : ", ", r.seqgan_rejections, r.poisson_rejections);
  }
  return {wins * 3 >= 2 * runs.size(),
          fmt("SeqGAN vs Poisson K-S rejections out of 100 paths: ") + per + fmt("; SeqGAN <= Poisson in %zu/%zu", wins, runs.size())};
}

Outcome criterion_heavy_tails(const Options& o) {
  const auto& runs = ground_truth(o);
  bool ok = true;
  std::string per;
  for (const auto& r : runs) {
    ok = ok && r.seqgan_kurtosis > 3 && r.poisson_kurtosis > 3 && r.seqgan_jb == 0 && r.poisson_jb == 0;
    per += fmt("%s[SeqGAN K %.2f rej %zu, Poisson K %.2f rej %zu, real K %.2f]", per.empty() ? "" : " ",
               r.seqgan_kurtosis, r.seqgan_jb, r.poisson_kurtosis, r.poisson_jb, r.real_kurtosis);
  }
  return {ok, per};
}

// ---------------------------------------------------------------------------
// 9. End-to-end determinism through the command-line tool

int run(const std::string& cmd, const fs::path& log) {
  const std::string full = cmd + " >> \"" + log.string() + "\" 2>&1";
  const int rc = std::system(full.c_str());
  return rc;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = io::read_text(e.path());
  return out;
}

Outcome criterion_determinism(const Options& o) {
  if (o.cli.empty()) return {false, "no --cli binary given"};
  const auto dir = o.work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto log = dir / "log.txt";
  const std::string bin = "\"" + o.cli + "\"";
  json cfg = json::parse(R"({
    "feeds": [{"path": "feed.ndjson"}],
    "train": {"start": 0, "end": 7200}, "test": {"start": 7200, "end": 10800},
    "Q": 5, "slice_len": 60,
    "model": {"T": 30, "rollouts": 2, "rounds": 2, "batch": 8, "mle_epochs": 2,
              "embed": 8, "hidden": 16, "disc_embed": 8, "disc_filters": 8},
    "simulate": {"path_count": 10, "interval": 60},
    "stats": {"horizons_hours": [1]}})");
  io::write_json(dir / "run.json", cfg);
  const std::string conf = " --config \"" + (dir / "run.json").string() + "\"";
  if (run(bin + " synth -o \"" + (dir / "feed.ndjson").string() + "\" --hours 3 --seed 5", log) != 0)
    return {false, "synth failed; see " + log.string()};
  std::vector<std::map<std::string, std::string>> reports;
  for (int pass = 0; pass < 2; ++pass) {
    const auto out = dir / fmt("out-%d", pass);
    const std::string o_flag = " --out \"" + out.string() + "\"";
    for (const std::string step : {" ingest", " fit-benchmark", " train --seed 3", " simulate --model seqgan --seed 3",
                                   " simulate --model poisson --seed 3", " evaluate --seed 3"})
      if (run(bin + step + conf + o_flag, log) != 0) return {false, "step '" + step + "' failed; see " + log.string()};
    fs::path report_dir;
    for (const auto& e : fs::directory_iterator(out)) report_dir = e.path() / "seed-3" / "report";
    reports.push_back(snapshot(report_dir));
  }
  const bool ok = !reports[0].empty() && reports[0] == reports[1];
  return {ok, fmt("%zu report files compared across two full runs: %s", reports[0].size(),
                  ok ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  Options o;
  std::vector<int> only;
  app.add_option("--cli", o.cli, "path to the flowgan executable");
  app.add_option("--work", o.work, "scratch directory");
  app.add_option("--only", only, "run only these criteria");
  app.add_option("--seeds", o.seeds, "seeded repetitions for the training experiments");
  app.add_flag("-v,--verbose", o.verbose, "progress output on stderr");
  app.add_option("--market-persistence", o.market_persistence, "ground truth: repeat probability after a market token");
  app.add_option("--persistence", o.persistence, "ground truth: repeat probability after other tokens");
  app.add_option("--train-hours", o.train_hours, "ground truth: training window length");
  CLI11_PARSE(app, argc, argv);
  o.only.insert(only.begin(), only.end());
  if (!o.cli.empty()) o.cli = fs::absolute(o.cli).string();
  fs::create_directories(o.work);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion_lob},
      {2, criterion_tokenizer},
      {3, criterion_poisson},
      {4, criterion_stats},
      {5, criterion_policy_gradient},
      {6, [&] { return criterion_oracle(o); }},
      {7, [&] { return criterion_table_one(o); }},
      {8, [&] { return criterion_heavy_tails(o); }},
      {9, [&] { return criterion_determinism(o); }},
  };
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!o.only.empty() && !o.only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::cout << fmt("criterion %d: %s - ", id, r.pass ? "PASS" : "FAIL") << r.detail
              << fmt(" [%.1fs]", seconds_since(t0)) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
