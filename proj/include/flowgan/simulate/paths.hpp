#pragma once

// Monte-Carlo mid-price paths from either flow model.
//
// Each path owns its book, its rng (seeded from the master seed and the path
// index) and its draws from the shared, read-only samplers, so paths can be
// computed in any order with identical results.

#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "flowgan/core/rng.hpp"
#include "flowgan/ingest/empirical_sampler.hpp"
#include "flowgan/poisson/benchmark.hpp"
#include "flowgan/seqgan/generator.hpp"
#include "flowgan/simulate/materialize.hpp"
#include "flowgan/simulate/replay.hpp"

namespace flowgan::simulate {

/// Generates `windows` consecutive windows of length T, each conditioned on
/// the previous one (the first on `start`).
inline std::vector<TokenId> chain_generate(const seqgan::Generator& g, std::span<const TokenId> start,
                                           std::size_t windows, std::size_t T, Rng& rng) {
  std::vector<TokenId> out;
  out.reserve(windows * T);
  std::vector<TokenId> cur(start.begin(), start.end());
  for (std::size_t w = 0; w < windows; ++w) {
    auto seq = seqgan::generate(g, cur, T, rng);
    out.insert(out.end(), seq.tokens.begin(), seq.tokens.end());
    cur = std::move(seq.tokens);
  }
  return out;
}

struct SimConfig {
  double horizon = 48.0 * 3600.0;
  double interval = 60.0;
  std::size_t path_count = 100;
  std::uint64_t seed = 0;
  double start_time = 0.0;
  lob::BookState initial_book;
  MaterializeOptions materialize;

  void validate() const {
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (path_count < 1) throw ConfigError("path count must be at least 1");
    if (!initial_book.two_sided()) throw ConfigError("initial book must be quoted on both sides");
  }
};

struct SeqganFlowModel {
  const seqgan::Generator* generator = nullptr;
  std::span<const tokenize::FlowSequence> starts;  // sampled uniformly per path
  std::size_t T = 200;
  const ingest::EmpiricalSampler<double>* gaps = nullptr;
};

struct PoissonFlowModel {
  const poisson::PoissonRates* rates = nullptr;
};

using FlowModel = std::variant<SeqganFlowModel, PoissonFlowModel>;

struct PathResult {
  std::uint64_t seed = 0;
  MidPriceSeries series;
  MaterializeCounters materialize;
  ReplayCounters replay;
};

namespace detail {

inline std::vector<lob::OrderEvent> seqgan_events(const SeqganFlowModel& m, const tokenize::Vocabulary& vocab,
                                                  const ingest::EmpiricalSampler<lob::Lots>& volumes,
                                                  const SimConfig& cfg, Rng& rng, MaterializeCounters& counters) {
  if (!m.generator || !m.gaps || m.starts.empty()) throw ConfigError("SeqGAN model is incomplete");
  Materializer mat(vocab, cfg.initial_book, cfg.materialize);
  std::vector<lob::OrderEvent> events;
  const double end = cfg.start_time + cfg.horizon;
  double t = cfg.start_time;
  std::vector<TokenId> cur = m.starts[uniform_index(rng, m.starts.size())].tokens;
  while (t < end) {
    auto window = seqgan::generate(*m.generator, cur, m.T, rng);
    for (TokenId tok : window.tokens) {
      t += m.gaps->sample(rng);
      if (t >= end) break;
      if (auto ev = mat.next(tok, volumes.sample(rng), t)) events.push_back(*ev);
    }
    cur = std::move(window.tokens);
  }
  counters = mat.counters();
  return events;
}

inline std::vector<lob::OrderEvent> poisson_events(const PoissonFlowModel& m, const tokenize::Vocabulary& vocab,
                                                   const ingest::EmpiricalSampler<lob::Lots>& volumes,
                                                   const SimConfig& cfg, Rng& rng, MaterializeCounters& counters) {
  if (!m.rates) throw ConfigError("Poisson model is incomplete");
  const auto flow = poisson::sample_flow(*m.rates, cfg.horizon, rng);
  auto out = materialize_timed(flow, cfg.initial_book, vocab, [&] { return volumes.sample(rng); },
                               cfg.start_time, cfg.materialize);
  counters = out.counters;
  return std::move(out.events);
}

}  // namespace detail

/// Simulates path `index` of the configured set.
inline PathResult simulate_path(const FlowModel& model, const tokenize::Vocabulary& vocab,
                                const ingest::EmpiricalSampler<lob::Lots>& volumes, const SimConfig& cfg,
                                std::size_t index) {
  PathResult r;
  r.seed = derive_seed(cfg.seed, index);
  Rng rng(r.seed);
  const auto events = std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, SeqganFlowModel>)
          return detail::seqgan_events(m, vocab, volumes, cfg, rng, r.materialize);
        else
          return detail::poisson_events(m, vocab, volumes, cfg, rng, r.materialize);
      },
      model);
  const auto rep = replay(events, cfg.initial_book, cfg.start_time);
  r.replay = rep.counters;
  r.series = resample(rep, cfg.interval, cfg.horizon);
  return r;
}

inline std::vector<PathResult> run_paths(const FlowModel& model, const tokenize::Vocabulary& vocab,
                                         const ingest::EmpiricalSampler<lob::Lots>& volumes,
                                         const SimConfig& cfg) {
  cfg.validate();
  if (volumes.empty()) throw ConfigError("volume sampler is empty");
  std::vector<PathResult> out;
  out.reserve(cfg.path_count);
  for (std::size_t i = 0; i < cfg.path_count; ++i) out.push_back(simulate_path(model, vocab, volumes, cfg, i));
  return out;
}

}  // namespace flowgan::simulate
