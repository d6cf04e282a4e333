#pragma once

// The ingest -> fit-benchmark -> train -> simulate -> evaluate pipeline.
//
// All artifacts of one configuration live under <out>/<config-hash>/; stages
// that depend on a seed write below seed-<n>/. Every stage writes a
// manifest.json carrying the config hash.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgan/core/error.hpp"
#include "flowgan/ingest/empirical_sampler.hpp"
#include "flowgan/ingest/encode.hpp"
#include "flowgan/ingest/feed.hpp"
#include "flowgan/ingest/slicing.hpp"
#include "flowgan/io/files.hpp"
#include "flowgan/poisson/benchmark.hpp"
#include "flowgan/seqgan/checkpoint.hpp"
#include "flowgan/seqgan/training.hpp"
#include "flowgan/simulate/paths.hpp"
#include "flowgan/stats/report.hpp"

namespace flowgan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct FeedSpec {
  fs::path path;
  ingest::FeedFormat format = ingest::FeedFormat::ndjson;
};

struct TimeWindow {
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
  bool contains(double t) const { return t >= start && t < end; }
};

struct RunConfig {
  std::vector<FeedSpec> feeds;
  double tick_size = 0.01;
  double lot_size = lob::kDefaultLotSize;
  TimeWindow train;
  TimeWindow test;
  int Q = 10;
  std::size_t slice_len = 400;
  seqgan::TrainConfig model;
  double horizon_hours = 0.0;  // 0: length of the test window
  double interval = 60.0;
  std::size_t path_count = 100;
  simulate::EtaPolicy eta = simulate::EtaPolicy::q_plus_one;
  stats::ReportConfig stats;
  fs::path out_dir = "runs";
  std::string hash;

  double horizon_seconds() const { return horizon_hours > 0.0 ? horizon_hours * 3600.0 : test.length(); }
  lob::Grid grid() const { return lob::Grid{tick_size, lot_size}; }
  tokenize::Vocabulary vocab() const { return tokenize::Vocabulary(Q); }
};

namespace detail {

inline TimeWindow window_of(const json& j, const char* name) {
  if (!j.contains(name)) throw ConfigError(std::string("config is missing the '") + name + "' window");
  const auto& w = j.at(name);
  TimeWindow out{w.at("start").get<double>(), w.at("end").get<double>()};
  if (!(out.end > out.start)) throw ConfigError(std::string(name) + " window must have end > start");
  return out;
}

inline seqgan::TrainConfig model_of(const json& j) {
  seqgan::TrainConfig c;
  if (!j.is_object()) return c;
  c.T = j.value("T", c.T);
  c.rollouts = j.value("rollouts", c.rollouts);
  c.rounds = j.value("rounds", c.rounds);
  c.g_steps = j.value("g_steps", c.g_steps);
  c.d_steps = j.value("d_steps", c.d_steps);
  c.d_epochs = j.value("d_epochs", c.d_epochs);
  c.batch = j.value("batch", c.batch);
  c.mle_epochs = j.value("mle_epochs", c.mle_epochs);
  c.disc_pretrain_epochs = j.value("disc_pretrain_epochs", c.disc_pretrain_epochs);
  c.mle_lr = j.value("mle_lr", c.mle_lr);
  c.pg_lr = j.value("pg_lr", c.pg_lr);
  c.disc_lr = j.value("disc_lr", c.disc_lr);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.heldout_fraction = j.value("heldout_fraction", c.heldout_fraction);
  c.embed = j.value("embed", c.embed);
  c.hidden = j.value("hidden", c.hidden);
  c.disc_embed = j.value("disc_embed", c.disc_embed);
  c.disc_filters = j.value("disc_filters", c.disc_filters);
  c.disc_widths = j.value("disc_widths", c.disc_widths);
  return c;
}

}  // namespace detail

/// Parses a config document. Relative feed and output paths resolve against `base_dir`.
inline RunConfig parse_config(const json& doc, const fs::path& base_dir = ".") {
  RunConfig c;
  try {
    if (!doc.contains("feeds") || !doc.at("feeds").is_array() || doc.at("feeds").empty())
      throw ConfigError("config needs a non-empty 'feeds' list");
    for (const auto& f : doc.at("feeds")) {
      FeedSpec spec;
      spec.path = f.at("path").get<std::string>();
      if (spec.path.is_relative()) spec.path = base_dir / spec.path;
      spec.format = ingest::parse_format(f.value("format", std::string("ndjson")));
      c.feeds.push_back(spec);
    }
    c.tick_size = doc.value("tick_size", c.tick_size);
    c.lot_size = doc.value("lot_size", c.lot_size);
    c.train = detail::window_of(doc, "train");
    c.test = detail::window_of(doc, "test");
    c.Q = doc.value("Q", c.Q);
    c.slice_len = doc.value("slice_len", c.slice_len);
    c.model = detail::model_of(doc.value("model", json::object()));
    const json sim = doc.value("simulate", json::object());
    c.horizon_hours = sim.value("horizon_hours", c.horizon_hours);
    c.interval = sim.value("interval", c.interval);
    c.path_count = sim.value("path_count", c.path_count);
    c.eta = simulate::parse_eta_policy(sim.value("eta_policy", std::string("q_plus_one")));
    const json st = doc.value("stats", json::object());
    c.stats.horizons_hours = st.value("horizons_hours", c.stats.horizons_hours);
    c.stats.ks_alpha = st.value("ks_alpha", c.stats.ks_alpha);
    c.stats.jb_alpha = st.value("jb_alpha", c.stats.jb_alpha);
    c.stats.tail_fraction = st.value("tail_fraction", c.stats.tail_fraction);
    c.out_dir = doc.value("out_dir", std::string("runs"));
    if (c.out_dir.is_relative()) c.out_dir = base_dir / c.out_dir;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  (void)tokenize::vocab_size(c.Q);
  if (c.train.end > c.test.start) throw ConfigError("train window must end before the test window starts");
  if (c.slice_len != 2 * c.model.T) throw ConfigError("slice_len must equal 2 * model.T");
  if (!(c.interval > 0.0)) throw ConfigError("interval must be positive");
  if (c.path_count < 1) throw ConfigError("path_count must be at least 1");
  c.model.validate();
  for (const auto& f : c.feeds)
    if (!fs::exists(f.path)) throw ConfigError("feed file not found: " + f.path.string());

  json hashed = doc;
  hashed.erase("out_dir");
  c.hash = io::config_hash(hashed);
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(io::read_json(path), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

struct RunPaths {
  fs::path root;
  fs::path ingest() const { return root / "ingest"; }
  fs::path benchmark() const { return root / "benchmark"; }
  fs::path seed_dir(std::uint64_t seed) const { return root / ("seed-" + std::to_string(seed)); }
  fs::path train(std::uint64_t seed) const { return seed_dir(seed) / "train"; }
  fs::path simulate(std::uint64_t seed, const std::string& model) const {
    return seed_dir(seed) / "simulate" / model;
  }
  fs::path report(std::uint64_t seed) const { return seed_dir(seed) / "report"; }
};

inline RunPaths run_paths_for(const RunConfig& c) { return {c.out_dir / c.hash}; }

inline json base_manifest(const RunConfig& c, const std::string& stage) {
  return {{"stage", stage}, {"config_hash", c.hash}, {"Q", c.Q}, {"vocabulary", c.vocab().names()}};
}

// ---------------------------------------------------------------------------
// Book snapshots (depth per level; queue composition is not needed to replay
// depth and prices).

inline json book_to_json(const lob::BookState& b) {
  json j{{"tick_size", b.tick_size()}, {"bids", json::array()}, {"asks", json::array()}};
  for (const auto& l : b.levels(lob::Side::bid)) j["bids"].push_back({l.price, l.depth});
  for (const auto& l : b.levels(lob::Side::ask)) j["asks"].push_back({l.price, l.depth});
  return j;
}

inline lob::BookState book_from_json(const json& j) {
  lob::BookState b(j.at("tick_size").get<double>());
  lob::OrderId id = 0;
  for (const auto& l : j.at("bids"))
    b.apply_limit(lob::Side::bid, l.at(0).get<lob::PriceTicks>(), l.at(1).get<lob::Lots>(), ++id);
  for (const auto& l : j.at("asks"))
    b.apply_limit(lob::Side::ask, l.at(0).get<lob::PriceTicks>(), l.at(1).get<lob::Lots>(), ++id);
  return b;
}

// ---------------------------------------------------------------------------
// Stage artifacts

struct IngestArtifacts {
  std::vector<tokenize::TokenId> train_tokens;
  std::vector<ingest::TrainingPair> pairs;
  ingest::EmpiricalSampler<lob::Lots> volumes;
  ingest::EmpiricalSampler<double> gaps;
  lob::BookState test_book;
  simulate::MidPriceSeries real;
};

inline IngestArtifacts load_ingest(const RunConfig& c) {
  const auto dir = run_paths_for(c).ingest();
  if (!fs::exists(dir / "tokens.json")) throw ConfigError("token cache missing; run 'ingest' first");
  IngestArtifacts a;
  const json tok = io::read_json(dir / "tokens.json");
  a.train_tokens = tok.at("tokens").get<std::vector<tokenize::TokenId>>();
  a.pairs = ingest::slice_flow(a.train_tokens, c.slice_len);
  const json smp = io::read_json(dir / "samplers.json");
  a.volumes = ingest::EmpiricalSampler<lob::Lots>(smp.at("volumes_lots").get<std::vector<lob::Lots>>());
  a.gaps = ingest::EmpiricalSampler<double>(smp.at("gaps").get<std::vector<double>>());
  a.test_book = book_from_json(io::read_json(dir / "test_book.json"));
  a.real = io::parse_series_csv(io::read_text(dir / "real_series.csv"), "real_series.csv");
  return a;
}

/// Parses the feeds, encodes the flow, and writes the token cache, samplers,
/// test-start book snapshot and the real mid-price series.
inline json cmd_ingest(const RunConfig& c) {
  std::vector<std::vector<lob::OrderEvent>> parts;
  for (const auto& f : c.feeds) parts.push_back(ingest::parse_feed(f.path.string(), f.format, c.grid()));
  const auto events = ingest::merge_by_time(std::move(parts));
  if (events.empty()) throw Error("feeds contain no events", ErrorCategory::parse);
  const auto vocab = c.vocab();

  auto warm = ingest::warm_up(events, c.tick_size);
  lob::BookState book = std::move(warm.book);
  std::size_t split = warm.next_index;
  while (split < events.size() && events[split].time < c.test.start) ++split;
  const std::span<const lob::OrderEvent> all(events);
  const auto before = all.subspan(warm.next_index, split - warm.next_index);
  std::size_t test_end = split;
  while (test_end < events.size() && events[test_end].time < c.test.end) ++test_end;
  const auto during = all.subspan(split, test_end - split);

  const auto enc_before = ingest::encode_feed(before, vocab, book, c.train.start, warm.next_index + 1);
  const lob::BookState test_book = book;
  const auto enc_test = ingest::encode_feed(during, vocab, book, c.test.start, split + 1);

  std::vector<tokenize::TokenId> train_tokens;
  std::vector<lob::Lots> volumes;
  std::vector<double> train_times;
  for (std::size_t i = 0; i < enc_before.tokens.size(); ++i) {
    if (!c.train.contains(enc_before.times[i])) continue;
    train_tokens.push_back(enc_before.tokens[i]);
    volumes.push_back(enc_before.volumes[i]);
    train_times.push_back(enc_before.times[i]);
  }
  if (train_tokens.empty()) throw ConfigError("train window contains no encodable events");
  std::vector<double> gaps;
  std::size_t zero_gaps = 0;
  for (std::size_t i = 1; i < train_times.size(); ++i) {
    const double g = train_times[i] - train_times[i - 1];
    if (g > 0.0)
      gaps.push_back(g);
    else
      ++zero_gaps;
  }
  if (gaps.empty()) throw ConfigError("train window has no positive inter-arrival gaps");

  std::vector<double> times{c.test.start}, mids{enc_test.initial_mid}, trade_times;
  for (std::size_t i = 0; i < during.size(); ++i) {
    times.push_back(during[i].time);
    mids.push_back(enc_test.mids[i]);
    if (during[i].kind == lob::OrderKind::market) trade_times.push_back(during[i].time);
  }
  const auto real = simulate::resample(times, mids, c.test.start, c.interval, c.test.length(), trade_times);

  const auto pairs = ingest::slice_flow(train_tokens, c.slice_len);
  const auto dir = run_paths_for(c).ingest();
  io::write_json(dir / "tokens.json", {{"Q", c.Q}, {"train_start", c.train.start}, {"train_end", c.train.end},
                                       {"tokens", train_tokens}});
  io::write_json(dir / "samplers.json", {{"volumes_lots", volumes}, {"gaps", gaps}});
  io::write_json(dir / "test_book.json", book_to_json(test_book));
  io::write_text(dir / "real_series.csv", io::series_csv(real));

  json m = base_manifest(c, "ingest");
  m["events"] = events.size();
  m["warm_up_events"] = warm.next_index;
  m["train_tokens"] = train_tokens.size();
  m["pairs"] = pairs.size();
  m["discarded_tail_tokens"] = train_tokens.size() - pairs.size() * c.slice_len;
  m["test_events"] = during.size();
  m["zero_gaps_dropped"] = zero_gaps;
  m["train_counters"] = {{"phantom_cancels", enc_before.phantom_cancels},
                         {"unfilled_markets", enc_before.unfilled_markets},
                         {"one_sided_events", enc_before.one_sided_events}};
  m["test_counters"] = {{"phantom_cancels", enc_test.phantom_cancels},
                        {"unfilled_markets", enc_test.unfilled_markets},
                        {"one_sided_events", enc_test.one_sided_events}};
  m["test_initial_mid"] = enc_test.initial_mid;
  io::write_json(dir / "manifest.json", m);
  return m;
}

inline json cmd_fit_benchmark(const RunConfig& c) {
  const auto dir = run_paths_for(c);
  if (!fs::exists(dir.ingest() / "tokens.json")) throw ConfigError("token cache missing; run 'ingest' first");
  const json tok = io::read_json(dir.ingest() / "tokens.json");
  const auto tokens = tok.at("tokens").get<std::vector<tokenize::TokenId>>();
  const auto vocab = c.vocab();
  const auto rates = poisson::fit_rates(tokens, c.train.length(), vocab.size());
  io::write_json(dir.benchmark() / "rates.json", poisson::to_json(rates, vocab));
  json m = base_manifest(c, "fit-benchmark");
  m["tokens"] = tokens.size();
  m["duration"] = c.train.length();
  m["total_rate"] = rates.total_rate();
  io::write_json(dir.benchmark() / "manifest.json", m);
  return m;
}

struct TrainOptions {
  std::uint64_t seed = 0;
  std::optional<std::size_t> rounds;  // total adversarial rounds; config value if absent
  bool resume = false;
};

inline json cmd_train(const RunConfig& c, const TrainOptions& opt) {
  const auto art = load_ingest(c);
  if (art.pairs.empty()) throw ConfigError("train window is shorter than one slice");
  seqgan::TrainConfig cfg = c.model;
  cfg.seed = opt.seed;
  const std::size_t total_rounds = opt.rounds.value_or(cfg.rounds);
  const auto dir = run_paths_for(c).train(opt.seed);
  const auto latest = dir / "checkpoint-latest.json";
  const auto round_file = [&](std::size_t r) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "checkpoint-round-%03zu.json", r);
    return dir / buf;
  };
  const auto save = [&](const seqgan::TrainerState& s) {
    io::write_json(round_file(s.round), seqgan::checkpoint_json(s));
    io::write_json(latest, seqgan::checkpoint_json(s));
    std::ostringstream hist;
    seqgan::write_history_csv(hist, s);
    io::write_text(dir / "history.csv", hist.str());
  };

  seqgan::TrainerState state;
  if (opt.resume) {
    if (!fs::exists(latest)) throw ConfigError("no checkpoint to resume from in " + dir.string());
    state = seqgan::trainer_from_json(io::read_json(latest));
  } else {
    state = seqgan::init_trainer(c.vocab().size(), cfg);
    seqgan::pretrain(state, art.pairs, cfg);
    save(state);
  }
  if (state.round < total_rounds)
    seqgan::adversarial_train(state, art.pairs, cfg, total_rounds - state.round, save);

  json m = base_manifest(c, "train");
  m["seed"] = opt.seed;
  m["rounds"] = state.round;
  m["pairs"] = art.pairs.size();
  m["T"] = cfg.T;
  m["rollouts"] = cfg.rollouts;
  m["mle_heldout_nll"] = state.mle_history;
  m["final_heldout_nll"] = state.history.empty() ? json() : json(state.history.back().heldout_nll);
  io::write_json(dir / "manifest.json", m);
  return m;
}

struct SimulateOptions {
  std::string model;  // "seqgan" | "poisson"
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::size_t> paths;
};

inline json counters_json(const simulate::PathResult& r) {
  return {{"seed", r.seed},
          {"emitted", r.materialize.emitted},
          {"skipped_unquoted", r.materialize.skipped_unquoted},
          {"reanchored", r.materialize.reanchored},
          {"dropped_eta", r.materialize.dropped_eta},
          {"phantom_cancels", r.replay.phantom_cancels},
          {"unfilled_markets", r.replay.unfilled_markets},
          {"one_sided", r.replay.one_sided},
          {"market_orders", r.replay.market_orders}};
}

inline json cmd_simulate(const RunConfig& c, const SimulateOptions& opt) {
  if (opt.model != "seqgan" && opt.model != "poisson")
    throw ConfigError("model must be 'seqgan' or 'poisson'");
  const auto art = load_ingest(c);
  const auto rp = run_paths_for(c);
  const auto vocab = c.vocab();

  simulate::SimConfig sim;
  sim.horizon = c.horizon_seconds();
  sim.interval = c.interval;
  sim.path_count = opt.paths.value_or(c.path_count);
  sim.seed = opt.seed;
  sim.start_time = c.test.start;
  sim.initial_book = art.test_book;
  sim.materialize.eta = c.eta;

  seqgan::TrainerState trained;
  poisson::PoissonRates rates;
  std::vector<tokenize::FlowSequence> starts;
  simulate::FlowModel model;
  const std::uint64_t train_seed = opt.train_seed.value_or(opt.seed);
  if (opt.model == "seqgan") {
    const auto ckpt = rp.train(train_seed) / "checkpoint-latest.json";
    if (!fs::exists(ckpt)) throw ConfigError("no trained generator at " + ckpt.string());
    trained = seqgan::trainer_from_json(io::read_json(ckpt));
    for (const auto& p : art.pairs) starts.push_back(p.start);
    if (starts.empty()) throw ConfigError("no start sequences available");
    model = simulate::SeqganFlowModel{&trained.gen, starts, c.model.T, &art.gaps};
  } else {
    const auto file = rp.benchmark() / "rates.json";
    if (!fs::exists(file)) throw ConfigError("no fitted rates; run 'fit-benchmark' first");
    rates = poisson::rates_from_json(io::read_json(file), vocab);
    model = simulate::PoissonFlowModel{&rates};
  }
  const auto results = simulate::run_paths(model, vocab, art.volumes, sim);

  const auto dir = rp.simulate(opt.seed, opt.model);
  if (fs::exists(dir)) fs::remove_all(dir);
  json m = base_manifest(c, "simulate");
  m["model"] = opt.model;
  m["seed"] = opt.seed;
  if (opt.model == "seqgan") m["train_seed"] = train_seed;
  m["path_count"] = sim.path_count;
  m["horizon_seconds"] = sim.horizon;
  m["interval"] = sim.interval;
  m["eta_policy"] = std::string(simulate::to_string(c.eta));
  m["initial_book"] = "feed snapshot at test window start";
  m["paths"] = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "path-%03zu.csv", i);
    io::write_text(dir / name, io::series_csv(results[i].series));
    json pc = counters_json(results[i]);
    pc["file"] = name;
    m["paths"].push_back(pc);
  }
  io::write_json(dir / "manifest.json", m);
  return m;
}

inline std::vector<simulate::MidPriceSeries> load_paths(const fs::path& dir) {
  const json m = io::read_json(dir / "manifest.json");
  std::vector<simulate::MidPriceSeries> out;
  for (const auto& p : m.at("paths")) {
    const auto name = p.at("file").get<std::string>();
    out.push_back(io::parse_series_csv(io::read_text(dir / name), name));
  }
  return out;
}

inline json cmd_evaluate(const RunConfig& c, std::uint64_t seed) {
  const auto rp = run_paths_for(c);
  const auto real_file = rp.ingest() / "real_series.csv";
  if (!fs::exists(real_file)) throw ConfigError("real series missing; run 'ingest' first");
  const auto real = io::parse_series_csv(io::read_text(real_file), "real_series.csv");
  std::vector<stats::ModelPaths> models;
  for (const char* name : {"seqgan", "poisson"}) {
    const auto dir = rp.simulate(seed, name);
    if (fs::exists(dir / "manifest.json")) models.push_back({name, load_paths(dir)});
  }
  if (models.empty()) throw ConfigError("no simulated series found; run 'simulate' first");
  const auto rep = stats::build_report(real, models, c.stats);

  const auto dir = rp.report(seed);
  for (const auto& [stem, text] : stats::to_csv(rep)) io::write_text(dir / (stem + ".csv"), text);
  json j = stats::to_json(rep);
  j["config_hash"] = c.hash;
  j["seed"] = seed;
  io::write_json(dir / "report.json", j);
  io::write_text(dir / "report.txt", stats::render_text(rep));
  json m = base_manifest(c, "evaluate");
  m["seed"] = seed;
  m["models"] = rep.models;
  m["files"] = {"ks_rejections.csv", "real_tails.csv",   "model_kurtosis.csv", "tail_tests.csv",
                "real_volatility.csv", "volatility_tests.csv", "report.json", "report.txt"};
  io::write_json(dir / "manifest.json", m);
  return m;
}

inline std::string cmd_report(const RunConfig& c, std::uint64_t seed) {
  const auto file = run_paths_for(c).report(seed) / "report.txt";
  if (!fs::exists(file)) throw ConfigError("no report found; run 'evaluate' first");
  return io::read_text(file);
}

}  // namespace flowgan::cli
