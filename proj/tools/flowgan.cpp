#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flowgan/cli/pipeline.hpp"
#include "flowgan/synthetic/markov_flow.hpp"

namespace {

using namespace flowgan;

struct Common {
  std::string config;
  std::string out;
};

cli::RunConfig load(const Common& c) {
  auto cfg = cli::load_config(c.config);
  if (!c.out.empty()) cfg.out_dir = c.out;
  return cfg;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "run configuration (JSON)")->required();
  sub->add_option("-o,--out", c.out, "output root (overrides out_dir)");
}

struct SynthOptions {
  std::string out;
  std::string format = "ndjson";
  double hours = 5.0;
  std::uint64_t seed = 0;
  synthetic::BookFlowSpec spec;
};

void run_synth(const SynthOptions& o) {
  const tokenize::Vocabulary vocab(o.spec.Q);
  const auto chain = synthetic::book_flow_chain(vocab, o.spec);
  Rng rng(o.seed);
  const auto feed = synthetic::synthesize_feed(chain, vocab, o.spec, o.hours * 3600.0, rng);
  std::ofstream out(o.out);
  if (!out) throw IoError("cannot write " + o.out);
  const lob::Grid grid{o.spec.tick_size, lob::kDefaultLotSize};
  if (o.format == "ndjson") {
    ingest::write_ndjson(out, feed.events, grid);
  } else if (o.format == "csv") {
    out << "time,type,side,price,size\n";
    char buf[160];
    for (const auto& ev : feed.events) {
      const std::string price = ev.price ? io::fmt17(grid.to_price(*ev.price)) : "";
      std::snprintf(buf, sizeof buf, "%.17g,%s,%s,%s,%.17g\n", ev.time, lob::to_string(ev.kind).data(),
                    lob::to_string(ev.side).data(), price.c_str(), grid.to_size(ev.volume));
      out << buf;
    }
  } else {
    throw ConfigError("synth format must be ndjson or csv");
  }
  std::cout << "wrote " << feed.events.size() << " events to " << o.out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-flow generative modelling and mid-price simulation"};
  app.require_subcommand(1);

  Common ingest_c, fit_c, train_c, sim_c, eval_c, report_c;
  auto* ingest = app.add_subcommand("ingest", "parse feeds into a token cache, samplers and the real series");
  add_common(ingest, ingest_c);

  auto* fit = app.add_subcommand("fit-benchmark", "fit the multiple-Poisson benchmark");
  add_common(fit, fit_c);

  cli::TrainOptions train_o;
  std::size_t rounds = 0;
  auto* train = app.add_subcommand("train", "pretrain and adversarially train the SeqGAN");
  add_common(train, train_c);
  train->add_option("--seed", train_o.seed, "master seed")->required();
  auto* rounds_opt = train->add_option("--rounds", rounds, "total adversarial rounds");
  train->add_flag("--resume", train_o.resume, "continue from the latest checkpoint");

  cli::SimulateOptions sim_o;
  std::uint64_t train_seed = 0;
  std::size_t paths = 0;
  auto* sim = app.add_subcommand("simulate", "simulate mid-price paths");
  add_common(sim, sim_c);
  sim->add_option("--model", sim_o.model, "seqgan or poisson")->required()->check(CLI::IsMember({"seqgan", "poisson"}));
  sim->add_option("--seed", sim_o.seed, "master seed")->required();
  auto* train_seed_opt = sim->add_option("--train-seed", train_seed, "seed of the training run (default: --seed)");
  auto* paths_opt = sim->add_option("--paths", paths, "number of paths (overrides config)");

  std::uint64_t eval_seed = 0, report_seed = 0;
  auto* eval = app.add_subcommand("evaluate", "compare simulated paths with the real series");
  add_common(eval, eval_c);
  eval->add_option("--seed", eval_seed, "seed of the simulation run")->required();

  auto* report = app.add_subcommand("report", "print the evaluation tables");
  add_common(report, report_c);
  report->add_option("--seed", report_seed, "seed of the simulation run")->required();

  SynthOptions synth_o;
  auto* synth = app.add_subcommand("synth", "write a synthetic feed with Markov token dynamics");
  synth->add_option("-o,--out", synth_o.out, "output feed file")->required();
  synth->add_option("--format", synth_o.format, "ndjson or csv");
  synth->add_option("--hours", synth_o.hours, "feed duration in hours");
  synth->add_option("--seed", synth_o.seed, "rng seed");
  synth->add_option("--Q", synth_o.spec.Q, "maximum relative price");
  synth->add_option("--rate", synth_o.spec.event_rate, "events per second");
  synth->add_option("--market-persistence", synth_o.spec.market_persistence, "repeat probability after a market token");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::config);
  }

  try {
    if (*ingest) {
      std::cout << cli::cmd_ingest(load(ingest_c)).dump(2) << '\n';
    } else if (*fit) {
      std::cout << cli::cmd_fit_benchmark(load(fit_c)).dump(2) << '\n';
    } else if (*train) {
      if (*rounds_opt) train_o.rounds = rounds;
      const auto cfg = load(train_c);
      std::cout << cli::cmd_train(cfg, train_o).dump(2) << '\n';
    } else if (*sim) {
      if (*train_seed_opt) sim_o.train_seed = train_seed;
      if (*paths_opt) sim_o.paths = paths;
      const auto m = cli::cmd_simulate(load(sim_c), sim_o);
      std::cout << "simulated " << m.at("path_count").get<std::size_t>() << " " << sim_o.model << " paths\n";
    } else if (*eval) {
      cli::cmd_evaluate(load(eval_c), eval_seed);
      std::cout << cli::cmd_report(load(eval_c), eval_seed);
    } else if (*report) {
      std::cout << cli::cmd_report(load(report_c), report_seed);
    } else if (*synth) {
      run_synth(synth_o);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::generic);
  }
  return 0;
}
