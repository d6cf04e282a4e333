#pragma once

// Multiple-Poisson zero-intelligence benchmark: one homogeneous Poisson
// process per token, fitted by maximum likelihood and sampled into a single
// time-sorted flow.

#include <algorithm>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgan/core/error.hpp"
#include "flowgan/core/rng.hpp"
#include "flowgan/tokenize/vocabulary.hpp"

namespace flowgan::poisson {

struct PoissonRates {
  std::vector<double> lambda;  // events per second, indexed by token id
  double fitted_duration = 0.0;

  double total_rate() const {
    double s = 0.0;
    for (double l : lambda) s += l;
    return s;
  }
};

struct TimedToken {
  double time = 0.0;
  tokenize::TokenId token = 0;
  friend bool operator==(const TimedToken&, const TimedToken&) = default;
};

/// lambda_k = count_k / duration.
inline PoissonRates fit_rates(std::span<const tokenize::TokenId> tokens, double duration,
                              int vocab_size) {
  if (!(duration > 0.0)) throw Error("Poisson fit needs a positive duration");
  if (vocab_size < 1) throw ConfigError("vocabulary size must be positive");
  PoissonRates r;
  r.fitted_duration = duration;
  std::vector<std::size_t> counts(static_cast<std::size_t>(vocab_size), 0);
  for (auto t : tokens) {
    if (t < 0 || t >= vocab_size) throw Error("token id out of range in Poisson fit");
    ++counts[static_cast<std::size_t>(t)];
  }
  r.lambda.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    r.lambda[k] = static_cast<double>(counts[k]) / duration;
  return r;
}

/// Samples every process over [0, horizon) with exponential gaps, then
/// merges and sorts by time; simultaneous arrivals are ordered by token id.
inline std::vector<TimedToken> sample_flow(const PoissonRates& rates, double horizon, Rng& rng) {
  std::vector<TimedToken> flow;
  if (!(horizon > 0.0)) return flow;
  for (std::size_t k = 0; k < rates.lambda.size(); ++k) {
    const double lam = rates.lambda[k];
    if (lam < 0.0) throw Error("negative Poisson rate");
    if (lam == 0.0) continue;
    double t = exponential(rng, lam);
    while (t < horizon) {
      flow.push_back({t, static_cast<tokenize::TokenId>(k)});
      t += exponential(rng, lam);
    }
  }
  std::sort(flow.begin(), flow.end(), [](const TimedToken& a, const TimedToken& b) {
    return a.time < b.time || (a.time == b.time && a.token < b.token);
  });
  return flow;
}

inline nlohmann::json to_json(const PoissonRates& r, const tokenize::Vocabulary& vocab) {
  nlohmann::json rates = nlohmann::json::object();
  for (tokenize::TokenId k = 0; k < static_cast<tokenize::TokenId>(r.lambda.size()); ++k)
    rates[vocab.name(k)] = r.lambda[static_cast<std::size_t>(k)];
  return {{"Q", vocab.max_relative_price()},
          {"fitted_duration", r.fitted_duration},
          {"token_order", vocab.names()},
          {"rates", rates}};
}

inline PoissonRates rates_from_json(const nlohmann::json& j, const tokenize::Vocabulary& vocab) {
  PoissonRates r;
  r.fitted_duration = j.at("fitted_duration").get<double>();
  const auto& rates = j.at("rates");
  r.lambda.resize(static_cast<std::size_t>(vocab.size()));
  for (tokenize::TokenId k = 0; k < vocab.size(); ++k)
    r.lambda[static_cast<std::size_t>(k)] = rates.at(vocab.name(k)).get<double>();
  return r;
}

}  // namespace flowgan::poisson
