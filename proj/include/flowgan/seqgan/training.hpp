#pragma once

// SeqGAN training: MLE pretraining, discriminator training, Monte-Carlo
// rollout action values, the REINFORCE-style policy gradient and the
// alternating adversarial loop with start-sequence conditioning.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

#include "flowgan/core/error.hpp"
#include "flowgan/core/rng.hpp"
#include "flowgan/ingest/slicing.hpp"
#include "flowgan/seqgan/adam.hpp"
#include "flowgan/seqgan/discriminator.hpp"
#include "flowgan/seqgan/generator.hpp"

namespace flowgan::seqgan {

using ingest::TrainingPair;
using tokenize::FlowSequence;

struct TrainConfig {
  std::size_t T = 200;        // generated window length
  std::size_t rollouts = 8;   // Monte-Carlo completions per prefix
  std::size_t rounds = 10;    // adversarial rounds
  std::size_t g_steps = 1;
  std::size_t d_steps = 1;
  std::size_t d_epochs = 3;
  std::size_t batch = 32;
  std::size_t mle_epochs = 10;
  std::size_t disc_pretrain_epochs = 3;
  double mle_lr = 1e-2;
  double pg_lr = 1e-3;
  double disc_lr = 1e-3;
  double clip_norm = 5.0;
  double heldout_fraction = 0.1;
  int embed = 32;
  int hidden = 64;
  int disc_embed = 32;
  int disc_filters = 32;
  std::vector<int> disc_widths{2, 3, 5};
  std::uint64_t seed = 0;

  void validate() const {
    if (T < 1) throw ConfigError("T must be at least 1");
    if (rollouts < 1) throw ConfigError("rollout count N must be at least 1");
    if (batch < 1) throw ConfigError("batch size must be at least 1");
    if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0))
      throw ConfigError("heldout fraction must be in [0, 1)");
  }
};

struct DiscEpochStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

struct PgStats {
  double mean_reward = 0.0;  // mean D score of the sampled sequences
  double grad_norm = 0.0;
};

struct RoundMetrics {
  std::size_t round = 0;
  double mean_reward = 0.0;
  double pg_grad_norm = 0.0;
  double d_loss = 0.0;
  double d_accuracy = 0.0;
  double heldout_nll = 0.0;
};

namespace detail {

inline void shuffle(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
}

inline void require_finite(std::span<const double> grad, const char* what) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i])) {
      std::ostringstream os;
      os << what << ": non-finite gradient at parameter " << i << " (" << grad[i] << ")";
      throw NumericError(os.str());
    }
}

inline std::size_t heldout_count(std::size_t n, double fraction) {
  if (n < 2 || fraction <= 0.0) return 0;
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  return std::min(std::max<std::size_t>(k, 1), n - 1);
}

}  // namespace detail

/// Mean per-sequence NLL of the real windows given their starts.
inline double mean_nll(const Generator& g, std::span<const TrainingPair> pairs) {
  if (pairs.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : pairs) s += sequence_nll(g, p.start.tokens, p.real.tokens);
  return s / static_cast<double>(pairs.size());
}

/// Teacher-forced maximum-likelihood pretraining. The last `heldout_fraction`
/// of the pairs is held out; the returned vector is the held-out mean NLL
/// after each epoch (training NLL when nothing can be held out).
inline std::vector<double> pretrain_generator_mle(Generator& g, Adam& opt,
                                                  std::span<const TrainingPair> pairs,
                                                  const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (pairs.empty()) throw Error("MLE pretraining needs a non-empty corpus");
  const std::size_t held = detail::heldout_count(pairs.size(), cfg.heldout_fraction);
  const auto train = pairs.first(pairs.size() - held);
  const auto eval = held > 0 ? pairs.last(held) : pairs;
  std::vector<double> history;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(g.params().size());
  for (std::size_t epoch = 0; epoch < cfg.mle_epochs; ++epoch) {
    detail::shuffle(order, rng);
    for (std::size_t b = 0; b < order.size(); b += cfg.batch) {
      const std::size_t end = std::min(order.size(), b + cfg.batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = b; k < end; ++k) {
        const auto& p = train[order[k]];
        log_prob_and_grad(g, p.start.tokens, p.real.tokens, {}, grad);
      }
      // Ascent on log-likelihood == descent on its negation.
      const double scale = -1.0 / static_cast<double>(end - b);
      for (double& x : grad) x *= scale;
      detail::require_finite(grad, "MLE pretraining");
      opt.step(g.params(), grad);
    }
    history.push_back(mean_nll(g, eval));
    if (!std::isfinite(history.back())) throw NumericError("MLE pretraining produced a non-finite NLL");
  }
  return history;
}

/// Trains on equally many positive (real) and negative (generated) windows.
inline std::vector<DiscEpochStats> train_discriminator(Discriminator& d, Adam& opt,
                                                       std::span<const FlowSequence> positives,
                                                       std::span<const FlowSequence> negatives,
                                                       std::size_t epochs, std::size_t batch,
                                                       Rng& rng) {
  if (positives.size() != negatives.size())
    throw Error("discriminator training requires balanced classes");
  if (positives.empty()) throw Error("discriminator training needs examples");
  if (batch < 1) throw ConfigError("batch size must be at least 1");
  const std::size_t n = positives.size();
  std::vector<std::size_t> order(2 * n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(d.params().size());
  std::vector<DiscEpochStats> stats;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    detail::shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t b = 0; b < order.size(); b += batch) {
      const std::size_t end = std::min(order.size(), b + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = b; k < end; ++k) {
        const std::size_t i = order[k];
        const bool real = i < n;
        const auto& seq = real ? positives[i] : negatives[i - n];
        const double logit_before = discriminator_logit(d, seq.tokens);
        correct += (logit_before > 0.0) == real;
        loss_sum += bce_and_grad(d, seq.tokens, real ? 1 : 0, grad);
      }
      const double scale = 1.0 / static_cast<double>(end - b);
      for (double& x : grad) x *= scale;
      detail::require_finite(grad, "discriminator training");
      opt.step(d.params(), grad);
    }
    const double loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(loss)) throw NumericError("discriminator loss is not finite");
    stats.push_back({loss, static_cast<double>(correct) / static_cast<double>(order.size())});
  }
  return stats;
}

/// Classification accuracy at threshold 0.5 over both classes.
inline double discriminator_accuracy(const Discriminator& d, std::span<const FlowSequence> positives,
                                     std::span<const FlowSequence> negatives) {
  std::size_t correct = 0;
  for (const auto& s : positives) correct += discriminator_score(d, s.tokens) > 0.5;
  for (const auto& s : negatives) correct += discriminator_score(d, s.tokens) <= 0.5;
  const std::size_t total = positives.size() + negatives.size();
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

/// One generated window per start sequence.
inline std::vector<FlowSequence> generate_negatives(const Generator& g,
                                                   std::span<const TrainingPair> pairs,
                                                   std::size_t T, Rng& rng) {
  std::vector<FlowSequence> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(generate(g, p.start.tokens, T, rng));
  return out;
}

/// Bootstraps as many real windows as there are negatives.
inline std::vector<FlowSequence> bootstrap_positives(std::span<const TrainingPair> pairs,
                                                     std::size_t count, Rng& rng) {
  std::vector<FlowSequence> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(pairs[uniform_index(rng, pairs.size())].real);
  return out;
}

/// Pretrains D on bootstrapped real windows against the given negatives.
inline std::vector<DiscEpochStats> pretrain_discriminator(Discriminator& d, Adam& opt,
                                                          std::span<const TrainingPair> real,
                                                          std::span<const FlowSequence> generated,
                                                          const TrainConfig& cfg, Rng& rng) {
  if (real.empty() || generated.empty()) throw Error("discriminator pretraining needs both classes");
  const auto positives = bootstrap_positives(real, generated.size(), rng);
  return train_discriminator(d, opt, positives, generated, cfg.disc_pretrain_epochs, cfg.batch, rng);
}

namespace detail {

/// Completes trace.tokens[0..t) to full length with the generator as rollout
/// policy and returns the discriminator score of the completion.
inline double rollout_once(const Generator& g, const Discriminator& d, const GenerationTrace& tr,
                           std::size_t t, Rng& rng, std::vector<TokenId>& buf, Vec& z, Vec& probs) {
  const std::size_t T = tr.tokens.size();
  buf.assign(tr.tokens.begin(), tr.tokens.begin() + static_cast<std::ptrdiff_t>(t));
  LstmState st = tr.after[t - 1];
  probs = tr.next_probs[t - 1];
  for (std::size_t j = t; j < T; ++j) {
    const TokenId y = static_cast<TokenId>(sample_categorical(rng, probs));
    buf.push_back(y);
    if (j + 1 < T) gen_step_into(g, st, y, z, probs);
  }
  return discriminator_score(d, buf);
}

}  // namespace detail

/// Action values Q(Y_1:t-1, y_t) for t = 1..T of a generated trace: the mean
/// discriminator score over N rollouts for t < T, the exact score at t = T.
inline std::vector<double> action_values(const Generator& g, const Discriminator& d,
                                         const GenerationTrace& tr, std::size_t rollouts, Rng& rng) {
  if (rollouts < 1) throw ConfigError("rollout count N must be at least 1");
  const std::size_t T = tr.tokens.size();
  std::vector<double> q(T, 0.0);
  if (T == 0) return q;
  std::vector<TokenId> buf;
  buf.reserve(T);
  Vec z(4 * g.shape().hidden), probs(g.shape().vocab);
  for (std::size_t t = 1; t < T; ++t) {
    double sum = 0.0;
    for (std::size_t n = 0; n < rollouts; ++n) sum += detail::rollout_once(g, d, tr, t, rng, buf, z, probs);
    q[t - 1] = sum / static_cast<double>(rollouts);
  }
  q[T - 1] = discriminator_score(d, tr.tokens);
  return q;
}

/// Q value of the last token of `prefix` (length t, 1 <= t <= T) after `start`.
/// For t == T this is the discriminator score itself and consumes no randomness.
inline double rollout_value(const Generator& g, const Discriminator& d, std::span<const TokenId> start,
                            std::span<const TokenId> prefix, std::size_t T, std::size_t rollouts,
                            Rng& rng) {
  const std::size_t t = prefix.size();
  if (t < 1 || t > T) throw Error("rollout prefix length must be in 1..T");
  if (rollouts < 1) throw ConfigError("rollout count N must be at least 1");
  if (t == T) return discriminator_score(d, prefix);
  const GenState s = condition_on_start(g, start);
  LstmState st = s.lstm;
  Vec z(4 * g.shape().hidden), probs(g.shape().vocab);
  gen_step_into(g, st, s.next_input, z, probs);
  for (TokenId y : prefix) gen_step_into(g, st, y, z, probs);
  std::vector<TokenId> buf;
  double sum = 0.0;
  for (std::size_t n = 0; n < rollouts; ++n) {
    buf.assign(prefix.begin(), prefix.end());
    LstmState r = st;
    Vec p = probs;
    for (std::size_t j = t; j < T; ++j) {
      const TokenId y = static_cast<TokenId>(sample_categorical(rng, p));
      buf.push_back(y);
      if (j + 1 < T) gen_step_into(g, r, y, z, p);
    }
    sum += discriminator_score(d, buf);
  }
  return sum / static_cast<double>(rollouts);
}

/// Policy-gradient estimate sum_t grad log G(y_t | Y_1:t-1) * Q_t averaged
/// over a batch of generated windows, each continuing a start sequence drawn
/// uniformly with replacement. Written into `grad` (ascent direction).
inline PgStats policy_gradient(const Generator& g, const Discriminator& d,
                               std::span<const FlowSequence> starts, const TrainConfig& cfg, Rng& rng,
                               std::vector<double>& grad) {
  if (starts.empty()) throw Error("policy gradient needs start sequences");
  grad.assign(g.params().size(), 0.0);
  PgStats stats;
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    const auto& start = starts[uniform_index(rng, starts.size())].tokens;
    const auto trace = generate_traced(g, condition_on_start(g, start), cfg.T, rng);
    const auto q = action_values(g, d, trace, cfg.rollouts, rng);
    stats.mean_reward += q.back();
    log_prob_and_grad(g, start, trace.tokens, q, grad);
  }
  const double inv = 1.0 / static_cast<double>(cfg.batch);
  for (double& x : grad) x *= inv;
  stats.mean_reward *= inv;
  double sq = 0.0;
  for (double x : grad) sq += x * x;
  stats.grad_norm = std::sqrt(sq);
  detail::require_finite(grad, "policy gradient");
  return stats;
}

/// One optimizer step of the generator along the policy gradient.
inline PgStats policy_gradient_step(Generator& g, Adam& opt, const Discriminator& d,
                                    std::span<const FlowSequence> starts, const TrainConfig& cfg,
                                    Rng& rng) {
  std::vector<double> grad;
  const PgStats stats = policy_gradient(g, d, starts, cfg, rng, grad);
  for (double& x : grad) x = -x;
  opt.step(g.params(), grad);
  return stats;
}

/// Everything the adversarial loop mutates; checkpointed between rounds.
struct TrainerState {
  Generator gen;
  Discriminator disc;
  Adam mle_opt;
  Adam pg_opt;
  Adam disc_opt;
  Rng rng;
  std::size_t round = 0;
  std::vector<double> mle_history;
  std::vector<DiscEpochStats> disc_pretrain_history;
  std::vector<RoundMetrics> history;
};

inline TrainerState init_trainer(int vocab, const TrainConfig& cfg) {
  cfg.validate();
  TrainerState s;
  s.rng.seed(cfg.seed);
  s.gen = Generator(GeneratorShape{vocab, cfg.embed, cfg.hidden}, s.rng);
  s.disc = Discriminator(DiscriminatorShape{vocab, cfg.disc_embed, cfg.disc_widths, cfg.disc_filters}, s.rng);
  const AdamConfig base{.learning_rate = 0.0, .clip_norm = cfg.clip_norm};
  AdamConfig mle = base, pg = base, dc = base;
  mle.learning_rate = cfg.mle_lr;
  pg.learning_rate = cfg.pg_lr;
  dc.learning_rate = cfg.disc_lr;
  s.mle_opt = Adam(mle, s.gen.params().size());
  s.pg_opt = Adam(pg, s.gen.params().size());
  s.disc_opt = Adam(dc, s.disc.params().size());
  return s;
}

/// Generator MLE pretraining, then discriminator pretraining on one generated
/// window per start sequence.
inline void pretrain(TrainerState& s, std::span<const TrainingPair> pairs, const TrainConfig& cfg) {
  s.mle_history = pretrain_generator_mle(s.gen, s.mle_opt, pairs, cfg, s.rng);
  const auto negatives = generate_negatives(s.gen, pairs, cfg.T, s.rng);
  s.disc_pretrain_history = pretrain_discriminator(s.disc, s.disc_opt, pairs, negatives, cfg, s.rng);
}

/// Runs `rounds` adversarial rounds: g_steps policy-gradient updates followed
/// by d_steps of discriminator retraining on fresh negatives. `on_round` is
/// invoked after each round (checkpointing, extra metrics).
inline void adversarial_train(TrainerState& s, std::span<const TrainingPair> pairs, const TrainConfig& cfg,
                              std::size_t rounds,
                              const std::function<void(const TrainerState&)>& on_round = {}) {
  cfg.validate();
  if (rounds == 0) return;
  if (pairs.empty()) throw Error("adversarial training needs training pairs");
  std::vector<FlowSequence> starts;
  starts.reserve(pairs.size());
  for (const auto& p : pairs) starts.push_back(p.start);
  const std::size_t held = detail::heldout_count(pairs.size(), cfg.heldout_fraction);
  const auto eval = held > 0 ? pairs.last(held) : pairs;
  for (std::size_t r = 0; r < rounds; ++r) {
    RoundMetrics m;
    m.round = s.round + 1;
    for (std::size_t k = 0; k < cfg.g_steps; ++k) {
      const auto st = policy_gradient_step(s.gen, s.pg_opt, s.disc, starts, cfg, s.rng);
      m.mean_reward += st.mean_reward / static_cast<double>(cfg.g_steps);
      m.pg_grad_norm = st.grad_norm;
    }
    for (std::size_t k = 0; k < cfg.d_steps; ++k) {
      const auto negatives = generate_negatives(s.gen, pairs, cfg.T, s.rng);
      const auto positives = bootstrap_positives(pairs, negatives.size(), s.rng);
      const auto ds = train_discriminator(s.disc, s.disc_opt, positives, negatives, cfg.d_epochs,
                                          cfg.batch, s.rng);
      if (!ds.empty()) {
        m.d_loss = ds.back().loss;
        m.d_accuracy = ds.back().accuracy;
      }
    }
    m.heldout_nll = mean_nll(s.gen, eval);
    if (!std::isfinite(m.heldout_nll)) throw NumericError("generator NLL became non-finite");
    s.history.push_back(m);
    ++s.round;
    if (on_round) on_round(s);
  }
}

/// The full training procedure: initialize, pretrain both networks, then run
/// cfg.rounds adversarial rounds.
inline TrainerState train_seqgan(int vocab, std::span<const TrainingPair> pairs, const TrainConfig& cfg,
                                 const std::function<void(const TrainerState&)>& on_round = {}) {
  for (const auto& p : pairs)
    if (p.real.size() != cfg.T || p.start.tokens.empty())
      throw ConfigError("training windows must have length T and a non-empty start");
  TrainerState s = init_trainer(vocab, cfg);
  pretrain(s, pairs, cfg);
  adversarial_train(s, pairs, cfg, cfg.rounds, on_round);
  return s;
}

}  // namespace flowgan::seqgan
