#pragma once

// Recurrent generator policy G_theta(y_t | Y_1:t-1).
//
// Tokens are embedded by a dense lookup, fed through one LSTM cell and
// projected to a softmax over the vocabulary. All parameters live in one flat
// vector so the optimizer, gradient checks and checkpoints see a plain array.
//
// Generation is conditioned on a start sequence: every start token but the
// last is consumed to build the hidden state, and the last start token is the
// input of the first generation step.

#include <cmath>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "flowgan/core/error.hpp"
#include "flowgan/core/rng.hpp"
#include "flowgan/tokenize/vocabulary.hpp"

namespace flowgan::seqgan {

using tokenize::TokenId;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace detail {

template <class P>
using MatFor = std::conditional_t<std::is_const_v<std::remove_pointer_t<P>>, const Mat, Mat>;
template <class P>
using VecFor = std::conditional_t<std::is_const_v<std::remove_pointer_t<P>>, const Vec, Vec>;

template <class P>
Eigen::Map<MatFor<P>> mat(P base, std::size_t off, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<MatFor<P>>(base + off, rows, cols);
}
template <class P>
Eigen::Map<VecFor<P>> vec(P base, std::size_t off, Eigen::Index n) {
  return Eigen::Map<VecFor<P>>(base + off, n);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// In-place numerically stable softmax.
inline void softmax(Vec& v) {
  const double mx = v.maxCoeff();
  v = (v.array() - mx).exp();
  v /= v.sum();
}

}  // namespace detail

struct GeneratorShape {
  int vocab = 0;
  int embed = 32;
  int hidden = 64;
  friend bool operator==(const GeneratorShape&, const GeneratorShape&) = default;
};

/// Offsets of each parameter block inside the flat vector.
struct GeneratorLayout {
  GeneratorShape s;
  std::size_t embedding = 0, gate_w = 0, gate_b = 0, out_w = 0, out_b = 0, total = 0;

  explicit GeneratorLayout(GeneratorShape shape) : s(shape) {
    const auto v = static_cast<std::size_t>(s.vocab), e = static_cast<std::size_t>(s.embed),
               h = static_cast<std::size_t>(s.hidden);
    gate_w = embedding + e * v;
    gate_b = gate_w + 4 * h * (e + h);
    out_w = gate_b + 4 * h;
    out_b = out_w + v * h;
    total = out_b + v;
  }

  // Column t of the embedding is the vector of token t.
  template <class P> auto embed_of(P p) const { return detail::mat(p, embedding, s.embed, s.vocab); }
  // Rows are the stacked gates [input; forget; cell; output].
  template <class P> auto gates_w(P p) const { return detail::mat(p, gate_w, 4 * s.hidden, s.embed + s.hidden); }
  template <class P> auto gates_b(P p) const { return detail::vec(p, gate_b, 4 * s.hidden); }
  template <class P> auto out_w_of(P p) const { return detail::mat(p, out_w, s.vocab, s.hidden); }
  template <class P> auto out_b_of(P p) const { return detail::vec(p, out_b, s.vocab); }
};

class Generator {
 public:
  Generator() : layout_(GeneratorShape{}) {}

  /// All-zero parameters (uniform policy).
  explicit Generator(GeneratorShape shape) : layout_(shape), theta_(layout_.total, 0.0) {
    if (shape.vocab < 1 || shape.embed < 1 || shape.hidden < 1)
      throw ConfigError("generator dimensions must be positive");
  }

  /// Uniform(-scale, scale) initialization with forget-gate bias 1.
  Generator(GeneratorShape shape, Rng& rng, double scale = 0.1) : Generator(shape) {
    for (double& x : theta_) x = uniform(rng, -scale, scale);
    layout_.gates_b(theta_.data()).segment(shape.hidden, shape.hidden).setOnes();
  }

  const GeneratorShape& shape() const noexcept { return layout_.s; }
  const GeneratorLayout& layout() const noexcept { return layout_; }
  std::vector<double>& params() noexcept { return theta_; }
  const std::vector<double>& params() const noexcept { return theta_; }

  auto embedding() const { return layout_.embed_of(theta_.data()); }
  auto gates_weight() const { return layout_.gates_w(theta_.data()); }
  auto gates_bias() const { return layout_.gates_b(theta_.data()); }
  auto out_weight() const { return layout_.out_w_of(theta_.data()); }
  auto out_bias() const { return layout_.out_b_of(theta_.data()); }
  auto embedding() { return layout_.embed_of(theta_.data()); }
  auto gates_weight() { return layout_.gates_w(theta_.data()); }
  auto gates_bias() { return layout_.gates_b(theta_.data()); }
  auto out_weight() { return layout_.out_w_of(theta_.data()); }
  auto out_bias() { return layout_.out_b_of(theta_.data()); }

  friend bool operator==(const Generator& a, const Generator& b) {
    return a.shape() == b.shape() && a.theta_ == b.theta_;
  }

 private:
  GeneratorLayout layout_;
  std::vector<double> theta_;
};

struct LstmState {
  Vec h;
  Vec c;
};

inline LstmState zero_state(const Generator& g) {
  return {Vec::Zero(g.shape().hidden), Vec::Zero(g.shape().hidden)};
}

/// Consumes `input`, advancing `st` in place, and writes the distribution
/// over the next token into `probs`. `z` is scratch of size 4*hidden.
inline void gen_step_into(const Generator& g, LstmState& st, TokenId input, Vec& z, Vec& probs) {
  const int e = g.shape().embed, h = g.shape().hidden;
  if (input < 0 || input >= g.shape().vocab) throw Error("generator input token out of range");
  const auto w = g.gates_weight();
  z.noalias() = w.leftCols(e) * g.embedding().col(input);
  z.noalias() += w.rightCols(h) * st.h;
  z += g.gates_bias();
  for (int k = 0; k < h; ++k) {
    const double i = detail::sigmoid(z[k]);
    const double f = detail::sigmoid(z[h + k]);
    const double c = std::tanh(z[2 * h + k]);
    const double o = detail::sigmoid(z[3 * h + k]);
    st.c[k] = f * st.c[k] + i * c;
    st.h[k] = o * std::tanh(st.c[k]);
  }
  probs.noalias() = g.out_weight() * st.h;
  probs += g.out_bias();
  detail::softmax(probs);
}

/// One policy step: (next hidden state, probability vector over the vocabulary).
inline std::pair<LstmState, Vec> gen_step(const Generator& g, const LstmState& state, TokenId input) {
  LstmState next = state;
  Vec z(4 * g.shape().hidden), probs(g.shape().vocab);
  gen_step_into(g, next, input, z, probs);
  return {std::move(next), std::move(probs)};
}

/// Hidden state ready to generate the continuation of `start`.
struct GenState {
  LstmState lstm;
  TokenId next_input = 0;
};

inline GenState condition_on_start(const Generator& g, std::span<const TokenId> start) {
  if (start.empty()) throw Error("start sequence must not be empty");
  GenState s{zero_state(g), start.back()};
  Vec z(4 * g.shape().hidden), probs(g.shape().vocab);
  for (std::size_t k = 0; k + 1 < start.size(); ++k) gen_step_into(g, s.lstm, start[k], z, probs);
  return s;
}

enum class Sampling { stochastic, greedy };

inline TokenId draw(const Vec& probs, Rng& rng, Sampling mode) {
  if (mode == Sampling::greedy) {
    Eigen::Index best = 0;
    probs.maxCoeff(&best);
    return static_cast<TokenId>(best);
  }
  return static_cast<TokenId>(sample_categorical(rng, probs));
}

/// Sampled continuation together with the per-step states needed for
/// Monte-Carlo rollouts: after[j] / next_probs[j] are the state and the
/// distribution of token j+1 once tokens 0..j have been consumed.
struct GenerationTrace {
  std::vector<TokenId> tokens;
  std::vector<LstmState> after;
  std::vector<Vec> next_probs;
};

inline GenerationTrace generate_traced(const Generator& g, const GenState& from, std::size_t length,
                                       Rng& rng, Sampling mode = Sampling::stochastic) {
  GenerationTrace tr;
  tr.tokens.reserve(length);
  if (length == 0) return tr;
  tr.after.reserve(length - 1);
  tr.next_probs.reserve(length - 1);
  LstmState st = from.lstm;
  Vec z(4 * g.shape().hidden), probs(g.shape().vocab);
  gen_step_into(g, st, from.next_input, z, probs);
  for (std::size_t j = 0; j < length; ++j) {
    const TokenId y = draw(probs, rng, mode);
    tr.tokens.push_back(y);
    if (j + 1 < length) {
      gen_step_into(g, st, y, z, probs);
      tr.after.push_back(st);
      tr.next_probs.push_back(probs);
    }
  }
  return tr;
}

/// Samples `length` tokens following `start`.
inline tokenize::FlowSequence generate(const Generator& g, std::span<const TokenId> start,
                                       std::size_t length, Rng& rng,
                                       Sampling mode = Sampling::stochastic) {
  tokenize::FlowSequence out;
  out.origin = tokenize::Origin::generated;
  if (length == 0) return out;
  const GenState s = condition_on_start(g, start);
  LstmState st = s.lstm;
  Vec z(4 * g.shape().hidden), probs(g.shape().vocab);
  gen_step_into(g, st, s.next_input, z, probs);
  out.tokens.reserve(length);
  for (std::size_t j = 0; j < length; ++j) {
    const TokenId y = draw(probs, rng, mode);
    out.tokens.push_back(y);
    if (j + 1 < length) gen_step_into(g, st, y, z, probs);
  }
  return out;
}

/// Weighted log-likelihood  sum_j w_j log G(seq_j | start, seq_<j).
///
/// When `grad` is non-empty the gradient with respect to the flat parameters
/// is *added* to it (back-propagation through time over the start tokens and
/// the sequence). An empty `weights` span means all weights are 1.
inline double log_prob_and_grad(const Generator& g, std::span<const TokenId> start,
                                std::span<const TokenId> seq, std::span<const double> weights,
                                std::span<double> grad) {
  if (start.empty()) throw Error("start sequence must not be empty");
  if (!weights.empty() && weights.size() != seq.size()) throw Error("weights/sequence length mismatch");
  if (!grad.empty() && grad.size() != g.params().size()) throw Error("gradient buffer size mismatch");
  if (seq.empty()) return 0.0;
  const int e = g.shape().embed, h = g.shape().hidden, v = g.shape().vocab;
  const std::size_t first_loss = start.size() - 1;
  const std::size_t steps = start.size() + seq.size() - 1;
  const auto input_at = [&](std::size_t k) { return k < start.size() ? start[k] : seq[k - start.size()]; };
  const auto weight_at = [&](std::size_t j) { return weights.empty() ? 1.0 : weights[j]; };

  const bool want_grad = !grad.empty();
  // Per-step activations, one column per step.
  Mat gi, gf, gg, go, cs, hs, probs;
  if (want_grad) {
    gi.resize(h, steps); gf.resize(h, steps); gg.resize(h, steps); go.resize(h, steps);
    cs.resize(h, steps); hs.resize(h, steps); probs.resize(v, seq.size());
  }

  LstmState st = zero_state(g);
  Vec z(4 * h), p(v);
  double total = 0.0;
  const auto w = g.gates_weight();
  for (std::size_t k = 0; k < steps; ++k) {
    const TokenId in = input_at(k);
    if (in < 0 || in >= v) throw Error("generator input token out of range");
    z.noalias() = w.leftCols(e) * g.embedding().col(in);
    z.noalias() += w.rightCols(h) * st.h;
    z += g.gates_bias();
    for (int u = 0; u < h; ++u) {
      const double i = detail::sigmoid(z[u]);
      const double f = detail::sigmoid(z[h + u]);
      const double c = std::tanh(z[2 * h + u]);
      const double o = detail::sigmoid(z[3 * h + u]);
      st.c[u] = f * st.c[u] + i * c;
      st.h[u] = o * std::tanh(st.c[u]);
      if (want_grad) {
        gi(u, static_cast<Eigen::Index>(k)) = i;
        gf(u, static_cast<Eigen::Index>(k)) = f;
        gg(u, static_cast<Eigen::Index>(k)) = c;
        go(u, static_cast<Eigen::Index>(k)) = o;
      }
    }
    if (want_grad) {
      cs.col(static_cast<Eigen::Index>(k)) = st.c;
      hs.col(static_cast<Eigen::Index>(k)) = st.h;
    }
    if (k >= first_loss) {
      const std::size_t j = k - first_loss;
      const TokenId y = seq[j];
      if (y < 0 || y >= v) throw Error("target token out of range");
      p.noalias() = g.out_weight() * st.h;
      p += g.out_bias();
      detail::softmax(p);
      total += weight_at(j) * std::log(std::max(p[y], 1e-300));
      if (want_grad) probs.col(static_cast<Eigen::Index>(j)) = p;
    }
  }
  if (!want_grad) return total;

  const GeneratorLayout& L = g.layout();
  double* gp = grad.data();
  auto dE = L.embed_of(gp);
  auto dW = L.gates_w(gp);
  auto db = L.gates_b(gp);
  auto dWo = L.out_w_of(gp);
  auto dbo = L.out_b_of(gp);
  const auto Wo = g.out_weight();

  Vec dh_next = Vec::Zero(h), dc_next = Vec::Zero(h), dh(h), dc(h), dz(4 * h), dlogit(v);
  for (std::size_t kk = steps; kk-- > 0;) {
    const auto k = static_cast<Eigen::Index>(kk);
    dh = dh_next;
    dc = dc_next;
    if (kk >= first_loss) {
      const std::size_t j = kk - first_loss;
      const double wj = weight_at(j);
      if (wj != 0.0) {
        dlogit = -wj * probs.col(static_cast<Eigen::Index>(j));
        dlogit[seq[j]] += wj;
        dWo.noalias() += dlogit * hs.col(k).transpose();
        dbo += dlogit;
        dh.noalias() += Wo.transpose() * dlogit;
      }
    }
    for (int u = 0; u < h; ++u) {
      const double tc = std::tanh(cs(u, k));
      const double o = go(u, k), i = gi(u, k), f = gf(u, k), c = gg(u, k);
      const double c_prev = k > 0 ? cs(u, k - 1) : 0.0;
      const double dcu = dc[u] + dh[u] * o * (1.0 - tc * tc);
      dz[u] = dcu * c * i * (1.0 - i);
      dz[h + u] = dcu * c_prev * f * (1.0 - f);
      dz[2 * h + u] = dcu * i * (1.0 - c * c);
      dz[3 * h + u] = dh[u] * tc * o * (1.0 - o);
      dc_next[u] = dcu * f;
    }
    const TokenId in = input_at(kk);
    dW.leftCols(e).noalias() += dz * g.embedding().col(in).transpose();
    if (k > 0) dW.rightCols(h).noalias() += dz * hs.col(k - 1).transpose();
    db += dz;
    dE.col(in).noalias() += w.leftCols(e).transpose() * dz;
    dh_next.noalias() = w.rightCols(h).transpose() * dz;
  }
  return total;
}

/// Negative log-likelihood of `seq` given `start` (no gradient).
inline double sequence_nll(const Generator& g, std::span<const TokenId> start,
                           std::span<const TokenId> seq) {
  return -log_prob_and_grad(g, start, seq, {}, {});
}

inline void to_json(nlohmann::json& j, const Generator& g) {
  j = {{"vocab", g.shape().vocab}, {"embed", g.shape().embed}, {"hidden", g.shape().hidden},
       {"theta", g.params()}};
}

inline void from_json(const nlohmann::json& j, Generator& g) {
  g = Generator(GeneratorShape{j.at("vocab").get<int>(), j.at("embed").get<int>(),
                               j.at("hidden").get<int>()});
  auto theta = j.at("theta").get<std::vector<double>>();
  if (theta.size() != g.params().size()) throw Error("generator checkpoint size mismatch");
  g.params() = std::move(theta);
}

}  // namespace flowgan::seqgan
