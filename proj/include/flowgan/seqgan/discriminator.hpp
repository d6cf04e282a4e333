#pragma once

// Convolutional sequence classifier D_phi(Y_1:T).
//
// Embedding lookup, one bank of filters per window width, ReLU with
// max-over-time pooling, then a single affine score squashed by a sigmoid.
// Windows that run past the end of a short sequence see zero padding.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "flowgan/core/error.hpp"
#include "flowgan/core/rng.hpp"
#include "flowgan/seqgan/generator.hpp"

namespace flowgan::seqgan {

struct DiscriminatorShape {
  int vocab = 0;
  int embed = 32;
  std::vector<int> widths{2, 3, 5};
  int filters = 32;
  friend bool operator==(const DiscriminatorShape&, const DiscriminatorShape&) = default;
};

struct DiscriminatorLayout {
  DiscriminatorShape s;
  std::size_t embedding = 0;
  std::vector<std::size_t> filter_w, filter_b;
  std::size_t out_w = 0, out_b = 0, total = 0;

  explicit DiscriminatorLayout(DiscriminatorShape shape) : s(std::move(shape)) {
    std::size_t off = static_cast<std::size_t>(s.embed) * static_cast<std::size_t>(s.vocab);
    for (int w : s.widths) {
      filter_w.push_back(off);
      off += static_cast<std::size_t>(s.filters) * static_cast<std::size_t>(w * s.embed);
      filter_b.push_back(off);
      off += static_cast<std::size_t>(s.filters);
    }
    out_w = off;
    off += features();
    out_b = off;
    total = off + 1;
  }

  std::size_t features() const { return s.widths.size() * static_cast<std::size_t>(s.filters); }

  template <class P> auto embed_of(P p) const { return detail::mat(p, embedding, s.embed, s.vocab); }
  template <class P> auto filt_w(P p, std::size_t b) const {
    return detail::mat(p, filter_w[b], s.filters, s.widths[b] * s.embed);
  }
  template <class P> auto filt_b(P p, std::size_t b) const { return detail::vec(p, filter_b[b], s.filters); }
  template <class P> auto out_w_of(P p) const {
    return detail::vec(p, out_w, static_cast<Eigen::Index>(features()));
  }
};

class Discriminator {
 public:
  Discriminator() : layout_(DiscriminatorShape{}) {}

  explicit Discriminator(DiscriminatorShape shape) : layout_(std::move(shape)), phi_(layout_.total, 0.0) {
    const auto& s = layout_.s;
    if (s.vocab < 1 || s.embed < 1 || s.filters < 1 || s.widths.empty())
      throw ConfigError("discriminator dimensions must be positive");
    for (int w : s.widths)
      if (w < 1) throw ConfigError("filter widths must be positive");
  }

  Discriminator(DiscriminatorShape shape, Rng& rng, double scale = 0.1)
      : Discriminator(std::move(shape)) {
    for (double& x : phi_) x = uniform(rng, -scale, scale);
  }

  const DiscriminatorShape& shape() const noexcept { return layout_.s; }
  const DiscriminatorLayout& layout() const noexcept { return layout_; }
  std::vector<double>& params() noexcept { return phi_; }
  const std::vector<double>& params() const noexcept { return phi_; }

  friend bool operator==(const Discriminator& a, const Discriminator& b) {
    return a.shape() == b.shape() && a.phi_ == b.phi_;
  }

 private:
  DiscriminatorLayout layout_;
  std::vector<double> phi_;
};

namespace detail {

/// Stacks the embeddings of window positions j..j+w-1 into column j.
inline void im2col(const Eigen::Map<const Mat>& emb, std::span<const TokenId> seq, int width, Mat& out) {
  const int e = static_cast<int>(emb.rows());
  const int n = static_cast<int>(seq.size());
  const int windows = std::max(1, n - width + 1);
  out.setZero(width * e, windows);
  for (int j = 0; j < windows; ++j)
    for (int d = 0; d < width && j + d < n; ++d)
      out.block(d * e, j, e, 1) = emb.col(seq[static_cast<std::size_t>(j + d)]);
}

struct DiscForward {
  Vec features;
  std::vector<std::vector<int>> argmax;  // per width, per filter: winning window
  std::vector<Mat> columns;              // per width im2col
  double logit = 0.0;
};

inline DiscForward disc_forward(const Discriminator& d, std::span<const TokenId> seq, bool keep) {
  if (seq.empty()) throw Error("discriminator input must not be empty");
  const auto& L = d.layout();
  const double* p = d.params().data();
  for (TokenId t : seq)
    if (t < 0 || t >= L.s.vocab) throw Error("discriminator token out of range");
  DiscForward f;
  f.features.resize(static_cast<Eigen::Index>(L.features()));
  if (keep) {
    f.argmax.resize(L.s.widths.size());
    f.columns.resize(L.s.widths.size());
  }
  Mat cols, conv;
  const auto emb = L.embed_of(p);
  for (std::size_t b = 0; b < L.s.widths.size(); ++b) {
    Mat& m = keep ? f.columns[b] : cols;
    im2col(emb, seq, L.s.widths[b], m);
    conv.noalias() = L.filt_w(p, b) * m;
    conv.colwise() += L.filt_b(p, b);
    if (keep) f.argmax[b].resize(static_cast<std::size_t>(L.s.filters));
    for (int r = 0; r < L.s.filters; ++r) {
      Eigen::Index at = 0;
      const double mx = conv.row(r).maxCoeff(&at);
      f.features[static_cast<Eigen::Index>(b) * L.s.filters + r] = std::max(0.0, mx);
      if (keep) f.argmax[b][static_cast<std::size_t>(r)] = static_cast<int>(at);
    }
  }
  f.logit = L.out_w_of(p).dot(f.features) + p[L.out_b];
  return f;
}

}  // namespace detail

inline double discriminator_logit(const Discriminator& d, std::span<const TokenId> seq) {
  return detail::disc_forward(d, seq, false).logit;
}

/// Probability that `seq` is real, strictly inside (0, 1).
inline double discriminator_score(const Discriminator& d, std::span<const TokenId> seq) {
  const double z = std::clamp(discriminator_logit(d, seq), -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-z));
}

/// Binary cross-entropy of one example (label 1 = real) with its gradient
/// added to `grad` (which must match the parameter count).
inline double bce_and_grad(const Discriminator& d, std::span<const TokenId> seq, int label,
                           std::span<double> grad) {
  const auto f = detail::disc_forward(d, seq, true);
  const double y = label ? 1.0 : 0.0;
  // softplus(z) - y z, evaluated stably.
  const double z = f.logit;
  const double loss = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
  if (grad.empty()) return loss;
  if (grad.size() != d.params().size()) throw Error("gradient buffer size mismatch");
  const auto& L = d.layout();
  const double* p = d.params().data();
  double* g = grad.data();
  const double dz = 1.0 / (1.0 + std::exp(-z)) - y;
  L.out_w_of(g) += dz * f.features;
  g[L.out_b] += dz;
  const auto wout = L.out_w_of(p);
  auto demb = L.embed_of(g);
  const int e = L.s.embed;
  const int n = static_cast<int>(seq.size());
  for (std::size_t b = 0; b < L.s.widths.size(); ++b) {
    const int width = L.s.widths[b];
    auto dW = L.filt_w(g, b);
    auto dB = L.filt_b(g, b);
    const auto W = L.filt_w(p, b);
    for (int r = 0; r < L.s.filters; ++r) {
      const Eigen::Index fi = static_cast<Eigen::Index>(b) * L.s.filters + r;
      if (f.features[fi] <= 0.0) continue;  // ReLU closed
      const double df = dz * wout[fi];
      const int j = f.argmax[b][static_cast<std::size_t>(r)];
      dW.row(r).noalias() += df * f.columns[b].col(j).transpose();
      dB[r] += df;
      for (int dpos = 0; dpos < width && j + dpos < n; ++dpos)
        demb.col(seq[static_cast<std::size_t>(j + dpos)]).noalias() +=
            df * W.row(r).segment(dpos * e, e).transpose();
    }
  }
  return loss;
}

inline void to_json(nlohmann::json& j, const Discriminator& d) {
  j = {{"vocab", d.shape().vocab}, {"embed", d.shape().embed}, {"widths", d.shape().widths},
       {"filters", d.shape().filters}, {"phi", d.params()}};
}

inline void from_json(const nlohmann::json& j, Discriminator& d) {
  d = Discriminator(DiscriminatorShape{j.at("vocab").get<int>(), j.at("embed").get<int>(),
                                       j.at("widths").get<std::vector<int>>(),
                                       j.at("filters").get<int>()});
  auto phi = j.at("phi").get<std::vector<double>>();
  if (phi.size() != d.params().size()) throw Error("discriminator checkpoint size mismatch");
  d.params() = std::move(phi);
}

}  // namespace flowgan::seqgan
