#pragma once

// Estimators and hypothesis tests used to compare simulated and real prices.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "flowgan/core/error.hpp"

namespace flowgan::stats {

class DegenerateSample : public Error {
 public:
  explicit DegenerateSample(const std::string& what) : Error(what, ErrorCategory::numeric) {}
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// r_i = ln(p_i / p_{i-1}).
inline std::vector<double> log_returns(std::span<const double> prices) {
  std::vector<double> r;
  if (prices.size() < 2) return r;
  r.reserve(prices.size() - 1);
  for (double p : prices)
    if (!(p > 0.0)) throw Error("log returns need positive prices");
  for (std::size_t i = 1; i < prices.size(); ++i) r.push_back(std::log(prices[i] / prices[i - 1]));
  return r;
}

/// Survival function of the limiting Kolmogorov distribution, P(K > lambda).
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form; converges quickly for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double w = std::log(lambda);
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1.0;
      cdf += std::exp(-m * m * pi2 / (8.0 * lambda * lambda) - w);
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi);
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

/// Two-sample Kolmogorov-Smirnov test. D = sup |F_A - F_B|; the p-value uses
/// the asymptotic distribution with effective size |A||B| / (|A| + |B|).
inline TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error("K-S test needs at least two points per sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  return {d, kolmogorov_survival(std::sqrt(ne) * d), x.size(), y.size()};
}

/// Hochberg step-up: with p sorted ascending, reject H(1..k) for the largest k
/// such that p(k) <= alpha / (m - k + 1). Returns the rejected original
/// indices in ascending order.
inline std::vector<std::size_t> hochberg(std::span<const double> p, double alpha = 0.1) {
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw Error("p-values must lie in [0, 1]");
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return p[l] < p[r]; });
  std::size_t k = 0;
  for (std::size_t rank = m; rank >= 1; --rank) {
    if (p[order[rank - 1]] <= alpha / static_cast<double>(m - rank + 1)) {
      k = rank;
      break;
    }
  }
  std::vector<std::size_t> rejected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(rejected.begin(), rejected.end());
  return rejected;
}

/// Bonferroni: reject every p <= alpha / m.
inline std::vector<std::size_t> bonferroni(std::span<const double> p, double alpha) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] <= alpha / static_cast<double>(p.size())) out.push_back(i);
  return out;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // population (divide by n)
  double skewness = 0.0;
  double kurtosis = 0.0;  // raw moment ratio m4 / m2^2; 3 for a normal
};

inline Moments moments(std::span<const double> x) {
  if (x.empty()) throw Error("moments of an empty sample");
  const double n = static_cast<double>(x.size());
  Moments m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m.mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = m2;
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.kurtosis = m4 / (m2 * m2);
  }
  return m;
}

struct JarqueBera {
  double statistic = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  double p_value = 1.0;
};

/// JB = n/6 (S^2 + (K - 3)^2 / 4), p from the chi-square(2) upper tail.
inline JarqueBera jarque_bera(std::span<const double> x) {
  if (x.size() < 4) throw Error("Jarque-Bera needs at least four observations");
  const Moments m = moments(x);
  if (!(m.variance > 0.0)) throw DegenerateSample("Jarque-Bera on a zero-variance sample");
  const double n = static_cast<double>(x.size());
  const double ex = m.kurtosis - 3.0;
  const double jb = n / 6.0 * (m.skewness * m.skewness + ex * ex / 4.0);
  return {jb, m.skewness, m.kurtosis, std::exp(-0.5 * jb)};
}

/// Hill-type power-law exponent of p(x) ~ x^-alpha from the largest
/// tail_fraction of the sample: alpha = 1 + k / sum ln(x_i / x_min).
inline double tail_exponent(std::span<const double> abs_values, double tail_fraction = 0.05,
                            std::size_t min_tail = 20) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw ConfigError("tail fraction must be in (0, 1]");
  const auto k = static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(abs_values.size())));
  if (k < min_tail || k < 2) throw Error("not enough tail points for the exponent estimate");
  std::vector<double> x(abs_values.begin(), abs_values.end());
  for (double& v : x) v = std::abs(v);
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k - 1), x.end(), std::greater<>());
  const double xmin = x[k - 1];
  if (!(xmin > 0.0)) throw DegenerateSample("tail threshold is zero");
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(x[i] / xmin);
  if (!(s > 0.0)) throw DegenerateSample("tail has zero log-spacings");
  return 1.0 + static_cast<double>(k) / s;
}

/// One-sample two-tailed Student t-test of mean == mu0.
inline TestResult t_test_one_sample(std::span<const double> x, double mu0) {
  if (x.size() < 2) throw Error("t-test needs at least two observations");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw DegenerateSample("t-test on a zero-variance sample");
  const double t = (mean - mu0) / (sd / std::sqrt(n));
  const boost::math::students_t dist(n - 1.0);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return {t, std::clamp(p, 0.0, 1.0), x.size(), 0};
}

}  // namespace flowgan::stats
