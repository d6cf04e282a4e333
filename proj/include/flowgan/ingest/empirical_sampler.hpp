#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "flowgan/core/error.hpp"
#include "flowgan/core/rng.hpp"

namespace flowgan::ingest {

/// Inverse-ECDF sampler over observed values. Draws are uniform over the
/// stored observations with replacement, so only observed values come back.
template <class T>
class EmpiricalSampler {
 public:
  EmpiricalSampler() = default;

  explicit EmpiricalSampler(std::vector<T> values) : values_(std::move(values)) {
    if (values_.empty()) throw Error("empirical sampler needs at least one value");
    for (const T& v : values_)
      if (!(v > T{})) throw Error("empirical sampler values must be positive");
    std::sort(values_.begin(), values_.end());
  }

  T sample(Rng& rng) const {
    // floor(u * n) inverts the ECDF at u.
    return values_[uniform_index(rng, values_.size())];
  }

  /// Generalized inverse of the ECDF; u in [0, 1).
  T quantile(double u) const {
    auto i = static_cast<std::size_t>(u * static_cast<double>(values_.size()));
    return values_[std::min(i, values_.size() - 1)];
  }

  std::span<const T> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

 private:
  std::vector<T> values_;
};

template <class T>
EmpiricalSampler<T> fit_empirical(std::span<const T> values) {
  return EmpiricalSampler<T>(std::vector<T>(values.begin(), values.end()));
}

}  // namespace flowgan::ingest
