#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgan/core/error.hpp"

namespace flowgan::seqgan {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // global gradient norm cap; <= 0 disables
};

/// Adam with global-norm gradient clipping over a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(AdamConfig cfg, std::size_t n) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  /// Applies one descent step along `grad`. Returns the pre-clip gradient norm.
  double step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
      throw Error("Adam: parameter/gradient size mismatch");
    double sq = 0.0;
    for (double g : grad) sq += g * g;
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
    const double scale = (cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm) ? cfg_.clip_norm / norm : 1.0;
    ++steps_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grad[i] * scale;
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
      params[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
    }
    return norm;
  }

  const AdamConfig& config() const noexcept { return cfg_; }
  long steps() const noexcept { return steps_; }

  friend void to_json(nlohmann::json& j, const Adam& a) {
    j = {{"learning_rate", a.cfg_.learning_rate}, {"beta1", a.cfg_.beta1}, {"beta2", a.cfg_.beta2},
         {"epsilon", a.cfg_.epsilon}, {"clip_norm", a.cfg_.clip_norm}, {"steps", a.steps_},
         {"m", a.m_}, {"v", a.v_}};
  }
  friend void from_json(const nlohmann::json& j, Adam& a) {
    a.cfg_.learning_rate = j.at("learning_rate").get<double>();
    a.cfg_.beta1 = j.at("beta1").get<double>();
    a.cfg_.beta2 = j.at("beta2").get<double>();
    a.cfg_.epsilon = j.at("epsilon").get<double>();
    a.cfg_.clip_norm = j.at("clip_norm").get<double>();
    a.steps_ = j.at("steps").get<long>();
    a.m_ = j.at("m").get<std::vector<double>>();
    a.v_ = j.at("v").get<std::vector<double>>();
  }

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  long steps_ = 0;
};

}  // namespace flowgan::seqgan
