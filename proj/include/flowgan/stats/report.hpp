#pragma once

// Evaluation report comparing simulated path sets against the real series.
//
// For every horizon (first H hours of each series):
//   ks_rejections   - per-path two-sample K-S of log-returns vs real, Hochberg
//                     rejection count at ks_alpha
//   real_tails      - real tail exponent, JB kurtosis and p-value
//   model_kurtosis  - mean JB kurtosis across paths and Hochberg rejection
//                     count of the JB normality null at jb_alpha
//   tail_tests      - t-test of path tail exponents against the real exponent
//   real_volatility - v_r, v_p, v_d of the real series
//   vol_tests       - t-test of each path volatility measure against the real one
// Statistics that cannot be computed (too few tail points, zero variance) are
// reported as absent rather than as NaN.

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgan/simulate/replay.hpp"
#include "flowgan/stats/tests.hpp"
#include "flowgan/stats/volatility.hpp"

namespace flowgan::stats {

using simulate::MidPriceSeries;

struct ReportConfig {
  std::vector<double> horizons_hours{1.0, 6.0, 48.0};
  double ks_alpha = 0.1;
  double jb_alpha = 0.01;
  double tail_fraction = 0.05;
};

struct ModelPaths {
  std::string name;
  std::vector<MidPriceSeries> paths;
};

struct KsRow {
  double hours = 0.0;
  std::vector<std::size_t> rejections;  // per model
};

struct RealTailRow {
  double hours = 0.0;
  std::optional<double> tail_exponent;
  double kurtosis = 0.0;
  double p_value = 1.0;
};

struct KurtosisCell {
  double mean_kurtosis = 0.0;
  std::size_t rejections = 0;
  std::size_t evaluated = 0;  // paths with a non-degenerate sample
};

struct KurtosisRow {
  double hours = 0.0;
  std::vector<KurtosisCell> models;
};

struct TailTestRow {
  double hours = 0.0;
  std::vector<std::optional<TestResult>> models;
};

struct RealVolRow {
  double hours = 0.0;
  VolatilityTriple v;
};

struct VolTestRow {
  double hours = 0.0;
  int measure = 0;  // 0 = v_r, 1 = v_p, 2 = v_d
  std::vector<std::optional<TestResult>> models;
};

struct EvalReport {
  ReportConfig config;
  std::vector<std::string> models;
  std::size_t path_count = 0;
  std::vector<KsRow> ks;
  std::vector<RealTailRow> real_tails;
  std::vector<KurtosisRow> kurtosis;
  std::vector<TailTestRow> tail_tests;
  std::vector<RealVolRow> real_volatility;
  std::vector<VolTestRow> vol_tests;
};

inline const char* measure_name(int m) { return m == 0 ? "v_r" : m == 1 ? "v_p" : "v_d"; }

namespace detail {

struct Window {
  std::vector<double> prices;
  std::size_t trades = 0;
};

inline std::optional<Window> first_hours(const MidPriceSeries& s, double hours) {
  const auto n = static_cast<std::size_t>(std::llround(hours * 3600.0 / s.interval));
  if (n < 2 || n > s.values.size()) return std::nullopt;
  Window w;
  w.prices.assign(s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t k = 0; k < n && k < s.trades.size(); ++k) w.trades += s.trades[k];
  return w;
}

inline double component(const VolatilityTriple& v, int m) {
  return m == 0 ? v.realized : m == 1 ? v.per_trade : v.intraday;
}

inline std::optional<TestResult> try_t_test(const std::vector<double>& xs, double mu0) {
  if (xs.size() < 2) return std::nullopt;
  try {
    return t_test_one_sample(xs, mu0);
  } catch (const DegenerateSample&) {
    return std::nullopt;
  }
}

}  // namespace detail

inline EvalReport build_report(const MidPriceSeries& real, std::span<const ModelPaths> models,
                               const ReportConfig& cfg = {}) {
  EvalReport rep;
  rep.config = cfg;
  for (const auto& m : models) {
    rep.models.push_back(m.name);
    rep.path_count = std::max(rep.path_count, m.paths.size());
    for (const auto& p : m.paths)
      if (std::abs(p.interval - real.interval) > 1e-6 * real.interval) throw ConfigError("path and real series intervals differ");
  }
  for (double h : cfg.horizons_hours) {
    const auto rw = detail::first_hours(real, h);
    if (!rw) continue;
    bool all_long_enough = true;
    for (const auto& m : models)
      for (const auto& p : m.paths) all_long_enough = all_long_enough && detail::first_hours(p, h).has_value();
    if (!all_long_enough) continue;

    const auto real_r = log_returns(rw->prices);
    std::vector<double> real_abs(real_r.size());
    for (std::size_t i = 0; i < real_r.size(); ++i) real_abs[i] = std::abs(real_r[i]);

    RealTailRow tail_row{h, std::nullopt, 0.0, 1.0};
    try {
      tail_row.tail_exponent = tail_exponent(real_abs, cfg.tail_fraction);
    } catch (const Error&) {
    }
    try {
      const auto jb = jarque_bera(real_r);
      tail_row.kurtosis = jb.kurtosis;
      tail_row.p_value = jb.p_value;
    } catch (const DegenerateSample&) {
      tail_row.kurtosis = 0.0;
      tail_row.p_value = 1.0;
    }
    rep.real_tails.push_back(tail_row);

    const auto real_vol = volatilities(rw->prices, rw->trades);
    rep.real_volatility.push_back({h, real_vol});

    KsRow ks{h, {}};
    KurtosisRow kr{h, {}};
    TailTestRow tr{h, {}};
    std::vector<VolTestRow> vr{{h, 0, {}}, {h, 1, {}}, {h, 2, {}}};
    for (const auto& m : models) {
      std::vector<double> ks_p, jb_p, tails;
      std::vector<double> vols[3];
      double kurt_sum = 0.0;
      for (const auto& path : m.paths) {
        const auto w = *detail::first_hours(path, h);
        const auto r = log_returns(w.prices);
        ks_p.push_back(ks_two_sample(r, real_r).p_value);
        try {
          const auto jb = jarque_bera(r);
          jb_p.push_back(jb.p_value);
          kurt_sum += jb.kurtosis;
        } catch (const DegenerateSample&) {
        }
        std::vector<double> abs_r(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) abs_r[i] = std::abs(r[i]);
        try {
          tails.push_back(tail_exponent(abs_r, cfg.tail_fraction));
        } catch (const Error&) {
        }
        const auto v = volatilities(w.prices, w.trades);
        for (int k = 0; k < 3; ++k) vols[k].push_back(detail::component(v, k));
      }
      ks.rejections.push_back(hochberg(ks_p, cfg.ks_alpha).size());
      KurtosisCell cell;
      cell.evaluated = jb_p.size();
      cell.mean_kurtosis = jb_p.empty() ? 0.0 : kurt_sum / static_cast<double>(jb_p.size());
      cell.rejections = hochberg(jb_p, cfg.jb_alpha).size();
      kr.models.push_back(cell);
      tr.models.push_back(tail_row.tail_exponent ? detail::try_t_test(tails, *tail_row.tail_exponent)
                                                 : std::nullopt);
      for (int k = 0; k < 3; ++k) vr[static_cast<std::size_t>(k)].models.push_back(
          detail::try_t_test(vols[k], detail::component(real_vol, k)));
    }
    rep.ks.push_back(std::move(ks));
    rep.kurtosis.push_back(std::move(kr));
    rep.tail_tests.push_back(std::move(tr));
    for (auto& row : vr) rep.vol_tests.push_back(std::move(row));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string horizon_label(double hours) {
  char buf[32];
  if (hours == std::floor(hours))
    std::snprintf(buf, sizeof buf, "%lld %s", static_cast<long long>(hours), hours == 1.0 ? "Hour" : "Hours");
  else
    std::snprintf(buf, sizeof buf, "%g Hours", hours);
  return buf;
}

inline std::string fmt_fixed(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string fmt_sig(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string row(const std::string& label, const std::vector<std::string>& cells) {
  std::string s = label;
  for (const auto& c : cells) s += " | " + c;
  return s;
}

/// Plain-text tables, one block per table.
inline std::string render_text(const EvalReport& r) {
  std::ostringstream os;
  const auto header = [&](const std::string& title, const std::vector<std::string>& cols) {
    os << title << '\n' << row("Length", cols) << '\n';
  };
  header("K-S rejections (Hochberg, alpha = " + fmt_sig(r.config.ks_alpha) + ")", r.models);
  for (const auto& k : r.ks) {
    std::vector<std::string> cells;
    for (auto n : k.rejections) cells.push_back(std::to_string(n));
    os << row(horizon_label(k.hours), cells) << '\n';
  }
  os << '\n';
  header("Real series tails", {"Tail-Exponent", "Kurtosis", "p-value"});
  for (const auto& t : r.real_tails)
    os << row(horizon_label(t.hours), {t.tail_exponent ? fmt_fixed(*t.tail_exponent) : "n/a",
                                       fmt_fixed(t.kurtosis), fmt_fixed(t.p_value)})
       << '\n';
  os << '\n';
  header("Jarque-Bera across paths (Hochberg, alpha = " + fmt_sig(r.config.jb_alpha) + ")", r.models);
  for (const auto& k : r.kurtosis) {
    std::vector<std::string> mean, rej;
    for (const auto& c : k.models) {
      mean.push_back(fmt_fixed(c.mean_kurtosis));
      rej.push_back(std::to_string(c.rejections));
    }
    os << row(horizon_label(k.hours) + " | Mean Kurtosis", mean) << '\n';
    os << row(horizon_label(k.hours) + " | Rejection Count", rej) << '\n';
  }
  os << '\n';
  header("Tail-exponent t-tests", r.models);
  for (const auto& t : r.tail_tests) {
    std::vector<std::string> p, s;
    for (const auto& c : t.models) {
      p.push_back(c ? fmt_fixed(c->p_value) : "n/a");
      s.push_back(c ? fmt_fixed(c->statistic) : "n/a");
    }
    os << row(horizon_label(t.hours) + " | p-value", p) << '\n';
    os << row(horizon_label(t.hours) + " | t-statistic", s) << '\n';
  }
  os << '\n';
  header("Real series volatility", {"v_r", "v_p", "v_d"});
  for (const auto& v : r.real_volatility)
    os << row(horizon_label(v.hours), {fmt_sig(v.v.realized), fmt_sig(v.v.per_trade), fmt_sig(v.v.intraday)})
       << '\n';
  os << '\n';
  std::vector<std::string> cols;
  for (const auto& m : r.models) {
    cols.push_back(m + " t-statistic");
    cols.push_back(m + " p-value");
  }
  header("Volatility t-tests", cols);
  for (const auto& v : r.vol_tests) {
    std::vector<std::string> cells;
    for (const auto& c : v.models) {
      cells.push_back(c ? fmt_fixed(c->statistic) : "n/a");
      cells.push_back(c ? fmt_fixed(c->p_value) : "n/a");
    }
    os << row(horizon_label(v.hours) + " | " + measure_name(v.measure), cells) << '\n';
  }
  return os.str();
}

namespace detail {

inline nlohmann::json opt_test(const std::optional<TestResult>& t) {
  if (!t) return nullptr;
  return {{"statistic", t->statistic}, {"p_value", t->p_value}, {"n", t->n1}};
}

inline std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_opt(const std::optional<TestResult>& t, bool stat) {
  return t ? csv_num(stat ? t->statistic : t->p_value) : "";
}

}  // namespace detail

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["config"] = {{"horizons_hours", r.config.horizons_hours}, {"ks_alpha", r.config.ks_alpha},
                 {"jb_alpha", r.config.jb_alpha}, {"tail_fraction", r.config.tail_fraction}};
  j["models"] = r.models;
  j["path_count"] = r.path_count;
  for (const auto& k : r.ks) j["ks_rejections"].push_back({{"hours", k.hours}, {"rejections", k.rejections}});
  for (const auto& t : r.real_tails)
    j["real_tails"].push_back({{"hours", t.hours},
                               {"tail_exponent", t.tail_exponent ? nlohmann::json(*t.tail_exponent) : nlohmann::json()},
                               {"kurtosis", t.kurtosis},
                               {"p_value", t.p_value}});
  for (const auto& k : r.kurtosis) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : k.models)
      cells.push_back({{"mean_kurtosis", c.mean_kurtosis}, {"rejections", c.rejections}, {"evaluated", c.evaluated}});
    j["model_kurtosis"].push_back({{"hours", k.hours}, {"models", cells}});
  }
  for (const auto& t : r.tail_tests) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : t.models) cells.push_back(detail::opt_test(c));
    j["tail_tests"].push_back({{"hours", t.hours}, {"models", cells}});
  }
  for (const auto& v : r.real_volatility)
    j["real_volatility"].push_back(
        {{"hours", v.hours}, {"v_r", v.v.realized}, {"v_p", v.v.per_trade}, {"v_d", v.v.intraday}});
  for (const auto& v : r.vol_tests) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : v.models) cells.push_back(detail::opt_test(c));
    j["vol_tests"].push_back({{"hours", v.hours}, {"measure", measure_name(v.measure)}, {"models", cells}});
  }
  return j;
}

/// One CSV document per table, keyed by file stem.
inline std::vector<std::pair<std::string, std::string>> to_csv(const EvalReport& r) {
  using detail::csv_num;
  std::vector<std::pair<std::string, std::string>> out;
  std::ostringstream ks, tails, kurt, tt, vol, vt;
  ks << "hours";
  kurt << "hours";
  tt << "hours";
  vt << "hours,measure";
  for (const auto& m : r.models) {
    ks << ',' << m;
    kurt << ',' << m << "_mean_kurtosis," << m << "_rejections";
    tt << ',' << m << "_t," << m << "_p";
    vt << ',' << m << "_t," << m << "_p";
  }
  ks << '\n';
  kurt << '\n';
  tt << '\n';
  vt << '\n';
  for (const auto& k : r.ks) {
    ks << csv_num(k.hours);
    for (auto n : k.rejections) ks << ',' << n;
    ks << '\n';
  }
  tails << "hours,tail_exponent,kurtosis,p_value\n";
  for (const auto& t : r.real_tails)
    tails << csv_num(t.hours) << ',' << (t.tail_exponent ? csv_num(*t.tail_exponent) : "") << ','
          << csv_num(t.kurtosis) << ',' << csv_num(t.p_value) << '\n';
  for (const auto& k : r.kurtosis) {
    kurt << csv_num(k.hours);
    for (const auto& c : k.models) kurt << ',' << csv_num(c.mean_kurtosis) << ',' << c.rejections;
    kurt << '\n';
  }
  for (const auto& t : r.tail_tests) {
    tt << csv_num(t.hours);
    for (const auto& c : t.models) tt << ',' << detail::csv_opt(c, true) << ',' << detail::csv_opt(c, false);
    tt << '\n';
  }
  vol << "hours,v_r,v_p,v_d\n";
  for (const auto& v : r.real_volatility)
    vol << csv_num(v.hours) << ',' << csv_num(v.v.realized) << ',' << csv_num(v.v.per_trade) << ','
        << csv_num(v.v.intraday) << '\n';
  for (const auto& v : r.vol_tests) {
    vt << csv_num(v.hours) << ',' << measure_name(v.measure);
    for (const auto& c : v.models) vt << ',' << detail::csv_opt(c, true) << ',' << detail::csv_opt(c, false);
    vt << '\n';
  }
  out.emplace_back("ks_rejections", ks.str());
  out.emplace_back("real_tails", tails.str());
  out.emplace_back("model_kurtosis", kurt.str());
  out.emplace_back("tail_tests", tt.str());
  out.emplace_back("real_volatility", vol.str());
  out.emplace_back("volatility_tests", vt.str());
  return out;
}

}  // namespace flowgan::stats
