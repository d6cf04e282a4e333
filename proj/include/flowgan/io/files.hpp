#pragma once

// Small file helpers shared by the command-line pipeline.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgan/core/error.hpp"
#include "flowgan/simulate/replay.hpp"

namespace flowgan::io {

namespace fs = std::filesystem;

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Hash of the canonical (sorted-key, compact) JSON dump.
inline std::string config_hash(const nlohmann::json& j) { return hex16(fnv1a(j.dump())); }

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, std::string_view text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + p.string());
}

inline nlohmann::json read_json(const fs::path& p) {
  const std::string text = read_text(p);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what(), 0);
  }
}

inline void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// time,mid,trades per interval end.
inline std::string series_csv(const simulate::MidPriceSeries& s) {
  std::string out = "time,mid,trades\n";
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    out += fmt17(s.start_time + static_cast<double>(k + 1) * s.interval);
    out += ',';
    out += fmt17(s.values[k]);
    out += ',';
    out += std::to_string(k < s.trades.size() ? s.trades[k] : 0);
    out += '\n';
  }
  return out;
}

inline simulate::MidPriceSeries parse_series_csv(std::string_view text, const std::string& name = "series") {
  simulate::MidPriceSeries s;
  std::vector<double> times;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "time,mid,trades") throw ParseError(name + ": unexpected series header", line_no);
      continue;
    }
    double t = 0.0, mid = 0.0;
    unsigned long trades = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lu", &t, &mid, &trades) != 3)
      throw ParseError(name + ": malformed series row", line_no);
    times.push_back(t);
    s.values.push_back(mid);
    s.trades.push_back(static_cast<std::uint32_t>(trades));
  }
  if (times.size() < 2) throw ParseError(name + ": series needs at least two rows", line_no);
  s.interval = std::round((times[1] - times[0]) * 1e6) / 1e6;
  s.start_time = times[0] - s.interval;
  return s;
}

}  // namespace flowgan::io
