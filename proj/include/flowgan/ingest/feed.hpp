#pragma once

// Feed readers. The canonical format is NDJSON with one event per line:
//   {"time": 1509753600.25, "type": "limit", "side": "bid", "price": 7300.01, "size": 0.5}
// `type` is limit | market | cancel and `side` is the side of the order's
// owner (bid = buy). Market events may omit `price`. The CSV reader expects
// the same columns under a `time,type,side,price,size` header.
//
// Raw Coinbase full-channel messages can be read with FeedFormat::coinbase:
// open -> limit, match -> market (taker side), done/canceled -> cancel of the
// remaining size, change -> cancel of the old size followed by a limit of the
// new size. received and done/filled messages carry no book change and are
// skipped.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgan/core/error.hpp"
#include "flowgan/lob/types.hpp"

namespace flowgan::ingest {

enum class FeedFormat { ndjson, csv, coinbase };

inline FeedFormat parse_format(std::string_view name) {
  if (name == "ndjson" || name == "json") return FeedFormat::ndjson;
  if (name == "csv") return FeedFormat::csv;
  if (name == "coinbase") return FeedFormat::coinbase;
  throw ConfigError("unknown feed format '" + std::string(name) + "'");
}

namespace detail {

inline lob::OrderKind parse_kind(std::string_view s, std::size_t line) {
  if (s == "limit") return lob::OrderKind::limit;
  if (s == "market") return lob::OrderKind::market;
  if (s == "cancel") return lob::OrderKind::cancel;
  throw ParseError("unknown event type '" + std::string(s) + "'", line);
}

inline lob::Side parse_side(std::string_view s, std::size_t line) {
  if (s == "bid" || s == "buy") return lob::Side::bid;
  if (s == "ask" || s == "sell") return lob::Side::ask;
  throw ParseError("unknown side '" + std::string(s) + "'", line);
}

inline double parse_double(std::string_view s, std::size_t line, const char* field) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ParseError(std::string("malformed ") + field + " '" + std::string(s) + "'", line);
  return v;
}

inline lob::OrderEvent make_event(lob::OrderKind kind, lob::Side side, std::optional<double> price,
                                  double size, double time, const lob::Grid& grid,
                                  std::size_t line) {
  if (!(size > 0.0)) throw ParseError("non-positive size", line);
  lob::OrderEvent ev;
  ev.kind = kind;
  ev.side = side;
  ev.time = time;
  ev.volume = grid.to_lots(size);
  if (ev.volume <= 0) throw ParseError("size below one lot", line);
  if (kind != lob::OrderKind::market) {
    if (!price) throw ParseError("limit/cancel without price", line);
    try {
      ev.price = grid.to_ticks(*price);
    } catch (const Error& e) {
      throw ParseError(e.what(), line);
    }
  }
  return ev;
}

inline std::vector<std::string_view> split_csv(std::string_view row) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= row.size(); ++i) {
    if (i == row.size() || row[i] == ',') {
      cells.push_back(row.substr(start, i - start));
      start = i + 1;
    }
  }
  return cells;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

}  // namespace detail

/// Parses "YYYY-MM-DDTHH:MM:SS[.frac]Z" into seconds since the epoch.
inline double parse_iso8601(std::string_view s, std::size_t line = 0) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':')
    throw ParseError("malformed timestamp '" + std::string(s) + "'", line);
  const auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
    if (ec != std::errc() || p != s.data() + pos + len)
      throw ParseError("malformed timestamp '" + std::string(s) + "'", line);
    return v;
  };
  y = num(0, 4);
  mo = num(5, 2);
  d = num(8, 2);
  h = num(11, 2);
  mi = num(14, 2);
  std::string_view rest = s.substr(17);
  if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
  sec = detail::parse_double(rest, line, "seconds");
  const auto days = detail::days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  return static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + sec;
}

/// Streaming reader over one feed. Emits events in file order and enforces
/// non-decreasing timestamps.
class FeedReader {
 public:
  FeedReader(std::istream& in, FeedFormat format, lob::Grid grid)
      : in_(in), format_(format), grid_(grid) {}

  /// Appends the events of the next non-empty line to `out`; false at EOF.
  bool next(std::vector<lob::OrderEvent>& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      if (format_ == FeedFormat::csv && !header_seen_) {
        parse_header(line);
        continue;
      }
      const std::size_t before = out.size();
      switch (format_) {
        case FeedFormat::ndjson: parse_ndjson(line, out); break;
        case FeedFormat::csv: parse_csv(line, out); break;
        case FeedFormat::coinbase: parse_coinbase(line, out); break;
      }
      for (std::size_t i = before; i < out.size(); ++i) {
        if (out[i].time < last_time_) throw ParseError("timestamp regression", line_no_);
        last_time_ = out[i].time;
      }
      return true;
    }
    return false;
  }

  std::size_t line() const noexcept { return line_no_; }

 private:
  void parse_header(const std::string& line) {
    header_seen_ = true;
    const auto cells = detail::split_csv(line);
    const std::vector<std::string_view> expected{"time", "type", "side", "price", "size"};
    if (cells.size() != expected.size() || !std::equal(cells.begin(), cells.end(), expected.begin()))
      throw ParseError("CSV header must be time,type,side,price,size", line_no_);
  }

  void parse_ndjson(const std::string& line, std::vector<lob::OrderEvent>& out) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const auto kind = detail::parse_kind(j.at("type").get<std::string>(), line_no_);
      const auto side = detail::parse_side(j.at("side").get<std::string>(), line_no_);
      std::optional<double> price;
      if (j.contains("price") && !j["price"].is_null()) price = j["price"].get<double>();
      out.push_back(detail::make_event(kind, side, price, j.at("size").get<double>(),
                                       j.at("time").get<double>(), grid_, line_no_));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no_);
    }
  }

  void parse_csv(const std::string& line, std::vector<lob::OrderEvent>& out) {
    const auto cells = detail::split_csv(line);
    if (cells.size() != 5) throw ParseError("expected 5 CSV columns", line_no_);
    const auto kind = detail::parse_kind(cells[1], line_no_);
    const auto side = detail::parse_side(cells[2], line_no_);
    std::optional<double> price;
    if (!cells[3].empty()) price = detail::parse_double(cells[3], line_no_, "price");
    out.push_back(detail::make_event(kind, side, price,
                                     detail::parse_double(cells[4], line_no_, "size"),
                                     detail::parse_double(cells[0], line_no_, "time"), grid_,
                                     line_no_));
  }

  void parse_coinbase(const std::string& line, std::vector<lob::OrderEvent>& out) {
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      const auto num = [&](const char* key) { return std::stod(j.at(key).get<std::string>()); };
      const auto side_of = [&] { return detail::parse_side(j.at("side").get<std::string>(), line_no_); };
      const auto time_of = [&] { return parse_iso8601(j.at("time").get<std::string>(), line_no_); };
      if (type == "open") {
        out.push_back(detail::make_event(lob::OrderKind::limit, side_of(), num("price"),
                                         num("remaining_size"), time_of(), grid_, line_no_));
      } else if (type == "match") {
        // `side` on a match is the maker's side; the market order is the taker.
        out.push_back(detail::make_event(lob::OrderKind::market, lob::opposite(side_of()),
                                         std::nullopt, num("size"), time_of(), grid_, line_no_));
      } else if (type == "done") {
        if (j.value("reason", "") == "canceled" && j.contains("price") &&
            num("remaining_size") > 0.0)
          out.push_back(detail::make_event(lob::OrderKind::cancel, side_of(), num("price"),
                                           num("remaining_size"), time_of(), grid_, line_no_));
      } else if (type == "change") {
        if (!j.contains("price") || j["price"].is_null()) return;
        const double t = time_of();
        const auto side = side_of();
        out.push_back(detail::make_event(lob::OrderKind::cancel, side, num("price"),
                                         num("old_size"), t, grid_, line_no_));
        if (num("new_size") > 0.0)
          out.push_back(detail::make_event(lob::OrderKind::limit, side, num("price"),
                                           num("new_size"), t, grid_, line_no_));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no_);
    } catch (const std::invalid_argument&) {
      throw ParseError("malformed numeric field", line_no_);
    }
  }

  std::istream& in_;
  FeedFormat format_;
  lob::Grid grid_;
  std::size_t line_no_ = 0;
  bool header_seen_ = false;
  double last_time_ = -std::numeric_limits<double>::infinity();
};

inline std::vector<lob::OrderEvent> parse_feed(std::istream& in, FeedFormat format,
                                               const lob::Grid& grid = {}) {
  FeedReader reader(in, format, grid);
  std::vector<lob::OrderEvent> events;
  while (reader.next(events)) {
  }
  return events;
}

inline std::vector<lob::OrderEvent> parse_feed(const std::string& path, FeedFormat format,
                                               const lob::Grid& grid = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feed '" + path + "'");
  try {
    return parse_feed(in, format, grid);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail(), e.line());
  }
}

/// Merges several time-ordered streams; ties keep the order of the inputs.
inline std::vector<lob::OrderEvent> merge_by_time(std::vector<std::vector<lob::OrderEvent>> feeds) {
  std::vector<lob::OrderEvent> all;
  for (auto& f : feeds) all.insert(all.end(), f.begin(), f.end());
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });
  return all;
}

inline void write_ndjson(std::ostream& out, const std::vector<lob::OrderEvent>& events,
                         const lob::Grid& grid) {
  for (const auto& ev : events) {
    nlohmann::json j;
    j["time"] = ev.time;
    j["type"] = lob::to_string(ev.kind);
    j["side"] = lob::to_string(ev.side);
    if (ev.price) j["price"] = grid.to_price(*ev.price);
    j["size"] = grid.to_size(ev.volume);
    out << j.dump() << '\n';
  }
}

}  // namespace flowgan::ingest
