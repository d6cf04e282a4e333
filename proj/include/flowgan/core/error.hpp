#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowgan {

/// Coarse failure categories; the CLI maps them onto exit codes.
enum class ErrorCategory { generic = 1, config = 2, parse = 3, numeric = 4, io = 5 };

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ErrorCategory category = ErrorCategory::generic)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, ErrorCategory::config) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what, ErrorCategory::parse), line_(line), detail_(what) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what, ErrorCategory::numeric) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what, ErrorCategory::io) {}
};

}  // namespace flowgan
