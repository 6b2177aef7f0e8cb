#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace srlearn {

/// Invalid input: violated precondition, dimension mismatch, label out of range.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A training step whose data cannot support a binary fit (too few subjects,
/// one label class, unstratifiable folds). Callers fall back to a constant rule.
class DegenerateStep : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver stopped at its cap without reaching tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double violation)
      : std::runtime_error(what), violation_(violation) {}
  double violation() const noexcept { return violation_; }

 private:
  double violation_;
};

/// Metric undefined on the given data (e.g. no subject matched the rule).
class UndefinedMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline bool parse_int(std::string_view s, long long& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace srlearn
