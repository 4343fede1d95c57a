#pragma once

#include <stdexcept>
#include <string>

namespace thermoc {

// A caller broke a documented precondition (bad sigma index, empty samples, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed input text (trace files, CSV); message carries the line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that names something outside the mesh or a value out of range.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration; key() names the offending config key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thermoc
