#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mgdil {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad registry, config file or flag combination. Fatal for the run.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input text. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Network or remote-service failure.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace mgdil
