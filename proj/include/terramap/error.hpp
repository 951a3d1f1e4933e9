#pragma once

#include <stdexcept>
#include <string>

namespace terramap {

/// Base class for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Sensor data arrived out of timestamp order.
class OrderingError : public Error {
 public:
  using Error::Error;
};

/// Gravity/bias initialization could not be performed.
class InitializationError : public Error {
 public:
  using Error::Error;
};

/// The requested scenario cannot be generated (e.g. no reachable foothold).
class InfeasibleScenario : public Error {
 public:
  using Error::Error;
};

/// Configuration document failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A text file (TUM trajectory, CSV) could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace terramap
