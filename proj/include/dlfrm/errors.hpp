#pragma once

#include <stdexcept>
#include <string>

namespace dlfrm {

/// Exit-code category an error maps to at the CLI boundary.
enum class ErrorKind { usage = 1, data = 2, numerical = 3 };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

// Out-of-domain distribution or model parameter.
class ParameterError : public Error {
public:
  explicit ParameterError(const std::string &what)
      : Error(ErrorKind::usage, what) {}
};

class UsageError : public Error {
public:
  explicit UsageError(const std::string &what)
      : Error(ErrorKind::usage, what) {}
};

class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line)
      : Error(ErrorKind::data, what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class RangeError : public Error {
public:
  explicit RangeError(const std::string &what)
      : Error(ErrorKind::data, what) {}
};

// Not enough candidate links to satisfy a split request.
class CapacityError : public Error {
public:
  explicit CapacityError(const std::string &what)
      : Error(ErrorKind::data, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string &what) : Error(ErrorKind::data, what) {}
};

class CheckpointError : public Error {
public:
  explicit CheckpointError(const std::string &what)
      : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string &what)
      : Error(ErrorKind::numerical, what) {}
};

} // namespace dlfrm
