#pragma once

#include <stdexcept>
#include <string>

namespace bmf {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

/// A computation needed at least one observed cell and got none.
class EmptyMaskError : public Error {
public:
  using Error::Error;
};

/// A probability collapsed to 0/1 and produced a non-finite value.
class NumericalDomainError : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
  ParseError(const std::string& what, long line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  long line() const { return line_; }

private:
  long line_;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace bmf
