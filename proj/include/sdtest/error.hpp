// error.hpp
//
// Exception types. Construction-time validation throws ConfigError; arguments
// outside a function's mathematical domain throw DomainError.

#pragma once

#include <stdexcept>
#include <string>

namespace sdtest {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class TieError : public Error {
 public:
  TieError(const std::string& what, double value) : Error(what), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

class InsufficientReplicatesError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdtest
