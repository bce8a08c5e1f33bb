#pragma once

#include <stdexcept>
#include <string>

namespace banksim {

// Base of every error raised by the library. The CLI maps ConfigError to exit
// code 2 and every other banksim::Error to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class EmptyMeasure : public DomainError {
 public:
  EmptyMeasure() : DomainError("empirical measure is empty") {}
};

class EmptyState : public DomainError {
 public:
  EmptyState() : DomainError("system state has no banks") {}
};

class ExplosionSuspected : public DomainError {
 public:
  using DomainError::DomainError;
};

class NumericalBlowup : public DomainError {
 public:
  using DomainError::DomainError;
};

class BracketError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace banksim
