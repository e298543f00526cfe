#pragma once

#include <stdexcept>
#include <string>

namespace ierk {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Poisson right-hand side carries a nonzero mean mode.
class NonZeroMean : public Error {
 public:
  using Error::Error;
};

/// Tableau parameter hits an excluded value (a vanishing denominator).
class DegenerateParameter : public Error {
 public:
  using Error::Error;
};

class UnknownTableau : public Error {
 public:
  using Error::Error;
};

class UnknownCase : public Error {
 public:
  using Error::Error;
};

/// A stage produced NaN or Inf.
class NonFiniteState : public Error {
 public:
  NonFiniteState(const std::string& what, long step_index = -1)
      : Error(what), step_index_(step_index) {}
  long step_index() const noexcept { return step_index_; }

 private:
  long step_index_;
};

/// The implicit stage operator 1 - nu*tau*a_ii*lambda_k vanishes for some mode.
class SingularStage : public Error {
 public:
  using Error::Error;
};

/// Adaptive loop cannot make progress.
class StallError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or precondition violation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace ierk
