#pragma once

#include <stdexcept>
#include <string>

namespace debias {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A query the law cannot answer, e.g. a fixed survival function of an adaptive law.
class UnsupportedQuery : public Error {
 public:
  using Error::Error;
};

/// Expected cost E[c(N)] is infinite for this law/model pairing.
class DivergentCost : public Error {
 public:
  using Error::Error;
};

class InfeasibleLaw : public Error {
 public:
  using Error::Error;
};

class InfeasibleBudget : public Error {
 public:
  using Error::Error;
};

class DegenerateDesign : public Error {
 public:
  using Error::Error;
};

class InvalidLevel : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

/// A level sequence model failed while producing level `level()`.
class LevelFailure : public Error {
 public:
  LevelFailure(int level, const std::string& what)
      : Error("level " + std::to_string(level) + ": " + what), level_(level) {}

  int level() const noexcept { return level_; }

 private:
  int level_;
};

/// Adaptive truncation reached its hard level guard before stopping.
class GuardExhausted : public Error {
 public:
  explicit GuardExhausted(long n_max)
      : Error("adaptive truncation reached guard n_max=" + std::to_string(n_max)),
        n_max_(n_max) {}

  long n_max() const noexcept { return n_max_; }

 private:
  long n_max_;
};

}  // namespace debias
