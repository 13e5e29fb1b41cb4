#pragma once

#include <stdexcept>
#include <string>

namespace rdlab {

/// Argument outside the mathematical domain of an operation (negative time, k <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ModeIndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A structural hypothesis on the coefficients is required but not satisfied.
class HypothesisViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation needs data the caller did not supply (e.g. gradient metadata).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, std::size_t step, double sup_norm)
      : std::runtime_error(what), step_(step), sup_norm_(sup_norm) {}
  std::size_t step() const noexcept { return step_; }
  double sup_norm() const noexcept { return sup_norm_; }

 private:
  std::size_t step_;
  double sup_norm_;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rdlab
