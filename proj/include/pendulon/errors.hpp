#pragma once

#include <stdexcept>
#include <string>

namespace pendulon {

/// Input outside the domain where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed (non-finite state, Newton stall, singular system).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double at = 0.0, double residual = 0.0)
      : std::runtime_error(what), at_(at), residual_(residual) {}

  /// Time or iteration where the failure was detected.
  double at() const noexcept { return at_; }
  double residual() const noexcept { return residual_; }

 private:
  double at_;
  double residual_;
};

}  // namespace pendulon
