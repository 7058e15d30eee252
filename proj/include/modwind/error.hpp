#pragma once

#include <stdexcept>
#include <string>

namespace modwind {

// Precondition violated by the caller (bad digit, odd length, |tr| <= 2, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A computation would exceed its configured work budget.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, double best_tolerance = 0.0)
      : std::runtime_error(what), best_tolerance_(best_tolerance) {}

  // Smallest tolerance reachable inside the budget, when meaningful.
  double best_tolerance() const noexcept { return best_tolerance_; }

 private:
  double best_tolerance_;
};

}  // namespace modwind
