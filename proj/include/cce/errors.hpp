#pragma once

#include <stdexcept>
#include <string>

namespace cce {

/// Input outside the domain of an operation (non-positive-definite metric,
/// boundary data violating its invariants, jet evaluated outside its trust
/// radius, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The square root in the algebraic y1' relation has a negative argument.
/// Carries the abscissa where it happened and how negative the radicand was.
class BranchDomainError : public DomainError {
 public:
  BranchDomainError(double x, double radicand)
      : DomainError("negative radicand " + std::to_string(radicand) +
                    " in y1' branch at x=" + std::to_string(x)),
        x_(x),
        radicand_(radicand) {}

  double x() const noexcept { return x_; }
  double radicand() const noexcept { return radicand_; }

 private:
  double x_;
  double radicand_;
};

/// Adaptive step size fell below the configured floor.
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(double x, double h)
      : std::runtime_error("step size " + std::to_string(h) +
                           " underflow at x=" + std::to_string(x)),
        x_(x) {}

  double x() const noexcept { return x_; }

 private:
  double x_;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cce
