#pragma once

#include <stdexcept>
#include <string>

namespace hpfem {

/// Bad input to a library call (out-of-range degree, degenerate interval, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A symmetric system turned out not to be positive definite.
class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(const std::string& what, int pivot_index, double pivot)
      : std::runtime_error(what), pivot_index_(pivot_index), pivot_(pivot) {}
  int pivot_index() const noexcept { return pivot_index_; }
  double pivot() const noexcept { return pivot_; }

 private:
  int pivot_index_;
  double pivot_;
};

/// Iterative solver stopped before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double relative_residual, int iterations)
      : std::runtime_error(what), relative_residual_(relative_residual), iterations_(iterations) {}
  double relative_residual() const noexcept { return relative_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double relative_residual_;
  int iterations_;
};

/// Enrichment functions (together with the reduced solution) are linearly dependent.
class DependentEnrichmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hpfem
