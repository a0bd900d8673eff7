#pragma once

#include <stdexcept>
#include <string>

namespace fdrsmooth {

/// A density or model estimate could not be produced from the data.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver hit its iteration cap before meeting tolerance.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, int iterations, double primal_residual,
                      double dual_residual)
      : std::runtime_error(what),
        iterations_(iterations),
        primal_residual_(primal_residual),
        dual_residual_(dual_residual) {}

  int iterations() const noexcept { return iterations_; }
  double primal_residual() const noexcept { return primal_residual_; }
  double dual_residual() const noexcept { return dual_residual_; }

 private:
  int iterations_;
  double primal_residual_;
  double dual_residual_;
};

/// Every point of a solution path failed.
class PathFailureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sink for non-fatal diagnostics (small samples, degenerate posteriors).
/// The default writes "fdrsmooth: warning: ..." to stderr.
using WarningHandler = void (*)(const std::string& message);
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace fdrsmooth
