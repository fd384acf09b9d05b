#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace wfc {

/// A numerical routine failed to reach its target (non-convergence,
/// divergence). Carries the best residual seen, when meaningful.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, double best_residual = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wfc
