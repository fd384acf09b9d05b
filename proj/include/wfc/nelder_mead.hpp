#pragma once

#include <functional>
#include <span>
#include <vector>

namespace wfc {

struct NelderMeadOptions {
  double x_tol = 1e-12;   // simplex extent, infinity norm
  double f_tol = 1e-14;   // spread of objective values over the simplex
  int max_evals = 500;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Downhill simplex with the standard coefficients (reflection 1, expansion
/// 2, contraction 1/2, shrink 1/2) and the fminsearch-style stopping rule:
/// both the simplex extent and the objective spread fall below tolerance.
/// The initial simplex is x0 and x0 + step[i] e_i.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, std::span<const double> step,
                             const NelderMeadOptions& options = {});

}  // namespace wfc
