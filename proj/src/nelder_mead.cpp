#include "wfc/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wfc {

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, std::span<const double> step,
                             const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0 || step.size() != n) throw std::invalid_argument("nelder_mead: bad dimensions");

  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  std::vector<double> vals(n + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2(n + 1);
    std::vector<double> v2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      p2[i] = std::move(pts[order[i]]);
      v2[i] = vals[order[i]];
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };
  auto affine = [n](const std::vector<double>& a, const std::vector<double>& b, double t) {
    // a + t (b - a)
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
  };

  sort_simplex();
  bool converged = false;
  while (true) {
    double f_spread = 0.0;
    double x_spread = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      f_spread = std::max(f_spread, std::abs(vals[i] - vals[0]));
      for (std::size_t k = 0; k < n; ++k) x_spread = std::max(x_spread, std::abs(pts[i][k] - pts[0][k]));
    }
    if (f_spread <= options.f_tol && x_spread <= options.x_tol) {
      converged = true;
      break;
    }
    if (evals >= options.max_evals) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);

    const auto& worst = pts[n];
    auto reflected = affine(centroid, worst, -1.0);
    const double fr = eval(reflected);
    if (fr < vals[0]) {
      auto expanded = affine(centroid, worst, -2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        pts[n] = std::move(expanded);
        vals[n] = fe;
      } else {
        pts[n] = std::move(reflected);
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = std::move(reflected);
      vals[n] = fr;
    } else {
      bool shrink = false;
      if (fr < vals[n]) {
        auto outside = affine(centroid, worst, -0.5);
        const double fc = eval(outside);
        if (fc <= fr) {
          pts[n] = std::move(outside);
          vals[n] = fc;
        } else {
          shrink = true;
        }
      } else {
        auto inside = affine(centroid, worst, 0.5);
        const double fcc = eval(inside);
        if (fcc < vals[n]) {
          pts[n] = std::move(inside);
          vals[n] = fcc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t i = 1; i <= n; ++i) {
          pts[i] = affine(pts[0], pts[i], 0.5);
          vals[i] = eval(pts[i]);
        }
      }
    }
    sort_simplex();
  }
  return {pts[0], vals[0], evals, converged};
}

}  // namespace wfc
