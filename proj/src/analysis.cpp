#include "wfc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace wfc {

double coefficient_error(Complex exact, Complex estimate) { return std::abs(exact - estimate); }

ExponentialFit fit_exponential(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("exponential fit needs at least 3 points");
  const auto n = static_cast<double>(points.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& [x, eps] : points) {
    if (!(eps > 0.0) || !std::isfinite(eps))
      throw std::domain_error("exponential fit needs positive finite errors");
    mean_x += x;
    mean_y += std::log(eps);
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, eps] : points) {
    const double dx = x - mean_x;
    const double dy = std::log(eps) - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("exponential fit needs at least two distinct N");

  ExponentialFit fit;
  const double slope = sxy / sxx;
  fit.alpha = -slope;
  fit.beta = std::exp(mean_y - slope * mean_x);
  fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  fit.points.assign(points.begin(), points.end());
  return fit;
}

TrialAggregate aggregate_trials(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  auto quantile = [&v](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double t = h - static_cast<double>(lo);
    return t == 0.0 ? v[lo] : v[lo] + t * (v[hi] - v[lo]);
  };
  return {v.front(), quantile(0.25), quantile(0.5), quantile(0.75), v.back(), v.size()};
}

double median_of_medians(std::span<const double> per_state_medians) {
  return aggregate_trials(per_state_medians).median;
}

void write_fit_csv(std::ostream& os, std::span<const FitRow> rows) {
  const auto old_precision = os.precision(17);
  os << "d,l,alpha,beta,r_squared,n_points\n";
  for (const auto& r : rows)
    os << r.d << ',' << r.l << ',' << r.fit.alpha << ',' << r.fit.beta << ',' << r.fit.r_squared << ','
       << r.fit.points.size() << '\n';
  os.precision(old_precision);
}

void write_aggregate_csv(std::ostream& os, std::span<const AggregateRow> rows) {
  const auto old_precision = os.precision(17);
  os << "config_id,min,q1,median,q3,max,n\n";
  for (const auto& r : rows)
    os << r.config_id << ',' << r.stats.min << ',' << r.stats.q1 << ',' << r.stats.median << ',' << r.stats.q3
       << ',' << r.stats.max << ',' << r.stats.n << '\n';
  os.precision(old_precision);
}

}  // namespace wfc
