#pragma once

#include "wfc/qstate.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wfc {

double coefficient_error(Complex exact, Complex estimate);

/// eps ~ beta exp(-alpha N), fitted by least squares on (N, ln eps).
struct ExponentialFit {
  double alpha = 0.0;
  double beta = 0.0;
  double r_squared = 0.0;  // 1 when ln eps is constant
  std::vector<std::pair<double, double>> points;
};

/// Needs >= 3 points with distinct N and positive errors.
ExponentialFit fit_exponential(std::span<const std::pair<double, double>> points);

/// Quartiles interpolate linearly between order statistics, so an even count
/// gives the mean of the two middle values as the median.
struct TrialAggregate {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

TrialAggregate aggregate_trials(std::span<const double> values);
double median_of_medians(std::span<const double> per_state_medians);

struct FitRow {
  int d = 2;
  int l = 2;
  ExponentialFit fit;
};

struct AggregateRow {
  std::string config_id;
  TrialAggregate stats;
};

void write_fit_csv(std::ostream& os, std::span<const FitRow> rows);
void write_aggregate_csv(std::ostream& os, std::span<const AggregateRow> rows);

}  // namespace wfc
