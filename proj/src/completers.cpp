#include "wfc/completers.hpp"

#include "wfc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace wfc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double fidelity_error(const ComplexVector& exact, const ComplexVector& x) {
  const double ne = exact.squaredNorm();
  const double nx = x.squaredNorm();
  if (ne == 0.0 || nx == 0.0) return kNaN;
  const ComplexVector perp = x - (exact.dot(x) / ne) * exact;
  return std::clamp(perp.squaredNorm() / nx, 0.0, 1.0);
}

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

// Rank-chi truncation through the eigendecomposition of the smaller Gram
// matrix. Singular values below about 1e-8 sigma_max are not resolved; the
// kept subspace is. Returns false when chi covers the full rank.
bool gram_truncate(ComplexMatrix& a, Eigen::Index chi, std::vector<double>& spectrum, ComplexMatrix& gram,
                   ComplexMatrix& basis) {
  const bool wide = a.rows() <= a.cols();
  const Eigen::Index k = wide ? a.rows() : a.cols();
  if (wide)
    gram.noalias() = a * a.adjoint();
  else
    gram.noalias() = a.adjoint() * a;
  const bool truncate = chi < k;
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
      gram, truncate ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  spectrum.resize(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) spectrum[static_cast<std::size_t>(i)] = std::sqrt(std::max(ev(k - 1 - i), 0.0));
  if (!truncate) return false;
  basis = es.eigenvectors().rightCols(chi);
  if (wide)
    a = basis * (basis.adjoint() * a);
  else
    a = (a * basis) * basis.adjoint();
  return true;
}

void require_exact_matches(const SampleMask& mask, const StateVector* exact) {
  if (exact && exact->size() != mask.total())
    throw std::invalid_argument("exact state dimension does not match the mask");
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::automatic: return "automatic";
    case ScheduleKind::all_blocks: return "all_blocks";
    case ScheduleKind::prefix_cuts: return "prefix_cuts";
    case ScheduleKind::central_cut_only: return "central_cut_only";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(std::string_view s) {
  if (s == "automatic" || s == "auto") return ScheduleKind::automatic;
  if (s == "all_blocks") return ScheduleKind::all_blocks;
  if (s == "prefix_cuts") return ScheduleKind::prefix_cuts;
  if (s == "central_cut_only" || s == "central") return ScheduleKind::central_cut_only;
  throw std::invalid_argument("unknown schedule kind '" + std::string(s) + "'");
}

std::string_view to_string(Truncation t) { return t == Truncation::gram ? "gram" : "svd"; }

Truncation truncation_from_string(std::string_view s) {
  if (s == "gram") return Truncation::gram;
  if (s == "svd") return Truncation::svd;
  throw std::invalid_argument("unknown truncation method '" + std::string(s) + "'");
}

std::vector<Bipartition> make_schedule(const StateShape& shape, ScheduleKind kind) {
  shape.validate();
  const int n = shape.num_sites;
  if (kind == ScheduleKind::automatic)
    kind = shape.boundary == Boundary::periodic ? ScheduleKind::all_blocks : ScheduleKind::prefix_cuts;

  std::vector<Bipartition> cuts;
  switch (kind) {
    case ScheduleKind::all_blocks:
      if (shape.boundary != Boundary::periodic)
        throw std::invalid_argument("all_blocks schedule requires periodic boundaries");
      for (int m = 1; m <= n / 2; ++m)
        for (int s = 1; s <= n; ++s) {
          if (2 * m == n && s > m) continue;  // same cut as the block starting at s - m
          cuts.push_back({s, m});
        }
      break;
    case ScheduleKind::prefix_cuts:
      for (int m = 1; m <= n / 2; ++m) cuts.push_back({1, m});
      break;
    case ScheduleKind::central_cut_only:
      cuts.push_back(central_cut(shape));
      break;
    case ScheduleKind::automatic:
      break;
  }
  return cuts;
}

void CompleterConfig::validate(const StateShape& shape) const {
  if (chi_max != 0 && chi_max < shape.local_dim) throw std::invalid_argument("chi_max must be >= d");
  if (chi_start < 0) throw std::invalid_argument("chi_start must be >= 1 (or 0 for d)");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (!(inner_tol > 0.0) || !(outer_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
}

void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace) {
  os << "chi,k,cut_sweeps,fidelity_error,mean_s_half,rel_change\n";
  const auto old_precision = os.precision(17);
  for (const auto& r : trace.records)
    os << r.chi << ',' << r.k << ',' << r.cut_sweeps << ',' << r.fidelity_error << ',' << r.mean_s_half << ','
       << r.rel_change << '\n';
  os.precision(old_precision);
}

void finalize_completion(Eigen::Ref<ComplexVector> x, const SampleMask& mask,
                         const std::vector<std::uint64_t>& unsampled) {
  project_data_in_place(x, mask);
  double sampled_sq = 0.0;
  for (const auto& v : mask.values) sampled_sq += std::norm(v);
  double unsampled_sq = 0.0;
  for (auto i : unsampled) unsampled_sq += std::norm(x[static_cast<Eigen::Index>(i)]);
  if (unsampled_sq > 0.0 && sampled_sq < 1.0) {
    const double scale = std::sqrt((1.0 - sampled_sq) / unsampled_sq);
    for (auto i : unsampled) x[static_cast<Eigen::Index>(i)] *= scale;
  }
}

CompletionResult tensor_complete(const SampleMask& mask, const CompleterConfig& config, const StateVector* exact) {
  mask.validate();
  const StateShape& shape = mask.shape;
  config.validate(shape);
  require_exact_matches(mask, exact);

  const std::vector<Bipartition> schedule = make_schedule(shape, config.schedule_kind);
  std::vector<CutMap> maps;
  maps.reserve(schedule.size());
  Eigen::Index max_rank = 1;
  for (const auto& cut : schedule) {
    maps.emplace_back(shape, cut);
    max_rank = std::max(max_rank, maps.back().max_rank());
  }
  const int d = shape.local_dim;
  const auto chi_hi = config.chi_max > 0 ? static_cast<Eigen::Index>(config.chi_max)
                                         : static_cast<Eigen::Index>(checked_pow(static_cast<std::size_t>(d),
                                                                                 shape.num_sites / 2));
  const Eigen::Index chi_lo = config.chi_start > 0 ? config.chi_start : d;
  const std::vector<std::uint64_t> unsampled = unsampled_indices(mask);

  ComplexVector x = build_initial(mask).amplitudes();
  if (const double n0 = x.norm(); n0 > 0.0) x /= n0;

  Rng shuffle_rng(config.shuffle_seed);
  std::vector<std::size_t> order(schedule.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  ConvergenceTrace trace;
  ComplexMatrix work, gram, basis;
  std::vector<double> spectrum;
  ComplexVector old_unsampled(static_cast<Eigen::Index>(unsampled.size()));
  ComplexVector level_start;
  int sweeps = 0;
  Eigen::Index chi = chi_lo;
  for (; chi <= chi_hi && chi < max_rank; ++chi) {
    level_start = x;
    for (int k = 1; k <= config.k_max; ++k) {
      for (std::size_t i = 0; i < unsampled.size(); ++i)
        old_unsampled[static_cast<Eigen::Index>(i)] = x[static_cast<Eigen::Index>(unsampled[i])];
      if (config.shuffle_schedule) shuffle_rng.shuffle(order);

      double s_half_sum = 0.0;
      for (std::size_t idx : order) {
        if (!config.trace_entropy && maps[idx].max_rank() <= chi) continue;
        maps[idx].gather(x, work);
        const bool truncated = config.truncation == Truncation::gram
                                   ? gram_truncate(work, chi, spectrum, gram, basis)
                                   : truncate_rank(work, chi, &spectrum);
        s_half_sum += renyi_half(spectrum);
        if (!truncated) continue;
        maps[idx].scatter(work, x);
        project_data_in_place(x, mask);
        if (const double n = x.norm(); n > 0.0) x /= n;
      }
      ++sweeps;

      double change = 0.0;
      double base = 0.0;
      for (std::size_t i = 0; i < unsampled.size(); ++i) {
        const auto u = static_cast<Eigen::Index>(i);
        change += std::norm(x[static_cast<Eigen::Index>(unsampled[i])] - old_unsampled[u]);
        base += std::norm(old_unsampled[u]);
      }
      double rel = 0.0;
      if (change > 0.0) rel = base > 0.0 ? std::sqrt(change / base) : std::numeric_limits<double>::infinity();

      trace.records.push_back({static_cast<int>(chi), k, sweeps, exact ? fidelity_error(exact->amplitudes(), x) : kNaN,
                               config.trace_entropy ? s_half_sum / static_cast<double>(schedule.size()) : kNaN,
                               rel});
      if (rel < config.inner_tol) break;
    }
    trace.final_chi = static_cast<int>(chi);
    if ((x - level_start).norm() < config.outer_tol) {
      trace.converged = true;
      break;
    }
  }

  finalize_completion(x, mask, unsampled);
  return {StateVector(shape, std::move(x)), std::move(trace)};
}

CompletionResult matrix_complete(const SampleMask& mask, const CompleterConfig& config, const StateVector* exact) {
  CompleterConfig central = config;
  central.schedule_kind = ScheduleKind::central_cut_only;
  return tensor_complete(mask, central, exact);
}

// ---- SVT -------------------------------------------------------------------

SvtMatrixResult svt_complete_matrix(const ComplexMatrix& data,
                                    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& observed, double tau,
                                    double delta, int max_iters, double tol) {
  if (!(tau >= 0.0) || !(delta > 0.0)) throw std::invalid_argument("SVT needs tau >= 0 and delta > 0");
  if (max_iters < 1 || !(tol > 0.0)) throw std::invalid_argument("SVT needs max_iters >= 1 and tol > 0");
  double observed_norm = 0.0;
  for (auto [r, c] : observed) observed_norm += std::norm(data(r, c));
  observed_norm = std::sqrt(observed_norm);
  if (observed_norm == 0.0) throw std::invalid_argument("SVT: observed entries are all zero");

  SvtMatrixResult result;
  ComplexMatrix y = ComplexMatrix::Zero(data.rows(), data.cols());
  for (int it = 1; it <= max_iters; ++it) {
    Eigen::BDCSVD<ComplexMatrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::Index rank = 0;
    double nuclear = 0.0;
    while (rank < s.size() && s(rank) > tau) nuclear += s(rank++) - tau;
    if (rank > 0)
      result.estimate = svd.matrixU().leftCols(rank) * (s.head(rank).array() - tau).matrix().asDiagonal() *
                        svd.matrixV().leftCols(rank).adjoint();
    else
      result.estimate = ComplexMatrix::Zero(data.rows(), data.cols());

    double misfit = 0.0;
    for (auto [r, c] : observed) misfit += std::norm(result.estimate(r, c) - data(r, c));
    result.residual = std::sqrt(misfit) / observed_norm;
    result.iterations = it;
    const double frob = result.estimate.norm();
    result.records.push_back({static_cast<int>(rank), it, it, kNaN, frob > 0.0 ? nuclear / frob : kNaN,
                              result.residual});
    if (result.residual <= tol) break;
    if (!(result.residual <= 1e6)) throw SolverError("SVT diverged; reduce delta", result.residual);
    for (auto [r, c] : observed) y(r, c) += delta * (data(r, c) - result.estimate(r, c));
  }
  return result;
}

CompletionResult svt_complete(const SampleMask& mask, const SvtOptions& options, const StateVector* exact) {
  mask.validate();
  require_exact_matches(mask, exact);
  const StateShape& shape = mask.shape;
  const CutMap map(shape, central_cut(shape));

  std::vector<Eigen::Index> position(mask.total());
  for (Eigen::Index c = 0; c < map.cols(); ++c)
    for (Eigen::Index r = 0; r < map.rows(); ++r) position[map.state_index(r, c)] = c * map.rows() + r;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> observed;
  observed.reserve(mask.count());
  for (auto i : mask.indices) observed.emplace_back(position[i] % map.rows(), position[i] / map.rows());

  ComplexMatrix data;
  map.gather(build_initial(mask).amplitudes(), data);
  const double rate = static_cast<double>(mask.count()) / static_cast<double>(mask.total());
  const double tau = options.tau.value_or(5.0 * std::sqrt(static_cast<double>(map.rows() * map.cols())));
  const double delta = options.delta.value_or(1.2 / rate);

  SvtMatrixResult svt = svt_complete_matrix(data, observed, tau, delta, options.max_iters, options.tol);

  ComplexVector x = ComplexVector::Zero(static_cast<Eigen::Index>(mask.total()));
  map.scatter(svt.estimate, x);
  ConvergenceTrace trace;
  trace.records = std::move(svt.records);
  trace.final_chi = trace.records.empty() ? 0 : trace.records.back().chi;
  trace.converged = svt.residual <= options.tol;
  if (exact && !trace.records.empty()) trace.records.back().fidelity_error = fidelity_error(exact->amplitudes(), x);

  finalize_completion(x, mask, unsampled_indices(mask));
  return {StateVector(shape, std::move(x)), std::move(trace)};
}

// ---- exact minimization --------------------------------------------------

namespace {

// Entropies of the cut matrix as selected entries are overwritten.
class CutObjective {
 public:
  CutObjective(const StateVector& exact, const Bipartition& cut) : map_(exact.shape(), cut) {
    map_.gather(exact.amplitudes(), base_);
    work_ = base_;
  }

  std::pair<Eigen::Index, Eigen::Index> locate(std::size_t index) const { return map_.locate(index); }
  Complex at(std::pair<Eigen::Index, Eigen::Index> pos) const { return base_(pos.first, pos.second); }

  std::vector<double> spectrum(std::span<const std::pair<std::pair<Eigen::Index, Eigen::Index>, Complex>> entries) {
    for (const auto& [pos, value] : entries) work_(pos.first, pos.second) = value;
    auto s = matrix_singular_values(work_);
    for (const auto& [pos, value] : entries) work_(pos.first, pos.second) = base_(pos.first, pos.second);
    return s;
  }

 private:
  CutMap map_;
  ComplexMatrix base_;
  ComplexMatrix work_;
};

double entropy_of(const std::vector<double>& s, Entropy which) {
  return which == Entropy::s_half ? renyi_half(s) : renyi_one(s);
}

}  // namespace

PhaseSweep phase_sweep(const StateVector& exact, std::size_t index, const Bipartition& cut, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("phase sweep needs at least 2 grid points");
  CutObjective objective(exact, cut);
  const auto pos = objective.locate(index);
  const double magnitude = std::abs(objective.at(pos));
  if (magnitude == 0.0) throw std::invalid_argument("zero-magnitude coefficient has no phase to complete");

  PhaseSweep sweep;
  for (int j = 0; j <= grid_points; ++j) {
    const double theta = kTwoPi * j / grid_points;
    const std::pair<std::pair<Eigen::Index, Eigen::Index>, Complex> entry{pos, std::polar(magnitude, theta)};
    const auto s = objective.spectrum({&entry, 1});
    sweep.theta.push_back(theta);
    sweep.s_half.push_back(renyi_half(s));
    sweep.s_one.push_back(renyi_one(s));
  }
  return sweep;
}

PhaseMinimizationResult minimize_single_phase(const StateVector& exact, std::size_t index, const Bipartition& cut,
                                              const PhaseSearchOptions& options) {
  PhaseMinimizationResult result;
  result.sweep = phase_sweep(exact, index, cut, options.grid_points);

  CutObjective objective(exact, cut);
  const auto pos = objective.locate(index);
  const Complex c = objective.at(pos);
  const double magnitude = std::abs(c);
  auto value_at = [&](double theta, Entropy which) {
    const std::pair<std::pair<Eigen::Index, Eigen::Index>, Complex> entry{pos, std::polar(magnitude, theta)};
    return entropy_of(objective.spectrum({&entry, 1}), which);
  };

  auto minimize = [&](Entropy which, const std::vector<double>& grid_values) {
    const auto best = static_cast<std::size_t>(
        std::min_element(grid_values.begin(), grid_values.end() - 1) - grid_values.begin());
    const double step = kTwoPi / options.grid_points;
    const NelderMeadResult nm = nelder_mead([&](std::span<const double> t) { return value_at(t[0], which); },
                                            {result.sweep.theta[best]}, std::span<const double>(&step, 1),
                                            options.nelder_mead);
    return std::pair{wrap_angle(nm.x[0]), nm.value};
  };

  result.theta_exact = wrap_angle(std::arg(c));
  std::tie(result.theta_s_half, result.s_half_at_min) = minimize(Entropy::s_half, result.sweep.s_half);
  std::tie(result.theta_s_one, result.s_one_at_min) = minimize(Entropy::s_one, result.sweep.s_one);
  result.s_half_at_exact = value_at(result.theta_exact, Entropy::s_half);
  result.s_one_at_exact = value_at(result.theta_exact, Entropy::s_one);
  return result;
}

std::pair<Complex, Complex> pair_amplitudes(double radius, std::span<const double> params) {
  return {std::polar(radius * std::cos(params[2]), params[0]),
          std::polar(radius * std::sin(params[2]), params[1])};
}

PairMinimizationResult minimize_pair(const StateVector& exact, std::size_t index_a, std::size_t index_b,
                                     const Bipartition& cut, const PairSearchOptions& options) {
  if (index_a == index_b) throw std::invalid_argument("minimize_pair needs two distinct indices");
  if (options.phase_grid < 1 || options.mix_grid < 1) throw std::invalid_argument("pair grid must be non-empty");
  CutObjective objective(exact, cut);
  const auto pos_a = objective.locate(index_a);
  const auto pos_b = objective.locate(index_b);

  PairMinimizationResult result;
  result.c_exact_a = objective.at(pos_a);
  result.c_exact_b = objective.at(pos_b);
  const double radius = std::hypot(std::abs(result.c_exact_a), std::abs(result.c_exact_b));
  if (radius == 0.0) throw std::invalid_argument("both coefficients vanish");

  int evals = 0;
  auto f = [&](std::span<const double> p) {
    ++evals;
    const auto [xa, xb] = pair_amplitudes(radius, p);
    const std::pair<std::pair<Eigen::Index, Eigen::Index>, Complex> entries[2] = {{pos_a, xa}, {pos_b, xb}};
    return renyi_half(objective.spectrum(entries));
  };

  std::vector<double> best{0.0, 0.0, 0.0};
  double best_value = std::numeric_limits<double>::infinity();
  const double phase_step = kTwoPi / options.phase_grid;
  const double mix_step = 0.5 * std::numbers::pi / options.mix_grid;
  for (int i = 0; i < options.phase_grid; ++i)
    for (int j = 0; j < options.phase_grid; ++j)
      for (int k = 0; k < options.mix_grid; ++k) {
        const std::vector<double> p{i * phase_step, j * phase_step, (k + 0.5) * mix_step};
        const double v = f(p);
        if (v < best_value) {
          best_value = v;
          best = p;
        }
      }

  const double steps[3] = {phase_step, phase_step, mix_step};
  const NelderMeadResult nm = nelder_mead(f, best, steps, options.nelder_mead);
  std::tie(result.c_half_a, result.c_half_b) = pair_amplitudes(radius, nm.x);
  result.objective_at_min = nm.value;

  const double at_exact[3] = {std::arg(result.c_exact_a), std::arg(result.c_exact_b),
                              std::atan2(std::abs(result.c_exact_b), std::abs(result.c_exact_a))};
  result.objective_at_exact = f(at_exact);
  result.coefficient_error = std::abs(result.c_exact_a - result.c_half_a);
  result.evaluations = evals;
  return result;
}

}  // namespace wfc
