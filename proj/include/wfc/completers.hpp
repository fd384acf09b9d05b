#pragma once

#include "wfc/errors.hpp"
#include "wfc/nelder_mead.hpp"
#include "wfc/qstate.hpp"
#include "wfc/sampling.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace wfc {

enum class ScheduleKind {
  automatic,         // all_blocks for periodic chains, prefix_cuts for open ones
  all_blocks,        // every cyclic block of length 1..floor(N/2)
  prefix_cuts,       // sites 1..m for m = 1..floor(N/2)
  central_cut_only,  // sites 1..floor(N/2)
};

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view s);

/// The bipartitions visited by one sweep. For periodic all_blocks a block of
/// length N/2 and its complement are the same cut, so each is listed once.
std::vector<Bipartition> make_schedule(const StateShape& shape, ScheduleKind kind);

/// How the completer computes each rank-chi truncation. `svd` is a thin
/// divide-and-conquer SVD. `gram` diagonalizes the smaller Gram matrix: same
/// kept subspace, singular values resolved only down to ~1e-8 of the largest,
/// several times faster.
enum class Truncation { gram, svd };

std::string_view to_string(Truncation t);
Truncation truncation_from_string(std::string_view s);

struct CompleterConfig {
  int chi_max = 0;    // 0: d^floor(N/2)
  int chi_start = 0;  // 0: d
  int k_max = 200;
  double inner_tol = 1e-9;
  double outer_tol = 1e-12;
  ScheduleKind schedule_kind = ScheduleKind::automatic;
  bool shuffle_schedule = true;
  std::uint64_t shuffle_seed = 0;
  Truncation truncation = Truncation::gram;
  // When false, cuts already within rank chi are skipped outright and
  // mean_s_half is recorded as NaN.
  bool trace_entropy = true;

  void validate(const StateShape& shape) const;
};

struct TraceRecord {
  int chi = 0;
  int k = 0;
  int cut_sweeps = 0;      // cumulative sweeps over the schedule
  double fidelity_error;   // NaN without an exact state
  double mean_s_half;      // over the spectra met during the sweep
  double rel_change;       // relative l2 change of unsampled entries
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
  int final_chi = 0;
  bool converged = false;  // outer loop stopped on outer_tol
};

/// CSV with header `chi,k,cut_sweeps,fidelity_error,mean_s_half,rel_change`.
void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace);

struct CompletionResult {
  StateVector state;
  ConvergenceTrace trace;
};

/// Bond-dimension ramping completion by alternating truncated SVDs over the
/// schedule and data projection. `exact` is only read to fill the trace.
CompletionResult tensor_complete(const SampleMask& mask, const CompleterConfig& config,
                                 const StateVector* exact = nullptr);

/// tensor_complete restricted to the central cut.
CompletionResult matrix_complete(const SampleMask& mask, const CompleterConfig& config,
                                 const StateVector* exact = nullptr);

struct SvtOptions {
  std::optional<double> tau;    // default 5 sqrt(rows cols)
  std::optional<double> delta;  // default 1.2 / rate
  int max_iters = 2000;
  double tol = 1e-7;
};

struct SvtMatrixResult {
  ComplexMatrix estimate;
  int iterations = 0;
  double residual = 0.0;  // ||P(X - M)|| / ||P(M)||
  std::vector<TraceRecord> records;
};

/// Singular value thresholding on a matrix with observed entries `observed`.
/// Entries of `data` outside the observed set are ignored.
SvtMatrixResult svt_complete_matrix(const ComplexMatrix& data,
                                    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& observed,
                                    double tau, double delta, int max_iters, double tol);

/// SVT on the central-cut matricization of the masked state.
CompletionResult svt_complete(const SampleMask& mask, const SvtOptions& options = {},
                              const StateVector* exact = nullptr);

/// Writes the sampled values and rescales the unsampled entries so the state
/// has unit norm. Sampled entries stay bit-exact.
void finalize_completion(Eigen::Ref<ComplexVector> amplitudes, const SampleMask& mask,
                         const std::vector<std::uint64_t>& unsampled);

// ---- exact entanglement minimization ------------------------------------

enum class Entropy { s_half, s_one };

struct PhaseSearchOptions {
  int grid_points = 256;
  NelderMeadOptions nelder_mead{1e-12, 1e-14, 500};
};

struct PhaseSweep {
  std::vector<double> theta;   // grid_points + 1 values from 0 to 2 pi
  std::vector<double> s_half;
  std::vector<double> s_one;
};

struct PhaseMinimizationResult {
  double theta_exact = 0.0;
  double theta_s_half = 0.0;
  double theta_s_one = 0.0;
  double s_half_at_exact = 0.0;
  double s_half_at_min = 0.0;
  double s_one_at_exact = 0.0;
  double s_one_at_min = 0.0;
  PhaseSweep sweep;
};

/// Entropies across `cut` as the phase of amplitude `index` sweeps a uniform grid.
PhaseSweep phase_sweep(const StateVector& exact, std::size_t index, const Bipartition& cut, int grid_points);

/// Minimizes S_1/2 and S_1 over the phase of one amplitude, its magnitude
/// held fixed: grid scan, then Nelder-Mead from the best grid point.
PhaseMinimizationResult minimize_single_phase(const StateVector& exact, std::size_t index, const Bipartition& cut,
                                              const PhaseSearchOptions& options = {});

struct PairSearchOptions {
  int phase_grid = 8;
  int mix_grid = 6;
  NelderMeadOptions nelder_mead{1e-12, 1e-14, 500};
};

struct PairMinimizationResult {
  Complex c_exact_a;
  Complex c_exact_b;
  Complex c_half_a;   // minimizer of S_1/2
  Complex c_half_b;
  double objective_at_exact = 0.0;
  double objective_at_min = 0.0;
  double coefficient_error = 0.0;  // |c_exact_a - c_half_a|
  int evaluations = 0;
};

/// Parametrization of the two free amplitudes: magnitudes R cos(w), R sin(w)
/// with R^2 = |c_a|^2 + |c_b|^2, phases phi_a, phi_b. params = (phi_a, phi_b, w).
std::pair<Complex, Complex> pair_amplitudes(double radius, std::span<const double> params);

/// Minimizes S_1/2 across `cut` over amplitudes a and b under the norm
/// constraint; reports the error of amplitude a.
PairMinimizationResult minimize_pair(const StateVector& exact, std::size_t index_a, std::size_t index_b,
                                     const Bipartition& cut, const PairSearchOptions& options = {});

}  // namespace wfc
