#include "wfc/eigensolve.hpp"

#include "wfc/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace wfc {

namespace {

struct LanczosRun {
  ComplexVector vector;
  double energy = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  int applies = 0;
  bool converged = false;
};

void orthogonalize(ComplexVector& w, const std::vector<ComplexVector>& basis, std::size_t count) {
  // Classical Gram-Schmidt applied twice.
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t i = 0; i < count; ++i) w -= basis[i].dot(w) * basis[i];
}

// Restarted Lanczos for the lowest eigenpair of h restricted to the
// orthogonal complement of `deflate`.
LanczosRun lanczos(const Hamiltonian& h, ComplexVector start, const std::vector<ComplexVector>& deflate,
                   double tol, int max_restarts, int krylov_dim) {
  const auto dim = static_cast<Eigen::Index>(h.dimension());
  constexpr std::size_t kMemoryBudget = std::size_t{512} << 20;
  const auto affordable = static_cast<int>(kMemoryBudget / (sizeof(Complex) * static_cast<std::size_t>(dim)));
  const int m = static_cast<int>(std::min<Eigen::Index>(
      {static_cast<Eigen::Index>(std::max(8, std::min(krylov_dim, affordable))),
       dim - static_cast<Eigen::Index>(deflate.size())}));

  LanczosRun run;
  orthogonalize(start, deflate, deflate.size());
  start.normalize();
  ComplexVector v = std::move(start);

  std::vector<ComplexVector> basis(static_cast<std::size_t>(m));
  ComplexVector w;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    std::vector<double> alpha;
    std::vector<double> beta;
    basis[0] = v;
    int k = 0;
    for (; k < m; ++k) {
      h.apply(basis[static_cast<std::size_t>(k)], w);
      ++run.applies;
      const double a = basis[static_cast<std::size_t>(k)].dot(w).real();
      alpha.push_back(a);
      orthogonalize(w, deflate, deflate.size());
      orthogonalize(w, basis, static_cast<std::size_t>(k) + 1);
      const double b = w.norm();
      if (k + 1 == m) break;
      // Invariant subspace. The threshold sits below any usable tol so a
      // nearly converged restart vector still gets a full Krylov space.
      if (b <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a))) break;
      beta.push_back(b);
      basis[static_cast<std::size_t>(k) + 1] = w / b;
    }
    const auto size = static_cast<int>(alpha.size());

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size, size);
    for (int i = 0; i < size; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < size; ++i) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(t);
    const Eigen::VectorXd s = tri.eigenvectors().col(0);

    ComplexVector ritz = ComplexVector::Zero(dim);
    for (int i = 0; i < size; ++i) ritz += s(i) * basis[static_cast<std::size_t>(i)];
    orthogonalize(ritz, deflate, deflate.size());
    ritz.normalize();

    h.apply(ritz, w);
    ++run.applies;
    const double energy = ritz.dot(w).real();
    const double residual = (w - energy * ritz).norm();
    if (residual < run.residual) {
      run.residual = residual;
      run.energy = energy;
      run.vector = ritz;
    }
    if (residual <= tol) {
      run.converged = true;
      break;
    }
    v = std::move(ritz);
  }
  return run;
}

ComplexVector random_start(std::uint64_t seed, std::uint64_t stream, Eigen::Index dim) {
  Rng rng = Rng::stream(seed, stream);
  ComplexVector v(dim);
  for (auto& c : v) c = rng.complex_normal();
  return v;
}

}  // namespace

void fix_phase(StateVector& state) {
  const ComplexVector& a = std::as_const(state).amplitudes();
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double m = std::abs(a[i]);
    if (m > best_abs) {
      best_abs = m;
      best = i;
    }
  }
  const Complex pivot = a[best];
  if (best_abs == 0.0 || (pivot.imag() == 0.0 && pivot.real() > 0.0)) return;
  const Complex rotation = std::conj(pivot) / best_abs;
  state.amplitudes() *= rotation;
  state[static_cast<std::size_t>(best)] = best_abs;
}

GroundStateResult ground_state(const Hamiltonian& h, const LanczosOptions& options) {
  if (options.tol <= 0.0) throw std::invalid_argument("Lanczos tolerance must be positive");
  if (h.dimension() > options.max_dimension)
    throw std::length_error("d^N = " + std::to_string(h.dimension()) + " exceeds the configured cap");
  const auto dim = static_cast<Eigen::Index>(h.dimension());
  const auto& spec = h.spec();

  LanczosRun run = lanczos(h, random_start(spec.seed, streams::lanczos_start, dim), {}, options.tol,
                           options.max_restarts, options.krylov_dim);
  if (!run.converged)
    throw SolverError("Lanczos did not converge; best residual " + std::to_string(run.residual), run.residual);

  GroundStateResult result{StateVector(spec.shape(), std::move(run.vector)), run.energy, run.residual,
                           run.applies, false};
  fix_phase(result.state);

  if (options.detect_degeneracy && dim > 1) {
    // Lowest level of the complement; its Ritz value bounds E1 from above.
    const std::vector<ComplexVector> deflate{result.state.amplitudes()};
    LanczosRun next = lanczos(h, random_start(spec.seed, streams::degeneracy_probe, dim), deflate, 1e-8,
                              std::min(options.max_restarts, 20), options.krylov_dim);
    result.iterations += next.applies;
    result.degenerate = next.energy - result.energy < options.degeneracy_gap;
  }
  return result;
}

GroundStateResult ground_state(const HamiltonianSpec& spec, const LanczosOptions& options) {
  return ground_state(Hamiltonian(spec), options);
}

GroundStateResult dense_ground_state(const HamiltonianSpec& spec) {
  const Hamiltonian h(spec);
  if (h.dimension() > 4096) throw std::length_error("dense_ground_state limited to d^N <= 4096");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h.dense());
  if (eig.info() != Eigen::Success) throw SolverError("dense eigensolver failed", 0.0);

  StateVector state(spec.shape(), eig.eigenvectors().col(0));
  state.normalize();
  fix_phase(state);
  ComplexVector hv;
  h.apply(state.amplitudes(), hv);
  const double energy = state.amplitudes().dot(hv).real();
  const double residual = (hv - energy * state.amplitudes()).norm();
  const auto& ev = eig.eigenvalues();
  const bool degenerate = ev.size() > 1 && ev(1) - ev(0) < 1e-10;
  return {std::move(state), energy, residual, 0, degenerate};
}

}  // namespace wfc
