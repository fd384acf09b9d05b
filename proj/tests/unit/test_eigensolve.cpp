#include "wfc/eigensolve.hpp"
#include "wfc/errors.hpp"
#include "wfc/hamiltonian.hpp"

#include "test_states.hpp"

#include <gtest/gtest.h>

#include <stdexcept>

using namespace wfc;
using wfc::testing::cyclic_shift;
using wfc::testing::random_state;

namespace {

HamiltonianSpec make_spec(int n, ModelKind kind, Boundary b, std::uint64_t seed = 1, int l = 2, double lambda = 0.0) {
  HamiltonianSpec s;
  s.num_sites = n;
  s.interaction_len = l;
  s.boundary = b;
  s.kind = kind;
  s.seed = seed;
  s.lambda = lambda;
  return s;
}

std::size_t argmax_abs(const StateVector& s) {
  Eigen::Index i = 0;
  s.amplitudes().cwiseAbs().maxCoeff(&i);
  return static_cast<std::size_t>(i);
}

}  // namespace

TEST(Eigensolve, XXTwoSitesOpen) {
  const auto spec = make_spec(2, ModelKind::xx, Boundary::open);
  EXPECT_NEAR(ground_state(spec).energy, -2.0, 1e-12);
  EXPECT_NEAR(dense_ground_state(spec).energy, -2.0, 1e-12);
}

TEST(Eigensolve, ClassicalIsingEnergies) {
  const auto r8 = ground_state(make_spec(8, ModelKind::transverse_ising, Boundary::periodic));
  EXPECT_NEAR(r8.energy, -8.0, 1e-12);
  EXPECT_TRUE(r8.degenerate);
  EXPECT_NEAR(dense_ground_state(make_spec(4, ModelKind::transverse_ising, Boundary::periodic)).energy, -4.0, 1e-12);
}

TEST(Eigensolve, XXFourSitesPeriodicMatchesDense) {
  const auto spec = make_spec(4, ModelKind::xx, Boundary::periodic);
  EXPECT_NEAR(ground_state(spec).energy, dense_ground_state(spec).energy, 1e-10);
}

TEST(Eigensolve, LanczosMatchesDenseOnRandomSeeds) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    for (Boundary b : {Boundary::open, Boundary::periodic}) {
      const auto spec = make_spec(6, ModelKind::random_inhomogeneous, b, seed, seed % 2 == 0 ? 2 : 3);
      const auto lanczos = ground_state(spec);
      const auto dense = dense_ground_state(spec);
      EXPECT_NEAR(lanczos.energy, dense.energy, 1e-10) << "seed " << seed;
      EXPECT_LE(fidelity_error(lanczos.state, dense.state), 1e-12) << "seed " << seed;
      EXPECT_FALSE(lanczos.degenerate);
      // Same phase convention, so the vectors agree entrywise too.
      EXPECT_LE((lanczos.state.amplitudes() - dense.state.amplitudes()).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Eigensolve, ResultInvariants) {
  const auto spec = make_spec(10, ModelKind::random_inhomogeneous, Boundary::periodic, 3, 3);
  LanczosOptions opts;
  opts.tol = 1e-11;
  const auto r = ground_state(spec, opts);
  EXPECT_LE(r.residual, opts.tol);
  EXPECT_LE(std::abs(r.state.squared_norm() - 1.0), 1e-12);
  const Hamiltonian h(spec);
  const ComplexVector res = h.apply(r.state).amplitudes() - r.energy * r.state.amplitudes();
  EXPECT_LE(res.norm(), 2 * opts.tol);
  const Complex top = r.state[argmax_abs(r.state)];
  EXPECT_EQ(top.imag(), 0.0);
  EXPECT_GT(top.real(), 0.0);
  EXPECT_GT(r.iterations, 0);
}

TEST(Eigensolve, Reproducible) {
  const auto spec = make_spec(9, ModelKind::random_inhomogeneous, Boundary::open, 5, 3);
  const auto a = ground_state(spec);
  const auto b = ground_state(spec);
  EXPECT_TRUE(a.state.amplitudes() == b.state.amplitudes());
  EXPECT_EQ(a.energy, b.energy);
}

TEST(Eigensolve, VariationalBound) {
  const auto spec = make_spec(8, ModelKind::random_inhomogeneous, Boundary::periodic, 2);
  const auto r = ground_state(spec);
  const Hamiltonian h(spec);
  for (std::uint64_t seed = 1; seed <= 50; ++seed)
    EXPECT_GE(h.expectation(random_state(spec.shape(), seed).amplitudes()), r.energy - 1e-12);
}

TEST(Eigensolve, PhaseFixIdempotent) {
  StateVector psi = random_state({6, 2, Boundary::open}, 8);
  psi.amplitudes() *= std::polar(1.0, 2.1);
  fix_phase(psi);
  const ComplexVector once = psi.amplitudes();
  fix_phase(psi);
  EXPECT_TRUE(psi.amplitudes() == once);
  const Complex top = psi[argmax_abs(psi)];
  EXPECT_EQ(top.imag(), 0.0);
  EXPECT_GT(top.real(), 0.0);
}

TEST(Eigensolve, TranslationInvariantEnergy) {
  const auto spec = make_spec(8, ModelKind::random_homogeneous, Boundary::periodic, 4);
  const auto r = ground_state(spec);
  const Hamiltonian h(spec);
  EXPECT_NEAR(h.expectation(cyclic_shift(r.state).amplitudes()), r.energy, 1e-10);
}

TEST(Eigensolve, Errors) {
  const auto spec = make_spec(6, ModelKind::random_inhomogeneous, Boundary::open);
  LanczosOptions bad;
  bad.tol = 0.0;
  EXPECT_THROW(ground_state(spec, bad), std::invalid_argument);
  LanczosOptions capped;
  capped.max_dimension = 32;
  EXPECT_THROW(ground_state(spec, capped), std::length_error);
  EXPECT_THROW(dense_ground_state(make_spec(13, ModelKind::random_inhomogeneous, Boundary::open)), std::length_error);
  LanczosOptions starved;
  starved.krylov_dim = 2;
  starved.max_restarts = 1;
  starved.tol = 1e-14;
  try {
    ground_state(make_spec(10, ModelKind::random_inhomogeneous, Boundary::open), starved);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_GT(e.best_residual(), 1e-14);
  }
}
