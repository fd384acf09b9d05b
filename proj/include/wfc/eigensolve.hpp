#pragma once

#include "wfc/errors.hpp"
#include "wfc/hamiltonian.hpp"
#include "wfc/qstate.hpp"

namespace wfc {

struct LanczosOptions {
  double tol = 1e-12;             // on ||H psi - E psi||
  int max_restarts = 50;
  int krylov_dim = 64;            // reduced automatically for very large d^N
  std::size_t max_dimension = std::size_t{1} << 20;
  bool detect_degeneracy = true;
  double degeneracy_gap = 1e-10;
};

struct GroundStateResult {
  StateVector state;  // normalized, phase-fixed
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;  // applications of H
  bool degenerate = false;
};

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization. The
/// start vector comes from the spec's seed, so results are reproducible.
GroundStateResult ground_state(const HamiltonianSpec& spec, const LanczosOptions& options = {});
GroundStateResult ground_state(const Hamiltonian& h, const LanczosOptions& options = {});

/// Full dense diagonalization; d^N <= 4096.
GroundStateResult dense_ground_state(const HamiltonianSpec& spec);

/// Rotates the global phase so the largest-magnitude amplitude (lowest index
/// on ties) is real and positive.
void fix_phase(StateVector& state);

}  // namespace wfc
