#pragma once

#include "wfc/qstate.hpp"

#include <json.hpp>

#include <cstdint>
#include <string_view>
#include <vector>

namespace wfc {

enum class ModelKind { random_inhomogeneous, random_homogeneous, xx, transverse_ising };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view s);

/// A 1D local Hamiltonian H = sum_i h_i, each h_i acting on l consecutive sites.
struct HamiltonianSpec {
  int num_sites = 0;
  int local_dim = 2;
  int interaction_len = 2;
  Boundary boundary = Boundary::periodic;
  ModelKind kind = ModelKind::random_inhomogeneous;
  double lambda = 0.0;  // transverse field, TransverseIsing only
  std::uint64_t seed = 0;

  StateShape shape() const { return {num_sites, local_dim, boundary}; }
  void validate() const;
};

nlohmann::json to_json(const HamiltonianSpec& spec);
HamiltonianSpec spec_from_json(const nlohmann::json& j);

struct LocalTerm {
  int site = 1;         // first site, 1-based
  ComplexMatrix op;     // d^l x d^l Hermitian
};

/// Open boundaries give N-l+1 terms at sites 1..N-l+1; periodic give N.
///
/// Random kinds draw (G + G^dagger)/2 with standard complex Gaussian G from
/// child stream i of the seed (inhomogeneous) or one shared stream
/// (homogeneous). XX is X X + Y Y. TransverseIsing is -Z Z with the field
/// -lambda X split evenly over the two bonds touching each site.
std::vector<LocalTerm> generate_terms(const HamiltonianSpec& spec);

/// Matrix-free H built from its terms.
class Hamiltonian {
 public:
  explicit Hamiltonian(const HamiltonianSpec& spec);

  const HamiltonianSpec& spec() const { return spec_; }
  const std::vector<LocalTerm>& terms() const { return terms_; }
  std::size_t dimension() const { return dimension_; }

  /// out = H in. Terms are accumulated in a fixed order.
  void apply(const ComplexVector& in, ComplexVector& out) const;
  StateVector apply(const StateVector& state) const;

  double expectation(const ComplexVector& v) const;

  /// Dense d^N x d^N matrix assembled by basis-digit substitution.
  ComplexMatrix dense() const;

 private:
  HamiltonianSpec spec_;
  std::vector<LocalTerm> terms_;
  std::vector<CutMap> maps_;
  std::size_t dimension_ = 0;
};

}  // namespace wfc
