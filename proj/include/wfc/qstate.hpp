#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace wfc {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

enum class Boundary : std::uint8_t { open = 0, periodic = 1 };

std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

/// d^n with overflow checking.
std::size_t checked_pow(std::size_t base, int exponent);

/// Lattice geometry of a dense state: N sites of local dimension d.
struct StateShape {
  int num_sites = 0;
  int local_dim = 2;
  Boundary boundary = Boundary::periodic;

  std::size_t size() const { return checked_pow(static_cast<std::size_t>(local_dim), num_sites); }
  void validate() const;
  friend bool operator==(const StateShape&, const StateShape&) = default;
};

/// Dense amplitude array c_{i1...iN}. Index convention: site 1 is the most
/// significant base-d digit of the flat index.
class StateVector {
 public:
  explicit StateVector(StateShape shape);
  StateVector(StateShape shape, ComplexVector amplitudes);

  static StateVector basis_state(StateShape shape, std::size_t index);

  const StateShape& shape() const { return shape_; }
  int num_sites() const { return shape_.num_sites; }
  int local_dim() const { return shape_.local_dim; }
  Boundary boundary() const { return shape_.boundary; }
  std::size_t size() const { return static_cast<std::size_t>(amplitudes_.size()); }

  const ComplexVector& amplitudes() const { return amplitudes_; }
  // Fixed-size view: the length invariant cannot be broken through it.
  Eigen::Ref<ComplexVector> amplitudes() { return amplitudes_; }

  Complex operator[](std::size_t i) const { return amplitudes_[static_cast<Eigen::Index>(i)]; }
  Complex& operator[](std::size_t i) { return amplitudes_[static_cast<Eigen::Index>(i)]; }

  double squared_norm() const { return amplitudes_.squaredNorm(); }
  double norm() const { return amplitudes_.norm(); }
  bool is_normalized(double tol = 1e-12) const { return std::abs(squared_norm() - 1.0) <= tol; }

  /// Scales to unit norm; throws on the zero vector.
  StateVector& normalize();
  StateVector normalized() const;

 private:
  StateShape shape_;
  ComplexVector amplitudes_;
};

/// Contiguous block of sites {block_start, ..., block_start + block_len - 1}
/// (1-based, cyclic under periodic boundaries) against its complement.
struct Bipartition {
  int block_start = 1;
  int block_len = 1;
  friend bool operator==(const Bipartition&, const Bipartition&) = default;
};

void validate_cut(const StateShape& shape, const Bipartition& cut);

/// Sites 1..floor(N/2).
Bipartition central_cut(const StateShape& shape);

/// The complementary block of a periodic cut.
Bipartition complement_cut(const StateShape& shape, const Bipartition& cut);

/// Precomputed index permutation realizing a matricization.
///
/// Entry (r, c) of the matrix is the amplitude whose block-site digits (in
/// cyclic order from block_start, most significant first) encode r and whose
/// remaining digits (increasing site order) encode c. Terms of a Hamiltonian
/// reuse this with block_len up to N, hence the unchecked constructor.
class CutMap {
 public:
  CutMap(const StateShape& shape, const Bipartition& cut);
  static CutMap unchecked(const StateShape& shape, int block_start, int block_len);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  Eigen::Index max_rank() const { return std::min(rows_, cols_); }

  void gather(const ComplexVector& amplitudes, ComplexMatrix& out) const;
  void scatter(const ComplexMatrix& matrix, Eigen::Ref<ComplexVector> amplitudes) const;
  void scatter_add(const ComplexMatrix& matrix, Eigen::Ref<ComplexVector> amplitudes) const;

  /// Flat state index of matrix entry (r, c), stored column-major.
  std::uint32_t state_index(Eigen::Index r, Eigen::Index c) const {
    return index_[static_cast<std::size_t>(c * rows_ + r)];
  }

  /// Matrix position (row, col) of a flat state index. Linear scan.
  std::pair<Eigen::Index, Eigen::Index> locate(std::size_t flat) const;

 private:
  CutMap(const StateShape& shape, int block_start, int block_len, bool);

  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<std::uint32_t> index_;
};

struct SingularSpectrum {
  std::vector<double> values;  // non-increasing
  Bipartition cut;
};

ComplexMatrix matricize(const StateVector& state, const Bipartition& cut);
StateVector dematricize(const ComplexMatrix& matrix, const StateShape& shape, const Bipartition& cut);

SingularSpectrum singular_values(const StateVector& state, const Bipartition& cut);
std::vector<double> matrix_singular_values(const ComplexMatrix& matrix);

/// S_1/2 as the nuclear norm: sum of singular values.
double renyi_half(const SingularSpectrum& spectrum);
double renyi_half(std::span<const double> singular_values);

/// S_1 = -sum s^2 ln s^2 with 0 ln 0 = 0.
double renyi_one(const SingularSpectrum& spectrum);
double renyi_one(std::span<const double> singular_values);

double mean_block_renyi_half(const StateVector& state, std::span<const Bipartition> schedule);

/// Number of singular values strictly above `cutoff`.
int effective_rank(const SingularSpectrum& spectrum, double cutoff = 1e-10);

/// Best rank-chi approximation of `matrix` in place. Returns false (and leaves
/// the matrix untouched) when chi already covers the full rank.
bool truncate_rank(ComplexMatrix& matrix, Eigen::Index chi, std::vector<double>* spectrum = nullptr);

/// Keeps the chi largest singular triplets across `cut`. Not renormalized.
StateVector truncate_cut(const StateVector& state, const Bipartition& cut, int chi);

Complex inner(const StateVector& a, const StateVector& b);

/// |<a|b>|^2 / (<a|a><b|b>).
double fidelity(const StateVector& a, const StateVector& b);
double fidelity_error(const StateVector& a, const StateVector& b);

}  // namespace wfc
