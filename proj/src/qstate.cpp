#include "wfc/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wfc {

std::string_view to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

Boundary boundary_from_string(std::string_view s) {
  if (s == "open" || s == "obc") return Boundary::open;
  if (s == "periodic" || s == "pbc") return Boundary::periodic;
  throw std::invalid_argument("unknown boundary '" + std::string(s) + "'");
}

std::size_t checked_pow(std::size_t base, int exponent) {
  if (exponent < 0) throw std::invalid_argument("checked_pow: negative exponent");
  std::size_t result = 1;
  for (int i = 0; i < exponent; ++i) {
    if (result > std::numeric_limits<std::uint32_t>::max() / base)
      throw std::overflow_error("state dimension exceeds 2^32");
    result *= base;
  }
  return result;
}

void StateShape::validate() const {
  if (num_sites < 2) throw std::invalid_argument("state needs at least 2 sites");
  if (local_dim < 2) throw std::invalid_argument("local dimension must be at least 2");
  (void)size();
}

StateVector::StateVector(StateShape shape) : shape_(shape) {
  shape_.validate();
  amplitudes_ = ComplexVector::Zero(static_cast<Eigen::Index>(shape_.size()));
}

StateVector::StateVector(StateShape shape, ComplexVector amplitudes)
    : shape_(shape), amplitudes_(std::move(amplitudes)) {
  shape_.validate();
  if (static_cast<std::size_t>(amplitudes_.size()) != shape_.size())
    throw std::invalid_argument("amplitude count " + std::to_string(amplitudes_.size()) + " != d^N = " +
                                std::to_string(shape_.size()));
}

StateVector StateVector::basis_state(StateShape shape, std::size_t index) {
  StateVector s(shape);
  if (index >= s.size()) throw std::out_of_range("basis index out of range");
  s[index] = 1.0;
  return s;
}

StateVector& StateVector::normalize() {
  const double n = norm();
  if (n == 0.0) throw std::domain_error("cannot normalize the zero state");
  amplitudes_ /= n;
  return *this;
}

StateVector StateVector::normalized() const {
  StateVector copy = *this;
  copy.normalize();
  return copy;
}

void validate_cut(const StateShape& shape, const Bipartition& cut) {
  const int n = shape.num_sites;
  if (cut.block_len < 1 || cut.block_len > n - 1)
    throw std::invalid_argument("block_len " + std::to_string(cut.block_len) + " outside [1, " +
                                std::to_string(n - 1) + "]");
  if (cut.block_start < 1 || cut.block_start > n)
    throw std::invalid_argument("block_start " + std::to_string(cut.block_start) + " outside [1, N]");
  if (shape.boundary == Boundary::open && cut.block_start != 1)
    throw std::invalid_argument("open boundaries only allow prefix cuts (block_start = 1)");
}

Bipartition central_cut(const StateShape& shape) { return {1, shape.num_sites / 2}; }

Bipartition complement_cut(const StateShape& shape, const Bipartition& cut) {
  if (shape.boundary != Boundary::periodic)
    throw std::invalid_argument("complement block is only a valid cut under periodic boundaries");
  validate_cut(shape, cut);
  const int n = shape.num_sites;
  return {(cut.block_start - 1 + cut.block_len) % n + 1, n - cut.block_len};
}

CutMap::CutMap(const StateShape& shape, const Bipartition& cut)
    : CutMap((validate_cut(shape, cut), shape), cut.block_start, cut.block_len, true) {}

CutMap CutMap::unchecked(const StateShape& shape, int block_start, int block_len) {
  return CutMap(shape, block_start, block_len, true);
}

CutMap::CutMap(const StateShape& shape, int block_start, int block_len, bool) {
  shape.validate();
  const int n = shape.num_sites;
  const auto d = static_cast<std::size_t>(shape.local_dim);
  if (block_len < 1 || block_len > n || block_start < 1 || block_start > n)
    throw std::invalid_argument("CutMap: block out of range");

  std::vector<int> block_sites;  // 0-based, in row-digit order
  for (int j = 0; j < block_len; ++j) block_sites.push_back((block_start - 1 + j) % n);
  std::vector<bool> in_block(static_cast<std::size_t>(n), false);
  for (int s : block_sites) in_block[static_cast<std::size_t>(s)] = true;
  std::vector<int> rest_sites;
  for (int s = 0; s < n; ++s)
    if (!in_block[static_cast<std::size_t>(s)]) rest_sites.push_back(s);

  rows_ = static_cast<Eigen::Index>(checked_pow(d, block_len));
  cols_ = static_cast<Eigen::Index>(checked_pow(d, n - block_len));
  const std::size_t total = shape.size();
  index_.assign(total, 0);

  std::vector<std::size_t> digits(static_cast<std::size_t>(n));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int s = n - 1; s >= 0; --s) {
      digits[static_cast<std::size_t>(s)] = rem % d;
      rem /= d;
    }
    std::size_t r = 0;
    for (int s : block_sites) r = r * d + digits[static_cast<std::size_t>(s)];
    std::size_t c = 0;
    for (int s : rest_sites) c = c * d + digits[static_cast<std::size_t>(s)];
    index_[c * static_cast<std::size_t>(rows_) + r] = static_cast<std::uint32_t>(flat);
  }
}

void CutMap::gather(const ComplexVector& amplitudes, ComplexMatrix& out) const {
  out.resize(rows_, cols_);
  Complex* dst = out.data();
  const Complex* src = amplitudes.data();
  for (std::size_t p = 0; p < index_.size(); ++p) dst[p] = src[index_[p]];
}

void CutMap::scatter(const ComplexMatrix& matrix, Eigen::Ref<ComplexVector> amplitudes) const {
  const Complex* src = matrix.data();
  Complex* dst = amplitudes.data();
  for (std::size_t p = 0; p < index_.size(); ++p) dst[index_[p]] = src[p];
}

void CutMap::scatter_add(const ComplexMatrix& matrix, Eigen::Ref<ComplexVector> amplitudes) const {
  const Complex* src = matrix.data();
  Complex* dst = amplitudes.data();
  for (std::size_t p = 0; p < index_.size(); ++p) dst[index_[p]] += src[p];
}

std::pair<Eigen::Index, Eigen::Index> CutMap::locate(std::size_t flat) const {
  const auto it = std::find(index_.begin(), index_.end(), static_cast<std::uint32_t>(flat));
  if (flat >= index_.size() || it == index_.end()) throw std::out_of_range("CutMap::locate: index out of range");
  const auto p = static_cast<Eigen::Index>(it - index_.begin());
  return {p % rows_, p / rows_};
}

ComplexMatrix matricize(const StateVector& state, const Bipartition& cut) {
  CutMap map(state.shape(), cut);
  ComplexMatrix m;
  map.gather(state.amplitudes(), m);
  return m;
}

StateVector dematricize(const ComplexMatrix& matrix, const StateShape& shape, const Bipartition& cut) {
  CutMap map(shape, cut);
  if (matrix.rows() != map.rows() || matrix.cols() != map.cols())
    throw std::invalid_argument("dematricize: matrix shape does not match the cut");
  StateVector out(shape);
  map.scatter(matrix, out.amplitudes());
  return out;
}

std::vector<double> matrix_singular_values(const ComplexMatrix& matrix) {
  Eigen::BDCSVD<ComplexMatrix> svd(matrix);
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

SingularSpectrum singular_values(const StateVector& state, const Bipartition& cut) {
  if (state.squared_norm() == 0.0) throw std::domain_error("degenerate state");
  return {matrix_singular_values(matricize(state, cut)), cut};
}

double renyi_half(std::span<const double> singular_values) {
  return std::accumulate(singular_values.begin(), singular_values.end(), 0.0);
}

double renyi_half(const SingularSpectrum& spectrum) { return renyi_half(spectrum.values); }

double renyi_one(std::span<const double> singular_values) {
  double s = 0.0;
  for (double sigma : singular_values) {
    const double p = sigma * sigma;
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double renyi_one(const SingularSpectrum& spectrum) { return renyi_one(spectrum.values); }

double mean_block_renyi_half(const StateVector& state, std::span<const Bipartition> schedule) {
  if (schedule.empty()) throw std::invalid_argument("mean_block_renyi_half: empty schedule");
  double total = 0.0;
  for (const auto& cut : schedule) total += renyi_half(singular_values(state, cut));
  return total / static_cast<double>(schedule.size());
}

int effective_rank(const SingularSpectrum& spectrum, double cutoff) {
  return static_cast<int>(
      std::count_if(spectrum.values.begin(), spectrum.values.end(), [cutoff](double s) { return s > cutoff; }));
}

bool truncate_rank(ComplexMatrix& matrix, Eigen::Index chi, std::vector<double>* spectrum) {
  if (chi < 1) throw std::invalid_argument("bond dimension chi must be >= 1");
  const Eigen::Index full = std::min(matrix.rows(), matrix.cols());
  if (chi >= full) {
    if (spectrum) *spectrum = matrix_singular_values(matrix);
    return false;
  }
  Eigen::BDCSVD<ComplexMatrix> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (spectrum) spectrum->assign(s.data(), s.data() + s.size());
  matrix.noalias() = svd.matrixU().leftCols(chi) * s.head(chi).asDiagonal() * svd.matrixV().leftCols(chi).adjoint();
  return true;
}

StateVector truncate_cut(const StateVector& state, const Bipartition& cut, int chi) {
  if (chi < 1) throw std::invalid_argument("bond dimension chi must be >= 1");
  CutMap map(state.shape(), cut);
  ComplexMatrix m;
  map.gather(state.amplitudes(), m);
  StateVector out = state;
  if (truncate_rank(m, chi)) map.scatter(m, out.amplitudes());
  return out;
}

Complex inner(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("inner product of states with different dimensions");
  return a.amplitudes().dot(b.amplitudes());
}

double fidelity(const StateVector& a, const StateVector& b) {
  const double na = a.squared_norm();
  const double nb = b.squared_norm();
  if (na == 0.0 || nb == 0.0) throw std::domain_error("fidelity of a zero vector");
  const double f = std::norm(inner(a, b)) / (na * nb);
  return std::clamp(f, 0.0, 1.0);
}

double fidelity_error(const StateVector& a, const StateVector& b) {
  // 1 - f evaluated as the squared component of b orthogonal to a, which
  // stays accurate far below the 1e-16 cancellation floor of 1 - f.
  const double na = a.squared_norm();
  const double nb = b.squared_norm();
  if (na == 0.0 || nb == 0.0) throw std::domain_error("fidelity of a zero vector");
  const Complex overlap = inner(a, b);
  const ComplexVector perp = b.amplitudes() - (overlap / na) * a.amplitudes();
  return std::clamp(perp.squaredNorm() / nb, 0.0, 1.0);
}

}  // namespace wfc
