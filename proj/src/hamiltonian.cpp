#include "wfc/hamiltonian.hpp"

#include "wfc/rng.hpp"

#include <stdexcept>
#include <string>

namespace wfc {

namespace {

ComplexMatrix random_hermitian(Rng& rng, Eigen::Index dim) {
  ComplexMatrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
  return (g + g.adjoint()) / 2.0;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct Paulis {
  ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  ComplexMatrix x{{0.0, 1.0}, {1.0, 0.0}};
  ComplexMatrix y{{0.0, Complex(0.0, -1.0)}, {Complex(0.0, 1.0), 0.0}};
  ComplexMatrix z{{1.0, 0.0}, {0.0, -1.0}};
};

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::random_inhomogeneous: return "random_inhomogeneous";
    case ModelKind::random_homogeneous: return "random_homogeneous";
    case ModelKind::xx: return "xx";
    case ModelKind::transverse_ising: return "transverse_ising";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "random_inhomogeneous" || s == "random") return ModelKind::random_inhomogeneous;
  if (s == "random_homogeneous") return ModelKind::random_homogeneous;
  if (s == "xx") return ModelKind::xx;
  if (s == "transverse_ising" || s == "ising") return ModelKind::transverse_ising;
  throw std::invalid_argument("unknown model kind '" + std::string(s) + "'");
}

void HamiltonianSpec::validate() const {
  shape().validate();
  if (interaction_len < 2) throw std::invalid_argument("interaction length must be >= 2");
  if (interaction_len > num_sites)
    throw std::invalid_argument("interaction length " + std::to_string(interaction_len) + " exceeds N = " +
                                std::to_string(num_sites));
  const bool named = kind == ModelKind::xx || kind == ModelKind::transverse_ising;
  if (named && (local_dim != 2 || interaction_len != 2))
    throw std::invalid_argument(std::string(to_string(kind)) + " requires d = 2 and l = 2");
  if (kind == ModelKind::transverse_ising && lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
}

nlohmann::json to_json(const HamiltonianSpec& spec) {
  return {{"n", spec.num_sites},
          {"d", spec.local_dim},
          {"l", spec.interaction_len},
          {"boundary", std::string(to_string(spec.boundary))},
          {"kind", std::string(to_string(spec.kind))},
          {"lambda", spec.lambda},
          {"seed", spec.seed}};
}

HamiltonianSpec spec_from_json(const nlohmann::json& j) {
  HamiltonianSpec s;
  s.num_sites = j.at("n").get<int>();
  s.local_dim = j.value("d", 2);
  s.interaction_len = j.value("l", 2);
  s.boundary = boundary_from_string(j.value("boundary", std::string("periodic")));
  s.kind = model_kind_from_string(j.value("kind", std::string("random_inhomogeneous")));
  s.lambda = j.value("lambda", 0.0);
  s.seed = j.value("seed", std::uint64_t{0});
  s.validate();
  return s;
}

std::vector<LocalTerm> generate_terms(const HamiltonianSpec& spec) {
  spec.validate();
  const int n = spec.num_sites;
  const int l = spec.interaction_len;
  const int count = spec.boundary == Boundary::open ? n - l + 1 : n;
  const auto block_dim = static_cast<Eigen::Index>(checked_pow(static_cast<std::size_t>(spec.local_dim), l));

  std::vector<LocalTerm> terms;
  terms.reserve(static_cast<std::size_t>(count));
  switch (spec.kind) {
    case ModelKind::random_inhomogeneous:
      for (int i = 0; i < count; ++i) {
        Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(i));
        terms.push_back({i + 1, random_hermitian(rng, block_dim)});
      }
      break;
    case ModelKind::random_homogeneous: {
      Rng rng = Rng::stream(spec.seed, streams::homogeneous_term);
      const ComplexMatrix h = random_hermitian(rng, block_dim);
      for (int i = 0; i < count; ++i) terms.push_back({i + 1, h});
      break;
    }
    case ModelKind::xx: {
      const Paulis p;
      const ComplexMatrix h = kron(p.x, p.x) + kron(p.y, p.y);
      for (int i = 0; i < count; ++i) terms.push_back({i + 1, h});
      break;
    }
    case ModelKind::transverse_ising: {
      const Paulis p;
      const ComplexMatrix zz = kron(p.z, p.z);
      const ComplexMatrix x_left = kron(p.x, p.id);
      const ComplexMatrix x_right = kron(p.id, p.x);
      for (int i = 0; i < count; ++i) {
        double w_left = 0.5;
        double w_right = 0.5;
        if (spec.boundary == Boundary::open) {
          if (i == 0) w_left = 1.0;
          if (i == count - 1) w_right = 1.0;
        }
        terms.push_back({i + 1, -zz - spec.lambda * (w_left * x_left + w_right * x_right)});
      }
      break;
    }
  }
  return terms;
}

Hamiltonian::Hamiltonian(const HamiltonianSpec& spec) : spec_(spec), terms_(generate_terms(spec)) {
  dimension_ = spec_.shape().size();
  maps_.reserve(terms_.size());
  for (const auto& t : terms_) maps_.push_back(CutMap::unchecked(spec_.shape(), t.site, spec_.interaction_len));
}

void Hamiltonian::apply(const ComplexVector& in, ComplexVector& out) const {
  if (static_cast<std::size_t>(in.size()) != dimension_)
    throw std::invalid_argument("Hamiltonian::apply: dimension mismatch");
  out.setZero(in.size());
  ComplexMatrix block;
  ComplexMatrix product;
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    maps_[t].gather(in, block);
    product.noalias() = terms_[t].op * block;
    maps_[t].scatter_add(product, out);
  }
}

StateVector Hamiltonian::apply(const StateVector& state) const {
  if (state.shape().num_sites != spec_.num_sites || state.local_dim() != spec_.local_dim)
    throw std::invalid_argument("Hamiltonian::apply: state dimensions do not match the spec");
  ComplexVector out;
  apply(state.amplitudes(), out);
  return StateVector(state.shape(), std::move(out));
}

double Hamiltonian::expectation(const ComplexVector& v) const {
  ComplexVector hv;
  apply(v, hv);
  return v.dot(hv).real();
}

ComplexMatrix Hamiltonian::dense() const {
  if (dimension_ > 8192) throw std::length_error("dense Hamiltonian limited to d^N <= 8192");
  const int n = spec_.num_sites;
  const int l = spec_.interaction_len;
  const auto d = static_cast<std::size_t>(spec_.local_dim);
  const auto dim = static_cast<Eigen::Index>(dimension_);
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);

  // place[s] = d^(N-1-s): weight of site s (0-based) in the flat index.
  std::vector<std::size_t> place(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) place[static_cast<std::size_t>(s)] = checked_pow(d, n - 1 - s);

  for (const auto& term : terms_) {
    std::vector<std::size_t> sites;
    for (int j = 0; j < l; ++j) sites.push_back(static_cast<std::size_t>((term.site - 1 + j) % n));
    for (std::size_t col = 0; col < dimension_; ++col) {
      std::size_t in_block = 0;
      std::size_t cleared = col;
      for (std::size_t s : sites) {
        const std::size_t digit = (col / place[s]) % d;
        in_block = in_block * d + digit;
        cleared -= digit * place[s];
      }
      for (Eigen::Index out_block = 0; out_block < term.op.rows(); ++out_block) {
        const Complex amp = term.op(out_block, static_cast<Eigen::Index>(in_block));
        if (amp == Complex(0.0)) continue;
        std::size_t row = cleared;
        auto rem = static_cast<std::size_t>(out_block);
        for (auto it = sites.rbegin(); it != sites.rend(); ++it) {
          row += (rem % d) * place[*it];
          rem /= d;
        }
        h(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += amp;
      }
    }
  }
  return h;
}

}  // namespace wfc
