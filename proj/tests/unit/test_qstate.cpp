#include "wfc/eigensolve.hpp"
#include "wfc/qstate.hpp"

#include "oracles.hpp"
#include "test_states.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace wfc;
using wfc::testing::all_cuts;
using wfc::testing::digits_of;
using wfc::testing::flat_of;
using wfc::testing::partial_trace;
using wfc::testing::permutation_oracle;
using wfc::testing::random_state;

TEST(StateVectorTest, RejectsWrongAmplitudeCount) {
  EXPECT_THROW(StateVector({3, 2, Boundary::open}, ComplexVector::Zero(7)), std::invalid_argument);
  EXPECT_THROW(StateVector({1, 2, Boundary::open}), std::invalid_argument);
  EXPECT_THROW(StateVector({3, 1, Boundary::open}), std::invalid_argument);
}

TEST(StateVectorTest, NormalizeZeroStateThrows) {
  StateVector z({3, 2, Boundary::open});
  EXPECT_THROW(z.normalize(), std::domain_error);
}

TEST(StateVectorTest, NormalizedFlag) {
  const StateVector psi = random_state({5, 2, Boundary::periodic}, 3);
  EXPECT_TRUE(psi.is_normalized());
  EXPECT_LE(std::abs(psi.squared_norm() - 1.0), 1e-12);
}

TEST(CutTest, ValidationRules) {
  const StateShape open{6, 2, Boundary::open};
  const StateShape pbc{6, 2, Boundary::periodic};
  EXPECT_THROW(validate_cut(open, {2, 2}), std::invalid_argument);
  EXPECT_NO_THROW(validate_cut(pbc, {2, 2}));
  EXPECT_THROW(validate_cut(pbc, {1, 0}), std::invalid_argument);
  EXPECT_THROW(validate_cut(pbc, {1, 6}), std::invalid_argument);
  EXPECT_THROW(validate_cut(pbc, {7, 1}), std::invalid_argument);
  EXPECT_EQ(central_cut(StateShape{7, 2, Boundary::open}), (Bipartition{1, 3}));
  EXPECT_EQ(complement_cut(pbc, {5, 2}), (Bipartition{1, 4}));
}

TEST(MatricizeTest, PrefixCutIsPlainReshape) {
  ComplexVector v(4);
  v << 1.0, 2.0, 3.0, 4.0;
  const ComplexMatrix m = matricize(StateVector({2, 2, Boundary::open}, v), {1, 1});
  ASSERT_EQ(m.rows(), 2);
  EXPECT_EQ(m(0, 0), Complex(1.0));
  EXPECT_EQ(m(0, 1), Complex(2.0));
  EXPECT_EQ(m(1, 0), Complex(3.0));
  EXPECT_EQ(m(1, 1), Complex(4.0));
}

TEST(MatricizeTest, WrappedBlockUsesLastSiteAsRow) {
  const StateVector psi = random_state({3, 2, Boundary::periodic}, 11);
  const ComplexMatrix m = matricize(psi, {3, 1});
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 4);
  for (int i1 = 0; i1 < 2; ++i1)
    for (int i2 = 0; i2 < 2; ++i2) {
      EXPECT_EQ(m(0, 2 * i1 + i2), psi[flat_of({i1, i2, 0}, 2)]);
      EXPECT_EQ(m(1, 2 * i1 + i2), psi[flat_of({i1, i2, 1}, 2)]);
    }
}

TEST(MatricizeTest, MatchesPermutationOracleOnEveryCut) {
  for (int d : {2, 3})
    for (auto boundary : {Boundary::open, Boundary::periodic}) {
      const StateShape shape{d == 2 ? 6 : 4, d, boundary};
      const StateVector psi = random_state(shape, 100 + static_cast<std::uint64_t>(d));
      for (const auto& cut : all_cuts(shape)) {
        const ComplexMatrix expected = permutation_oracle(psi, cut);
        const ComplexMatrix got = matricize(psi, cut);
        ASSERT_EQ(got.rows(), expected.rows());
        ASSERT_EQ(got.cols(), expected.cols());
        EXPECT_TRUE((got.array() == expected.array()).all())
            << "d=" << d << " cut=(" << cut.block_start << "," << cut.block_len << ")";
      }
    }
}

TEST(MatricizeTest, RoundTripIsBitExactOnEveryCut) {
  for (int n = 2; n <= 6; ++n) {
    const StateShape shape{n, 2, Boundary::periodic};
    const StateVector psi = random_state(shape, static_cast<std::uint64_t>(n));
    for (const auto& cut : all_cuts(shape)) {
      const StateVector back = dematricize(matricize(psi, cut), shape, cut);
      EXPECT_TRUE((back.amplitudes().array() == psi.amplitudes().array()).all());
    }
  }
}

TEST(MatricizeTest, LocateInvertsStateIndex) {
  const StateShape shape{5, 3, Boundary::periodic};
  const CutMap map(shape, {4, 2});
  for (Eigen::Index c = 0; c < map.cols(); ++c)
    for (Eigen::Index r = 0; r < map.rows(); ++r) {
      const auto [rr, cc] = map.locate(map.state_index(r, c));
      EXPECT_EQ(rr, r);
      EXPECT_EQ(cc, c);
    }
  EXPECT_THROW((void)map.locate(shape.size()), std::out_of_range);
}

TEST(SpectrumTest, ProductAndBellStates) {
  const StateVector product = StateVector::basis_state({4, 2, Boundary::open}, 0);
  const auto s = singular_values(product, {1, 2});
  EXPECT_NEAR(s.values[0], 1.0, 1e-15);
  for (std::size_t k = 1; k < s.values.size(); ++k) EXPECT_NEAR(s.values[k], 0.0, 1e-15);
  EXPECT_NEAR(renyi_half(s), 1.0, 1e-14);
  EXPECT_NEAR(renyi_one(s), 0.0, 1e-14);
  EXPECT_EQ(effective_rank(s, 1e-10), 1);

  const auto b = singular_values(wfc::testing::bell_pair(), {1, 1});
  EXPECT_NEAR(b.values[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(b.values[1], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(renyi_half(b), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(renyi_one(b), std::numbers::ln2, 1e-14);
}

TEST(SpectrumTest, ZeroStateIsDegenerate) {
  EXPECT_THROW((void)singular_values(StateVector({4, 2, Boundary::open}), {1, 2}), std::domain_error);
}

TEST(SpectrumTest, UniformSpectrumEntropy) {
  // Maximally entangled across sites {1,2} | {3,4}: sum over i of |i>|i>.
  const StateShape shape{4, 3, Boundary::open};
  StateVector psi(shape);
  for (std::size_t i = 0; i < 9; ++i) psi[i * 9 + i] = 1.0 / 3.0;
  const auto s = singular_values(psi, {1, 2});
  EXPECT_NEAR(renyi_one(s), 2.0 * std::log(3.0), 1e-13);
  EXPECT_NEAR(renyi_half(s), 3.0, 1e-13);
}

TEST(SpectrumTest, XxGroundStateMatchesPartialTrace) {
  HamiltonianSpec spec{6, 2, 2, Boundary::periodic, ModelKind::xx, 0.0, 5};
  const StateVector psi = dense_ground_state(spec).state;
  const auto s = singular_values(psi, central_cut(psi.shape()));
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(partial_trace(psi, {0, 1, 2}));
  const Eigen::VectorXd lambda = es.eigenvalues().reverse();
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    EXPECT_NEAR(s.values[static_cast<std::size_t>(k)], std::sqrt(std::max(lambda(k), 0.0)), 1e-10);
}

TEST(SpectrumTest, RandomStateWrappedBlockMatchesPartialTrace) {
  const StateVector psi = random_state({5, 2, Boundary::periodic}, 8);
  const auto s = singular_values(psi, {4, 2});  // sites 4, 5
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(partial_trace(psi, {3, 4}));
  const Eigen::VectorXd lambda = es.eigenvalues().reverse();
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    EXPECT_NEAR(s.values[static_cast<std::size_t>(k)], std::sqrt(std::max(lambda(k), 0.0)), 1e-10);
}

TEST(SpectrumTest, NuclearNormMatchesJacobiSvd) {
  const StateVector psi = random_state({4, 2, Boundary::open}, 21);
  const ComplexMatrix m = permutation_oracle(psi, {1, 2});
  const Eigen::JacobiSVD<ComplexMatrix> oracle(m);
  EXPECT_NEAR(renyi_half(singular_values(psi, {1, 2})), oracle.singularValues().sum(), 1e-12);
}

TEST(SpectrumTest, MeanBlockRenyiHalf) {
  const StateVector product = StateVector::basis_state({6, 2, Boundary::periodic}, 5);
  const std::vector<Bipartition> cuts{{1, 1}, {2, 3}, {4, 2}};
  EXPECT_NEAR(mean_block_renyi_half(product, cuts), 1.0, 1e-14);
  const StateVector psi = random_state({4, 2, Boundary::open}, 2);
  const std::vector<Bipartition> one{{1, 2}};
  EXPECT_DOUBLE_EQ(mean_block_renyi_half(psi, one), renyi_half(singular_values(psi, {1, 2})));
  const std::vector<Bipartition> prefixes{{1, 1}, {1, 2}, {1, 3}};
  double sum = 0.0;
  for (const auto& c : prefixes) sum += Eigen::JacobiSVD<ComplexMatrix>(permutation_oracle(psi, c)).singularValues().sum();
  EXPECT_NEAR(mean_block_renyi_half(psi, prefixes), sum / 3.0, 1e-12);
  EXPECT_THROW((void)mean_block_renyi_half(psi, std::span<const Bipartition>{}), std::invalid_argument);
}

TEST(SpectrumTest, PropertiesOnEveryCut) {
  for (int d : {2, 3}) {
    const StateShape shape{d == 2 ? 7 : 5, d, Boundary::periodic};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const StateVector psi = random_state(shape, seed);
      for (const auto& cut : all_cuts(shape)) {
        const auto s = singular_values(psi, cut);
        double norm = 0.0;
        for (std::size_t k = 0; k < s.values.size(); ++k) {
          EXPECT_GE(s.values[k], 0.0);
          if (k > 0) {
            EXPECT_LE(s.values[k], s.values[k - 1]);
          }
          norm += s.values[k] * s.values[k];
        }
        EXPECT_NEAR(norm, 1.0, 1e-10);

        const auto sc = singular_values(psi, complement_cut(shape, cut));
        ASSERT_EQ(sc.values.size(), s.values.size());
        for (std::size_t k = 0; k < s.values.size(); ++k) EXPECT_NEAR(sc.values[k], s.values[k], 1e-10);

        const int m = std::min(cut.block_len, shape.num_sites - cut.block_len);
        EXPECT_GE(renyi_one(s), -1e-14);
        EXPECT_LE(renyi_one(s), m * std::log(d) + 1e-12);
        EXPECT_GE(renyi_half(s), 1.0 - 1e-12);
        EXPECT_LE(renyi_half(s), std::pow(d, m / 2.0) + 1e-12);
      }
    }
  }
}

TEST(TruncateTest, FullRankIsIdentityAndProductStateSurvivesChiOne) {
  const StateVector psi = random_state({6, 2, Boundary::open}, 4);
  const StateVector same = truncate_cut(psi, {1, 2}, 4);
  EXPECT_LE((same.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff(), 1e-12);
  const StateVector product = StateVector::basis_state({6, 2, Boundary::open}, 9);
  const StateVector kept = truncate_cut(product, {1, 3}, 1);
  EXPECT_LE((kept.amplitudes() - product.amplitudes()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW((void)truncate_cut(psi, {1, 3}, 0), std::invalid_argument);
}

TEST(TruncateTest, EckartYoungOnEveryCut) {
  const StateShape shape{6, 2, Boundary::periodic};
  const StateVector psi = random_state(shape, 31);
  for (const auto& cut : all_cuts(shape)) {
    const auto s = singular_values(psi, cut);
    for (int chi = 1; chi <= static_cast<int>(s.values.size()); ++chi) {
      double tail = 0.0;
      for (std::size_t k = static_cast<std::size_t>(chi); k < s.values.size(); ++k) tail += s.values[k] * s.values[k];
      const StateVector t = truncate_cut(psi, cut, chi);
      EXPECT_NEAR((psi.amplitudes() - t.amplitudes()).squaredNorm(), tail, 1e-10);
      EXPECT_LE(effective_rank(singular_values(t, cut), 1e-10), chi);
    }
  }
}

TEST(TruncateTest, RankTwoOfFourSiteState) {
  const StateVector psi = random_state({4, 2, Boundary::open}, 77);
  const Eigen::JacobiSVD<ComplexMatrix> oracle(permutation_oracle(psi, {1, 2}));
  const auto& sv = oracle.singularValues();
  const StateVector t = truncate_cut(psi, {1, 2}, 2);
  EXPECT_NEAR((psi.amplitudes() - t.amplitudes()).norm(), std::sqrt(sv(2) * sv(2) + sv(3) * sv(3)), 1e-12);
}

TEST(FidelityTest, Examples) {
  const StateVector psi = random_state({5, 2, Boundary::open}, 9);
  EXPECT_NEAR(fidelity(psi, psi), 1.0, 1e-14);
  StateVector scaled = psi;
  scaled.amplitudes() *= 2.0 * std::polar(1.0, 0.7);
  EXPECT_NEAR(fidelity(psi, scaled), 1.0, 1e-14);
  EXPECT_NEAR(fidelity_error(psi, scaled), 0.0, 1e-14);
  const StateShape two{2, 2, Boundary::open};
  EXPECT_EQ(fidelity(StateVector::basis_state(two, 0), StateVector::basis_state(two, 1)), 0.0);
  EXPECT_THROW((void)fidelity(psi, StateVector(psi.shape())), std::domain_error);
}

TEST(FidelityTest, SymmetricAndConsistent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const StateVector a = random_state({4, 2, Boundary::open}, seed);
    const StateVector b = random_state({4, 2, Boundary::open}, seed + 100);
    EXPECT_NEAR(fidelity(a, b), fidelity(b, a), 1e-14);
    EXPECT_NEAR(fidelity_error(a, b), 1.0 - fidelity(a, b), 1e-14);
  }
}

TEST(FidelityTest, ErrorResolvesTinyPerturbations) {
  const StateVector psi = random_state({6, 2, Boundary::open}, 12);
  StateVector near = psi;
  near[3] += 1e-10;
  const double eps = fidelity_error(psi, near);
  EXPECT_GT(eps, 0.0);
  EXPECT_LT(eps, 1e-19);
}
