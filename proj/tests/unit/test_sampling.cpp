#include "wfc/qstate.hpp"
#include "wfc/rng.hpp"
#include "wfc/sampling.hpp"
#include "wfc/state_io.hpp"

#include "test_states.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>

using namespace wfc;
using wfc::testing::random_state;

namespace {

const StateShape kShape8{8, 2, Boundary::periodic};

std::uint64_t read_u64_at(const std::string& bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return v;
}

}  // namespace

TEST(Sampling, SampleCountRounding) {
  EXPECT_EQ(sample_count(1024, 0.5), 512u);
  EXPECT_EQ(sample_count(1024, 1.0), 1024u);
  EXPECT_EQ(sample_count(10, 0.04), 1u);  // rounds to 0, clamped to 1
  EXPECT_EQ(sample_count(10, 0.25), 3u);  // 2.5 rounds half away from zero
  EXPECT_EQ(sample_count(10, 0.34), 3u);
  EXPECT_EQ(sample_count(10, 0.36), 4u);
}

TEST(Sampling, DrawMaskCounts) {
  const StateVector psi = random_state({10, 2, Boundary::open}, 1);
  EXPECT_EQ(draw_mask(psi, 0.5, 3).count(), 512u);
  const SampleMask all = draw_mask(psi, 1.0, 3);
  ASSERT_EQ(all.count(), psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    EXPECT_EQ(all.indices[i], i);
    EXPECT_EQ(all.values[i], psi[i]);
  }
  EXPECT_THROW(draw_mask(psi, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(draw_mask(psi, 1.5, 1), std::invalid_argument);
  EXPECT_THROW(draw_mask(psi, std::nan(""), 1), std::invalid_argument);
  EXPECT_THROW(draw_mask_count(psi, 0, 1), std::invalid_argument);
  EXPECT_THROW(draw_mask_count(psi, psi.size() + 1, 1), std::invalid_argument);
}

TEST(Sampling, MaskInvariants) {
  const StateVector psi = random_state(kShape8, 2);
  const SampleMask m = draw_mask(psi, 0.37, 9);
  EXPECT_NO_THROW(m.validate());
  EXPECT_TRUE(std::is_sorted(m.indices.begin(), m.indices.end()));
  EXPECT_EQ(std::adjacent_find(m.indices.begin(), m.indices.end()), m.indices.end());
  for (std::size_t i = 0; i < m.count(); ++i) EXPECT_EQ(m.values[i], psi[m.indices[i]]);
  EXPECT_EQ(m.seed, 9u);
  EXPECT_EQ(m.rate, 0.37);
  const auto free = unsampled_indices(m);
  EXPECT_EQ(free.size() + m.count(), psi.size());
  for (auto i : free) EXPECT_FALSE(std::binary_search(m.indices.begin(), m.indices.end(), i));
}

TEST(Sampling, Deterministic) {
  const StateVector psi = random_state(kShape8, 2);
  const SampleMask a = draw_mask(psi, 0.5, 42);
  const SampleMask b = draw_mask(psi, 0.5, 42);
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.indices, draw_mask(psi, 0.5, 43).indices);
}

TEST(Sampling, BuildInitial) {
  const StateVector psi = random_state(kShape8, 4);
  const SampleMask m = draw_mask(psi, 0.6, 5);
  const StateVector init = build_initial(m);
  double sampled_norm = 0.0;
  for (std::size_t i = 0; i < m.count(); ++i) sampled_norm += std::norm(m.values[i]);
  EXPECT_NEAR(init.squared_norm(), sampled_norm, 1e-14);
  for (auto i : unsampled_indices(m)) EXPECT_EQ(init[i], Complex(0.0));
  for (std::size_t i = 0; i < m.count(); ++i) EXPECT_EQ(init[m.indices[i]], m.values[i]);

  EXPECT_TRUE(build_initial(draw_mask(psi, 1.0, 5)).amplitudes() == psi.amplitudes());

  const SampleMask one_free = draw_mask_count(psi, psi.size() - 1, 6);
  const StateVector almost = build_initial(one_free);
  int differing = 0;
  for (std::size_t i = 0; i < psi.size(); ++i) differing += almost[i] != psi[i];
  EXPECT_EQ(differing, 1);
}

TEST(Sampling, ProjectData) {
  const StateVector psi = random_state(kShape8, 4);
  const SampleMask m = draw_mask(psi, 0.5, 7);
  const StateVector init = build_initial(m);
  EXPECT_TRUE(project_data(init, m).amplitudes() == init.amplitudes());
  EXPECT_TRUE(project_data(psi, m).amplitudes() == psi.amplitudes());

  const StateVector other = random_state(kShape8, 8);
  const StateVector once = project_data(other, m);
  EXPECT_TRUE(project_data(once, m).amplitudes() == once.amplitudes());
  const auto free = unsampled_indices(m);
  for (auto i : free) EXPECT_EQ(once[i], other[i]);

  const StateVector truncated = truncate_cut(psi, {1, 4}, 2);
  const StateVector projected = project_data(truncated, m);
  for (std::size_t i = 0; i < m.count(); ++i) EXPECT_EQ(projected[m.indices[i]], m.values[i]);

  EXPECT_THROW(project_data(random_state({7, 2, Boundary::periodic}, 1), m), std::invalid_argument);
}

TEST(Sampling, MarginalUniformity) {
  const StateVector psi = random_state(kShape8, 1);
  const double rate = 0.5;
  const int draws = 10000;
  std::vector<int> hits(psi.size(), 0);
  for (int t = 0; t < draws; ++t)
    for (auto i : draw_mask(psi, rate, Rng::child_seed(1234, static_cast<std::uint64_t>(t))).indices) ++hits[i];
  const double sigma = std::sqrt(draws * rate * (1.0 - rate));
  for (std::size_t i = 0; i < hits.size(); ++i) EXPECT_NEAR(hits[i], draws * rate, 5.0 * sigma) << "index " << i;
}

TEST(Sampling, MaskFileRoundTrip) {
  const StateVector psi = random_state({6, 3, Boundary::open}, 3);
  const SampleMask m = draw_mask(psi, 0.3, 77);
  std::stringstream buf;
  write_mask(buf, m);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 36 + 24 * m.count());
  EXPECT_EQ(bytes.substr(0, 4), "WFM1");
  EXPECT_EQ(read_u64_at(bytes, 4), psi.size());
  EXPECT_EQ(read_u64_at(bytes, 12), m.count());
  EXPECT_EQ(read_u64_at(bytes, 20), 77u);
  EXPECT_EQ(std::bit_cast<double>(read_u64_at(bytes, 28)), 0.3);
  EXPECT_EQ(read_u64_at(bytes, 36), m.indices[0]);

  std::stringstream in(bytes);
  const SampleMask back = read_mask(in, psi.shape());
  EXPECT_EQ(back.indices, m.indices);
  EXPECT_EQ(back.values, m.values);
  EXPECT_EQ(back.seed, m.seed);
  EXPECT_EQ(back.rate, m.rate);

  const auto path = std::filesystem::temp_directory_path() / "wfc_test_mask.wfm";
  write_mask(path, m);
  const MaskFileInfo info = inspect_mask(path);
  EXPECT_EQ(info.total, psi.size());
  EXPECT_EQ(info.count, m.count());
  EXPECT_EQ(read_mask(path, psi.shape()).indices, m.indices);
  std::filesystem::remove(path);
}

TEST(Sampling, MaskFileRejectsBadInput) {
  const StateVector psi = random_state(kShape8, 3);
  const SampleMask m = draw_mask(psi, 0.5, 1);
  std::stringstream buf;
  write_mask(buf, m);
  const std::string good = buf.str();

  auto read = [&](const std::string& bytes, StateShape shape) {
    std::stringstream in(bytes);
    return read_mask(in, shape);
  };
  EXPECT_THROW(read("WFM2" + good.substr(4), kShape8), std::runtime_error);
  EXPECT_THROW(read(good.substr(0, good.size() - 3), kShape8), std::runtime_error);
  EXPECT_THROW(read(good + "x", kShape8), std::runtime_error);
  EXPECT_THROW(read(good, {9, 2, Boundary::periodic}), std::runtime_error);
  // Swapping the first two indices breaks strict ordering.
  std::string unsorted = good;
  for (std::size_t i = 0; i < 8; ++i) std::swap(unsorted[36 + i], unsorted[60 + i]);
  EXPECT_THROW(read(unsorted, kShape8), std::invalid_argument);
}

TEST(StateIo, RoundTrip) {
  for (StateShape shape : {StateShape{5, 2, Boundary::open}, StateShape{4, 3, Boundary::periodic}}) {
    const StateVector psi = random_state(shape, 12);
    std::stringstream buf;
    write_state(buf, psi);
    const std::string bytes = buf.str();
    EXPECT_EQ(bytes.size(), 13 + 16 * psi.size());
    EXPECT_EQ(bytes.substr(0, 4), "WFC1");
    std::stringstream in(bytes);
    const StateVector back = read_state(in);
    EXPECT_EQ(back.shape(), shape);
    EXPECT_TRUE(back.amplitudes() == psi.amplitudes());
  }
}

TEST(StateIo, RejectsBadInput) {
  const StateVector psi = random_state({4, 2, Boundary::open}, 1);
  std::stringstream buf;
  write_state(buf, psi);
  const std::string good = buf.str();
  auto read = [](const std::string& bytes) {
    std::stringstream in(bytes);
    return read_state(in);
  };
  EXPECT_THROW(read("XXXX" + good.substr(4)), std::runtime_error);
  EXPECT_THROW(read(good.substr(0, good.size() - 1)), std::runtime_error);
  EXPECT_THROW(read(good + std::string(1, '\0')), std::runtime_error);
  std::string bad_flag = good;
  bad_flag[12] = 7;
  EXPECT_THROW(read(bad_flag), std::runtime_error);
  EXPECT_THROW(read_state(std::filesystem::path("/nonexistent/state.wfc")), std::runtime_error);
}
