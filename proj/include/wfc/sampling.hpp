#pragma once

#include "wfc/qstate.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace wfc {

/// Observed amplitudes: sorted distinct flat indices and their exact values.
/// Holds values only, never a reference to the exact state.
struct SampleMask {
  StateShape shape;
  std::vector<std::uint64_t> indices;
  std::vector<Complex> values;
  std::uint64_t seed = 0;
  double rate = 1.0;

  std::size_t total() const { return shape.size(); }
  std::size_t count() const { return indices.size(); }
  void validate() const;
};

/// round(rate * total), clamped to [1, total].
std::size_t sample_count(std::size_t total, double rate);

/// Uniform sample without replacement of sample_count(d^N, rate) amplitudes.
SampleMask draw_mask(const StateVector& state, double rate, std::uint64_t seed);

/// Same, with the number of sampled amplitudes given directly.
SampleMask draw_mask_count(const StateVector& state, std::size_t count, std::uint64_t seed);

/// Flat indices not in the mask, ascending.
std::vector<std::uint64_t> unsampled_indices(const SampleMask& mask);

/// Sampled amplitudes at their true values, all others exactly zero.
StateVector build_initial(const SampleMask& mask);

/// Overwrites sampled entries with the mask values; the rest is untouched.
StateVector project_data(const StateVector& state, const SampleMask& mask);
void project_data_in_place(Eigen::Ref<ComplexVector> amplitudes, const SampleMask& mask);

// WFM1: "WFM1", u64 total, u64 count, u64 seed, f64 rate, then count x
// (u64 index, f64 re, f64 im), little-endian.
void write_mask(std::ostream& os, const SampleMask& mask);
SampleMask read_mask(std::istream& is, const StateShape& shape);
void write_mask(const std::filesystem::path& path, const SampleMask& mask);
SampleMask read_mask(const std::filesystem::path& path, const StateShape& shape);

struct MaskFileInfo {
  std::uint64_t total = 0;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
  double rate = 0.0;
};
MaskFileInfo inspect_mask(const std::filesystem::path& path);

}  // namespace wfc
