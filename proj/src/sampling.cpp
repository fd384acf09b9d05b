#include "wfc/sampling.hpp"

#include "binary_io.hpp"
#include "wfc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace wfc {

void SampleMask::validate() const {
  shape.validate();
  if (indices.size() != values.size()) throw std::invalid_argument("mask indices and values differ in length");
  if (indices.empty()) throw std::invalid_argument("mask is empty");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= total()) throw std::invalid_argument("mask index out of range");
    if (i > 0 && indices[i] <= indices[i - 1]) throw std::invalid_argument("mask indices not strictly increasing");
  }
}

std::size_t sample_count(std::size_t total, double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) throw std::invalid_argument("sample rate must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::llround(rate * static_cast<double>(total)));
  return std::clamp<std::size_t>(k, 1, total);
}

SampleMask draw_mask_count(const StateVector& state, std::size_t count, std::uint64_t seed) {
  if (count < 1 || count > state.size()) throw std::invalid_argument("sample count outside [1, d^N]");
  SampleMask mask;
  mask.shape = state.shape();
  mask.seed = seed;
  mask.rate = static_cast<double>(count) / static_cast<double>(state.size());
  Rng rng(seed);
  mask.indices = rng.sample_without_replacement(state.size(), count);
  mask.values.reserve(count);
  for (auto i : mask.indices) mask.values.push_back(state[i]);
  return mask;
}

SampleMask draw_mask(const StateVector& state, double rate, std::uint64_t seed) {
  SampleMask mask = draw_mask_count(state, sample_count(state.size(), rate), seed);
  mask.rate = rate;
  return mask;
}

std::vector<std::uint64_t> unsampled_indices(const SampleMask& mask) {
  std::vector<std::uint64_t> out;
  out.reserve(mask.total() - mask.count());
  std::size_t j = 0;
  for (std::uint64_t i = 0; i < mask.total(); ++i) {
    if (j < mask.indices.size() && mask.indices[j] == i) {
      ++j;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

void project_data_in_place(Eigen::Ref<ComplexVector> amplitudes, const SampleMask& mask) {
  if (static_cast<std::size_t>(amplitudes.size()) != mask.total())
    throw std::invalid_argument("project_data: dimension mismatch");
  for (std::size_t i = 0; i < mask.indices.size(); ++i)
    amplitudes[static_cast<Eigen::Index>(mask.indices[i])] = mask.values[i];
}

StateVector build_initial(const SampleMask& mask) {
  StateVector out(mask.shape);
  project_data_in_place(out.amplitudes(), mask);
  return out;
}

StateVector project_data(const StateVector& state, const SampleMask& mask) {
  if (state.size() != mask.total()) throw std::invalid_argument("project_data: dimension mismatch");
  StateVector out = state;
  project_data_in_place(out.amplitudes(), mask);
  return out;
}

void write_mask(std::ostream& os, const SampleMask& mask) {
  os.write("WFM1", 4);
  detail::put_le<std::uint64_t>(os, mask.total());
  detail::put_le<std::uint64_t>(os, mask.count());
  detail::put_le<std::uint64_t>(os, mask.seed);
  detail::put_f64(os, mask.rate);
  for (std::size_t i = 0; i < mask.count(); ++i) {
    detail::put_le<std::uint64_t>(os, mask.indices[i]);
    detail::put_f64(os, mask.values[i].real());
    detail::put_f64(os, mask.values[i].imag());
  }
  if (!os) throw std::runtime_error("failed writing WFM1 mask");
}

namespace {

MaskFileInfo read_header(std::istream& is) {
  detail::expect_magic(is, "WFM1");
  MaskFileInfo info;
  info.total = detail::get_le<std::uint64_t>(is, "total");
  info.count = detail::get_le<std::uint64_t>(is, "count");
  info.seed = detail::get_le<std::uint64_t>(is, "seed");
  info.rate = detail::get_f64(is, "rate");
  if (info.count > info.total) throw std::runtime_error("WFM1: count exceeds total");
  return info;
}

}  // namespace

SampleMask read_mask(std::istream& is, const StateShape& shape) {
  const MaskFileInfo info = read_header(is);
  if (info.total != shape.size())
    throw std::runtime_error("WFM1: total " + std::to_string(info.total) + " does not match d^N = " +
                             std::to_string(shape.size()));
  SampleMask mask;
  mask.shape = shape;
  mask.seed = info.seed;
  mask.rate = info.rate;
  mask.indices.reserve(info.count);
  mask.values.reserve(info.count);
  for (std::uint64_t i = 0; i < info.count; ++i) {
    mask.indices.push_back(detail::get_le<std::uint64_t>(is, "index"));
    const double re = detail::get_f64(is, "value");
    const double im = detail::get_f64(is, "value");
    mask.values.emplace_back(re, im);
  }
  detail::expect_eof(is);
  mask.validate();
  return mask;
}

void write_mask(const std::filesystem::path& path, const SampleMask& mask) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_mask(os, mask);
}

SampleMask read_mask(const std::filesystem::path& path, const StateShape& shape) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_mask(is, shape);
}

MaskFileInfo inspect_mask(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  const MaskFileInfo info = read_header(is);
  const auto expected = static_cast<std::uintmax_t>(36 + 24 * info.count);
  if (std::filesystem::file_size(path) != expected) throw std::runtime_error("WFM1: payload length mismatch");
  return info;
}

}  // namespace wfc
