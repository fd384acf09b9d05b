#include "wfc/state_io.hpp"

#include "binary_io.hpp"

#include <fstream>

namespace wfc {

void write_state(std::ostream& os, const StateVector& state) {
  os.write("WFC1", 4);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(state.num_sites()));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(state.local_dim()));
  detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(state.boundary()));
  for (const Complex& c : state.amplitudes()) {
    detail::put_f64(os, c.real());
    detail::put_f64(os, c.imag());
  }
  if (!os) throw std::runtime_error("failed writing WFC1 state");
}

StateVector read_state(std::istream& is) {
  detail::expect_magic(is, "WFC1");
  StateShape shape;
  shape.num_sites = static_cast<int>(detail::get_le<std::uint32_t>(is, "N"));
  shape.local_dim = static_cast<int>(detail::get_le<std::uint32_t>(is, "d"));
  const auto flag = detail::get_le<std::uint8_t>(is, "boundary flag");
  if (flag > 1) throw std::runtime_error("WFC1: invalid boundary flag");
  shape.boundary = static_cast<Boundary>(flag);
  shape.validate();
  ComplexVector amps(static_cast<Eigen::Index>(shape.size()));
  for (auto& c : amps) {
    const double re = detail::get_f64(is, "amplitudes");
    const double im = detail::get_f64(is, "amplitudes");
    c = {re, im};
  }
  detail::expect_eof(is);
  return StateVector(shape, std::move(amps));
}

void write_state(const std::filesystem::path& path, const StateVector& state) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_state(os, state);
}

StateVector read_state(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_state(is);
}

}  // namespace wfc
