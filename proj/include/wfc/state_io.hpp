#pragma once

#include "wfc/qstate.hpp"

#include <filesystem>
#include <iosfwd>

namespace wfc {

// WFC1 container: "WFC1", u32 N, u32 d, u8 boundary (0 open, 1 periodic),
// then d^N (re, im) f64 pairs in index order, all little-endian.
void write_state(std::ostream& os, const StateVector& state);
StateVector read_state(std::istream& is);

void write_state(const std::filesystem::path& path, const StateVector& state);
StateVector read_state(const std::filesystem::path& path);

}  // namespace wfc
