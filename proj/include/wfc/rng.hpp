#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace wfc {

/// Seedable 64-bit generator with a portable output sequence.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// The library's own distributions are used instead of <random>'s, whose
/// output is implementation-defined, so that every platform reproduces the
/// same Hamiltonians, masks and start vectors bit for bit.
///
/// Stream splitting: the child stream `id` of a parent seed is seeded with
///   splitmix64(seed ^ splitmix64(id + 0x9E3779B97F4A7C15)).
/// Child streams are independent of how many siblings are drawn, so e.g. the
/// operator of term i never depends on the chain length.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t id) { return Rng(child_seed(seed, id)); }
  static std::uint64_t child_seed(std::uint64_t seed, std::uint64_t id);
  static std::uint64_t splitmix64(std::uint64_t x);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal deviate (Marsaglia polar method).
  double normal();

  /// Complex Gaussian with independent N(0, 1/2) real and imaginary parts.
  std::complex<double> complex_normal();

  /// k distinct values from [0, n), sorted ascending.
  std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k);

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Named child streams used across the library.
namespace streams {
inline constexpr std::uint64_t lanczos_start = 0x4C414E43'5A4F5331ull;
inline constexpr std::uint64_t degeneracy_probe = 0x44454745'4E455241ull;
inline constexpr std::uint64_t homogeneous_term = 0x484F4D4F'47454E45ull;
inline constexpr std::uint64_t mask = 0x4D41534B'00000001ull;
inline constexpr std::uint64_t schedule_shuffle = 0x53485546'464C4531ull;
inline constexpr std::uint64_t index_pick = 0x494E4445'58504B31ull;
}  // namespace streams

}  // namespace wfc
