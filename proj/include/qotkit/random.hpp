#pragma once

#include <qotkit/matrix.hpp>

#include <cstdint>
#include <random>

namespace qot {

/// Explicit random stream; independent streams derive from (seed, index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}
  static Rng stream(std::uint64_t seed, std::uint64_t index) { return Rng(mix(seed) ^ mix(index + 0x9e3779b97f4a7c15ULL)); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  /// Standard complex Gaussian: E|z|^2 = 1.
  cplx complex_normal() {
    const double s = 1.0 / std::sqrt(2.0);
    const double re = normal();
    return {s * re, s * normal()};
  }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
  std::uint64_t next() { return engine_(); }

  ComplexMatrix ginibre(std::size_t rows, std::size_t cols) {
    ComplexMatrix g(rows, cols);
    for (auto& z : g.data()) z = complex_normal();
    return g;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace qot
