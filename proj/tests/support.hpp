#pragma once

#include <qotkit/quantum.hpp>
#include <qotkit/random.hpp>

#include <cmath>

namespace qot::testing {

inline DensityOperator qubit_state(std::size_t n, Rng& rng, std::size_t rank = 0) {
  const std::size_t d = std::size_t{1} << n;
  return random_state(d, rank == 0 ? d : rank, rng).with_shape(FactorShape::qubits(n));
}

/// A diagonal state on n qubits drawn from a flat Dirichlet.
inline DensityOperator diagonal_state(std::size_t n, Rng& rng, std::vector<double>* probs = nullptr) {
  const std::size_t d = std::size_t{1} << n;
  std::vector<double> p(d);
  double s = 0.0;
  for (auto& x : p) {
    x = -std::log(1.0 - rng.uniform());
    s += x;
  }
  for (auto& x : p) x /= s;
  if (probs) *probs = p;
  return DensityOperator::diagonal(p, FactorShape::qubits(n));
}

inline ComplexMatrix random_hermitian(std::size_t d, Rng& rng) { return random_observable(d, rng).mat(); }

}  // namespace qot::testing
