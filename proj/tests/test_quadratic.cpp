#include <doctest.h>

#include "support.hpp"

#include <qotkit/error.hpp>
#include <qotkit/quadratic.hpp>

using namespace qot;
using namespace qot::quad;

namespace {

QuadraticCost random_cost(std::size_t d, std::size_t terms, Rng& rng) {
  std::vector<Observable> rs;
  for (std::size_t k = 0; k < terms; ++k) rs.push_back(random_observable(d, rng));
  return cost_operator(rs, d);
}

}  // namespace

TEST_CASE("Pauli Z cost operator is diag(0, 4, 4, 0)") {
  const auto c = cost_operator({Observable(pauli('Z'))}, 2);
  const double want[] = {0.0, 4.0, 4.0, 0.0};
  CHECK(max_abs_diff(c.costOp.mat(), ComplexMatrix::diagonal(want)) < 1e-15);
  CHECK_THROWS_AS(cost_operator({Observable(pauli('Z'))}, 3), Error);
}

TEST_CASE("zero cost and pure sigma") {
  Rng rng(2);
  const auto sigma = random_state(3, 3, rng), rho = random_state(3, 3, rng);
  const auto zero = cost_operator({Observable(ComplexMatrix(3, 3))}, 3);
  CHECK(dquad(sigma, rho, zero).valueSquared == 0.0);

  const auto cost = random_cost(3, 2, rng);
  const auto pure = random_state(3, 1, rng);
  const auto r = dquad(pure, rho, cost);
  const double product = coupling_cost(cost, QuantumCoupling::product(pure, rho).state.mat());
  CHECK(std::abs(r.valueSquared - product) <= 1e-6);
}

TEST_CASE("symmetry, self distance and the lower bound") {
  Rng rng(8);
  for (std::size_t d : {2u, 3u}) {
    for (int t = 0; t < 6; ++t) {
      const auto cost = random_cost(d, 1 + t % 2, rng);
      const auto sigma = random_state(d, d, rng), rho = random_state(d, d, rng);
      const auto sr = dquad(sigma, rho, cost);
      const auto rs = dquad(rho, sigma, cost);
      CHECK(std::abs(sr.valueSquared - rs.valueSquared) <= 1e-6);
      CHECK(sr.solver.gap <= 1e-7);
      CHECK(std::abs(dquad(sigma, sigma, cost).valueSquared - self_cost_identity(sigma, cost)) <= 1e-6);
      CHECK(dquad_lower_bound(sigma, rho, cost) <= sr.valueSquared + 1e-6);
      // The optimal coupling is feasible.
      CHECK(max_abs_diff(sr.coupling.sigmaT, transpose_op(sigma.mat())) <= 1e-6);
      CHECK(max_abs_diff(sr.coupling.rho, rho.mat()) <= 1e-6);
    }
  }
}

TEST_CASE("swap-transpose maps couplings of (sigma, rho) to couplings of (rho, sigma)") {
  Rng rng(15);
  const std::size_t d = 3;
  const auto cost = random_cost(d, 2, rng);
  const auto sigma = random_state(d, d, rng);
  const auto pi = coupling_from_channel(random_channel(d, d, 2, rng), sigma);
  const ComplexMatrix sw = swap_transpose(pi.state.mat(), d);
  const auto swapped = QuantumCoupling::from_state(sw, d, d);
  CHECK(max_abs_diff(swapped.rho, sigma.mat()) < 1e-12);
  CHECK(max_abs_diff(swapped.sigmaT, transpose_op(pi.rho)) < 1e-12);
  CHECK(std::abs(coupling_cost(cost, sw) - coupling_cost(cost, pi.state.mat())) <= 1e-9);
}

TEST_CASE("plan cost equals the cost of the associated coupling") {
  Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    const std::size_t d = 2 + t % 2;
    const auto cost = random_cost(d, 2, rng);
    const auto sigma = random_state(d, d, rng);
    const auto phi = random_channel(d, d, 1 + rng.index(d), rng);
    const auto rho = phi.apply(sigma);
    const double plan = plan_cost(phi, sigma, rho, cost);
    CHECK(std::abs(plan - coupling_cost(cost, coupling_from_channel(phi, sigma).state.mat())) <= 1e-7);
    CHECK(dquad(sigma, rho, cost).valueSquared <= plan + 1e-7);
  }
  const auto sigma = random_state(2, 2, rng);
  const auto cost = random_cost(2, 1, rng);
  try {
    plan_cost(KrausChannel::identity(2), sigma, random_state(2, 2, rng), cost);
    FAIL("plan with the wrong image accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotATransportPlan);
  }
}

TEST_CASE("identity plan reproduces the self cost") {
  Rng rng(30);
  const auto sigma = random_state(3, 3, rng);
  const auto cost = random_cost(3, 2, rng);
  CHECK(std::abs(plan_cost(KrausChannel::identity(3), sigma, sigma, cost) - self_cost_identity(sigma, cost)) < 1e-10);
}

TEST_CASE("dquad on rank-deficient marginals") {
  Rng rng(33);
  const auto cost = random_cost(4, 2, rng);
  for (int t = 0; t < 4; ++t) {
    const auto sigma = random_state(4, 2, rng), rho = random_state(4, 3, rng);
    const auto r = dquad(sigma, rho, cost);
    CHECK(r.solver.gap <= 1e-7);
    CHECK(max_abs_diff(r.coupling.rho, rho.mat()) <= 1e-6);
    CHECK(r.valueSquared <= coupling_cost(cost, QuantumCoupling::product(sigma, rho).state.mat()) + 1e-7);
  }
}

TEST_CASE("Lieb-type monotonicity") {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const auto sigma = random_state(3, 3, rng);
    const auto phi = random_channel(3, 3, 2, rng);
    const auto sides = lieb_monotonicity(phi, sigma, random_observable(3, rng));
    CHECK(sides.lhs <= sides.rhs + 1e-7);
  }
}
