#pragma once

// Quadratic-cost transport between states of one system X: couplings live on
// X (x) X*, the cost operator is C = sum_i (R_i (x) 1 - 1 (x) R_i^T)^2 and
// D(sigma, rho)^2 = min tr[C pi] over couplings with marginals sigma^T, rho.

#include <qotkit/conic.hpp>
#include <qotkit/quantum.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace qot::quad {

struct QuadraticCost {
  std::size_t dim = 0;
  std::vector<Observable> observables;
  Observable costOp;  // on X (x) X*, shape [dim, dim]
};

/// Throws DimensionMismatch when the observables do not share `dim`.
QuadraticCost cost_operator(const std::vector<Observable>& rs, std::size_t dim);

struct QuadResult {
  double valueSquared = 0.0;
  QuantumCoupling coupling;
  conic::SolveSummary solver;

  double value() const { return std::sqrt(std::max(valueSquared, 0.0)); }
};

/// Solves the coupling SDP; throws SolverFailure when the solver does not
/// reach an optimal status.
QuadResult dquad(const DensityOperator& sigma, const DensityOperator& rho, const QuadraticCost& cost,
                 const conic::SolveOptions& opts = {});

/// The coupling SDP on supp(rho) (x) supp(sigma^T), where every coupling lives.
conic::ConicProgram dquad_program(const DensityOperator& sigma, const DensityOperator& rho, const QuadraticCost& cost);

/// tr[C pi] for a coupling pi.
double coupling_cost(const QuadraticCost& cost, const ComplexMatrix& pi);

/// Cost of the plan Phi with Phi(sigma) = rho (NotATransportPlan otherwise).
double plan_cost(const KrausChannel& phi, const DensityOperator& sigma, const DensityOperator& rho,
                 const QuadraticCost& cost);

/// Cost of the identity plan: 2 sum_i (tr[R_i^2 sigma] - tr[R_i sqrt(sigma) R_i sqrt(sigma)]).
double self_cost_identity(const DensityOperator& sigma, const QuadraticCost& cost);

double dquad_lower_bound(const DensityOperator& sigma, const DensityOperator& rho, const QuadraticCost& cost);

/// Bijection between couplings of (sigma, rho) and of (rho, sigma) that
/// preserves tr[C pi]: pi'[(a,b),(c,d)] = pi[(d,c),(b,a)].
ComplexMatrix swap_transpose(const ComplexMatrix& pi, std::size_t dim);

/// Both sides of tr[Phi^+(R) sqrt(s) Phi^+(R) sqrt(s)] <= tr[R sqrt(r) R sqrt(r)], r = Phi(s).
struct LiebSides {
  double lhs = 0.0;
  double rhs = 0.0;
};
LiebSides lieb_monotonicity(const KrausChannel& phi, const DensityOperator& sigma, const Observable& r);

/// D(rho,sigma)^2 - D(rho,rho)^2/2 - D(sigma,sigma)^2/2 from given squared values.
inline double centered_square(double dSigmaRho2, double dSigmaSigma2, double dRhoRho2) {
  return dSigmaRho2 - 0.5 * dSigmaSigma2 - 0.5 * dRhoRho2;
}

}  // namespace qot::quad
