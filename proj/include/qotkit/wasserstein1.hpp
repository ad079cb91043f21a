#pragma once

// Quantum Wasserstein distance of order 1 on n qubits and its dual, the
// quantum Lipschitz constant.
//
//   W1(rho, sigma) = min sum_i (1/2) ||X_i||_1
//                    s.t. sum_i X_i = rho - sigma, tr_i X_i = 0,
//
// solved with the Jordan split X_i = P_i - N_i. Its conic dual is
//   max tr[A (rho - sigma)] s.t. -1/2 <= A - 1_i (x) B_i <= 1/2 for all i.

#include <qotkit/conic.hpp>
#include <qotkit/quantum.hpp>

#include <vector>

namespace qot::w1 {

constexpr std::size_t kDefaultMaxQubits = 4;

struct W1Options {
  std::size_t maxQubits = kDefaultMaxQubits;
  conic::SolveOptions solver{};
  /// Multiplies every reported W1 value. Only for mutation tests of the
  /// verification suites; 1 in all real use.
  double valueScale = 1.0;
};

/// Site term X_i = c_i (rho^(i) - sigma^(i)) with rho^(i), sigma^(i) the
/// normalized positive and negative Jordan parts.
struct SiteTerm {
  ComplexMatrix x;
  double weight = 0.0;  // c_i
  ComplexMatrix plus;   // rho^(i), zero when c_i = 0
  ComplexMatrix minus;  // sigma^(i)
};

struct W1Result {
  double value = 0.0;
  std::vector<SiteTerm> decomposition;
  conic::SolveSummary solver;
};

struct DualW1Result {
  double value = 0.0;
  Observable witness;
  std::vector<ComplexMatrix> siteShifts;  // B_i on the other n-1 qubits
  conic::SolveSummary solver;
};

struct SiteLipschitz {
  double t = 0.0;
  ComplexMatrix minimizer;  // A^(i) on the n-1 qubits other than i
  conic::SolveSummary solver;
};

struct LipschitzResult {
  double value = 0.0;
  std::vector<SiteLipschitz> perSite;
  std::vector<conic::SolveSummary> solver;
};

/// Number of qubits: throws ShapeMismatch unless the shape is all-qubit
/// and InvalidArgument when n exceeds the cap.
std::size_t qubit_count(const FactorShape& shape, std::size_t maxQubits = kDefaultMaxQubits);

conic::ConicProgram w1_program(const DensityOperator& rho, const DensityOperator& sigma);

W1Result w1(const DensityOperator& rho, const DensityOperator& sigma, const W1Options& opts = {});
DualW1Result w1_dual(const DensityOperator& rho, const DensityOperator& sigma, const W1Options& opts = {});

LipschitzResult lipschitz(const Observable& a, const W1Options& opts = {});
/// min_B ||A - 1_i (x) B|| for one site.
SiteLipschitz site_lipschitz(const Observable& a, std::size_t site, const W1Options& opts = {});

/// sigma^{>=} construction: (1/2^|S|) 1_S (x) tr_S[rho].
ComplexMatrix replace_with_maximally_mixed(const ComplexMatrix& rho, const FactorShape& shape,
                                           std::span<const std::size_t> sites);

struct BoundCheck {
  double value = 0.0;     // W1 computed by the SDP
  double bound = 0.0;     // stated bound
  double feasibleCost = 0.0;  // cost of an explicit decomposition (0 if none)
  bool holds = false;
};

/// W1(rho, sigma) <= 1 when tr_i rho = tr_i sigma (MarginalMismatch otherwise).
BoundCheck neighbor_bound(const DensityOperator& rho, const DensityOperator& sigma, std::size_t site,
                          const W1Options& opts = {});

/// W1(rho, Phi(rho)) <= 2k for Phi acting on the k listed qubits; also builds
/// the telescoping decomposition and reports its cost.
BoundCheck local_channel_bound(const KrausChannel& localPhi, std::span<const std::size_t> sites,
                               const DensityOperator& rho, const W1Options& opts = {});

/// Telescoping feasible decomposition of rho - sigma when tr_S rho = tr_S sigma.
std::vector<SiteTerm> telescoping_decomposition(const DensityOperator& rho, const DensityOperator& sigma,
                                                std::span<const std::size_t> sites);

struct ContractionEstimate {
  double lower = 0.0;  // sampled max of W1(Phi rho, Phi sigma) / W1(rho, sigma)
  double upper = 0.0;  // trivial bound: number of output qubits
  std::size_t pairs = 0;
};

/// Sampled lower bound of the W1 contraction coefficient of a channel from
/// nIn to nOut qubits; half the samples are neighbor pairs.
ContractionEstimate contraction_lower_bound(const KrausChannel& phi, std::size_t trials, std::uint64_t seed,
                                            const W1Options& opts = {});

}  // namespace qot::w1
