#pragma once

// States, observables and Kraus channels. The dual space X* of a system X
// is represented as C^d in the conjugate basis, so |x> in X corresponds to
// <x| in X*, and the X* marginal of a coupling is a transpose.

#include <qotkit/matrix.hpp>
#include <qotkit/random.hpp>

#include <cstdint>
#include <limits>
#include <vector>

namespace qot {

constexpr double kStateTol = 1e-9;

/// PSD, unit-trace Hermitian operator with tensor-factor metadata.
class DensityOperator {
 public:
  DensityOperator() = default;
  /// Throws NotHermitian / NotAState when the invariants fail within `tol`.
  explicit DensityOperator(const ComplexMatrix& mat, double tol = kStateTol);
  DensityOperator(const ComplexMatrix& mat, FactorShape shape, double tol = kStateTol);

  const ComplexMatrix& mat() const noexcept { return mat_; }
  const FactorShape& shape() const noexcept { return shape_; }
  std::size_t dim() const noexcept { return mat_.rows(); }
  /// Same matrix annotated with another factorization of its dimension.
  DensityOperator with_shape(FactorShape shape) const;

  static DensityOperator maximally_mixed(std::size_t dim);
  static DensityOperator pure(std::span<const cplx> psi);
  /// |x><x| on n qubits.
  static DensityOperator basis_state(std::size_t n, std::size_t x);
  static DensityOperator diagonal(std::span<const double> probs, FactorShape shape);

 private:
  ComplexMatrix mat_;
  FactorShape shape_;
};

class Observable {
 public:
  Observable() = default;
  explicit Observable(const ComplexMatrix& mat);
  Observable(const ComplexMatrix& mat, FactorShape shape);

  const ComplexMatrix& mat() const noexcept { return mat_; }
  const FactorShape& shape() const noexcept { return shape_; }
  std::size_t dim() const noexcept { return mat_.rows(); }
  Observable with_shape(FactorShape shape) const;

 private:
  ComplexMatrix mat_;
  FactorShape shape_;
};

/// Unit-norm vector.
struct PureState {
  ComplexVector vec;
  FactorShape shape;

  ComplexMatrix projector() const { return outer(vec, vec); }
};

/// Linear map A -> sum_i K_i A K_i^dagger with no trace condition.
struct KrausMap {
  std::size_t dimIn = 0;
  std::size_t dimOut = 0;
  std::vector<ComplexMatrix> kraus;  // dimOut x dimIn each

  ComplexMatrix apply(const ComplexMatrix& a) const;
};

/// Completely positive trace-preserving map given by Kraus operators.
class KrausChannel {
 public:
  KrausChannel() = default;
  /// Throws NotAChannel unless sum B_i^dagger B_i = 1 within `tol`.
  KrausChannel(std::size_t dimIn, std::size_t dimOut, std::vector<ComplexMatrix> kraus, double tol = 1e-8);

  std::size_t dim_in() const noexcept { return map_.dimIn; }
  std::size_t dim_out() const noexcept { return map_.dimOut; }
  const std::vector<ComplexMatrix>& kraus() const noexcept { return map_.kraus; }
  const KrausMap& map() const noexcept { return map_; }

  ComplexMatrix apply(const ComplexMatrix& a) const;
  DensityOperator apply(const DensityOperator& rho) const;

  static KrausChannel identity(std::size_t dim);
  static KrausChannel unitary(const ComplexMatrix& u);
  /// A -> tr(A) rho0.
  static KrausChannel constant(const DensityOperator& rho0, std::size_t dimIn);
  /// Channel acting as `local` on the listed factors and as the identity elsewhere.
  static KrausChannel local(const KrausChannel& local, const FactorShape& shape, std::span<const std::size_t> factors);

 private:
  KrausMap map_;
};

ComplexMatrix apply_channel(const KrausChannel& phi, const ComplexMatrix& a);
/// Hilbert-Schmidt adjoint, Kraus family {B_i^dagger}; unital.
KrausMap adjoint_channel(const KrausChannel& phi);

double trace_distance(const DensityOperator& rho, const DensityOperator& sigma);
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);
double vn_entropy(const DensityOperator& rho);
/// +infinity when ker sigma is not contained in ker rho.
double rel_entropy(const DensityOperator& rho, const DensityOperator& sigma);

/// Projector onto the eigenvalue >= 0 eigenspace of rho - sigma (eigenvalues
/// above -1e-12 count as nonnegative).
ComplexMatrix helstrom_projector(const DensityOperator& rho, const DensityOperator& sigma);

/// |Psi> = row-major vectorization of sqrt(sigma), a vector on H (x) H*.
PureState purify(const DensityOperator& sigma);

/// State on Y (x) X* whose marginals are sigma^T (on X*) and rho (on Y).
struct QuantumCoupling {
  DensityOperator state;  // shape [dimY, dimX]
  ComplexMatrix sigmaT;   // partial trace over Y
  ComplexMatrix rho;      // partial trace over X*

  std::size_t dim_y() const { return state.shape().dims.at(0); }
  std::size_t dim_x() const { return state.shape().dims.at(1); }

  /// Computes the marginals of `pi` on [dimY, dimX].
  static QuantumCoupling from_state(const ComplexMatrix& pi, std::size_t dimY, std::size_t dimX,
                                    double tol = kStateTol);
  /// rho (x) sigma^T.
  static QuantumCoupling product(const DensityOperator& sigma, const DensityOperator& rho);
};

/// (Phi (x) id)(|Psi><Psi|) for the canonical purification of sigma.
QuantumCoupling coupling_from_channel(const KrausChannel& phi, const DensityOperator& sigma);

struct ChannelFromCouplingOptions {
  bool pseudoInverse = false;
  double marginalTol = 1e-6;
};

struct RecoveredChannel {
  KrausChannel channel;
  bool pseudoInverseUsed = false;
};

/// Inverts the plan-coupling correspondence: B_i = sqrt(p_i) F_i sigma^{-1/2}.
RecoveredChannel channel_from_coupling(const QuantumCoupling& pi, const DensityOperator& sigma,
                                       ChannelFromCouplingOptions opts = {});

DensityOperator random_state(std::size_t dim, std::size_t rank, Rng& rng);
DensityOperator random_state(std::size_t dim, std::size_t rank, std::uint64_t seed);
KrausChannel random_channel(std::size_t dimIn, std::size_t dimOut, std::size_t krausRank, Rng& rng);
KrausChannel random_channel(std::size_t dimIn, std::size_t dimOut, std::size_t krausRank, std::uint64_t seed);
Observable random_observable(std::size_t dim, Rng& rng);
Observable random_observable(std::size_t dim, std::uint64_t seed);
/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
ComplexMatrix random_unitary(std::size_t dim, Rng& rng);

/// Pauli matrix for label I, X, Y or Z.
ComplexMatrix pauli(char which);

}  // namespace qot
