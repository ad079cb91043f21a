#include <qotkit/quantum.hpp>

#include <algorithm>
#include <cmath>

namespace qot {

namespace {

FactorShape checked_shape(const ComplexMatrix& m, FactorShape shape) {
  if (!m.is_square()) throw Error(Errc::ShapeMismatch, "operator must be square");
  if (shape.dims.empty()) shape = FactorShape::single(m.rows());
  if (shape.total() != m.rows()) throw Error(Errc::ShapeMismatch, "factor dimensions do not multiply to the matrix dimension");
  return shape;
}

void same_dim(const DensityOperator& a, const DensityOperator& b) {
  if (a.dim() != b.dim()) throw Error(Errc::DimensionMismatch, "states have different dimensions");
}

}  // namespace

DensityOperator::DensityOperator(const ComplexMatrix& mat, double tol) : DensityOperator(mat, FactorShape{}, tol) {}

DensityOperator::DensityOperator(const ComplexMatrix& mat, FactorShape shape, double tol) {
  shape_ = checked_shape(mat, std::move(shape));
  if (mat.rows() == 0) throw Error(Errc::NotAState, "empty state");
  if (!is_hermitian(mat, std::max(tol, kHermitianTol))) throw Error(Errc::NotHermitian, "state is not Hermitian");
  mat_ = hermitian_part(mat);
  const double tr = mat_.trace().real();
  if (std::abs(tr - 1.0) > tol) throw Error(Errc::NotAState, "state trace is not 1");
  const auto ev = eigvalsh(mat_);
  if (ev.front() < -tol) throw Error(Errc::NotAState, "state has a negative eigenvalue");
}

DensityOperator DensityOperator::with_shape(FactorShape shape) const {
  DensityOperator r = *this;
  r.shape_ = checked_shape(mat_, std::move(shape));
  return r;
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
  return DensityOperator(ComplexMatrix::identity(dim) * cplx(1.0 / static_cast<double>(dim)));
}

DensityOperator DensityOperator::pure(std::span<const cplx> psi) {
  double norm = 0.0;
  for (auto z : psi) norm += std::norm(z);
  if (std::abs(norm - 1.0) > 1e-9) throw Error(Errc::NotAState, "pure state vector is not normalized");
  return DensityOperator(outer(psi, psi));
}

DensityOperator DensityOperator::basis_state(std::size_t n, std::size_t x) {
  const std::size_t d = std::size_t{1} << n;
  if (x >= d) throw Error(Errc::InvalidArgument, "basis index out of range");
  ComplexMatrix m(d, d);
  m(x, x) = 1.0;
  return DensityOperator(m, FactorShape::qubits(n));
}

DensityOperator DensityOperator::diagonal(std::span<const double> probs, FactorShape shape) {
  return DensityOperator(ComplexMatrix::diagonal(probs), std::move(shape));
}

Observable::Observable(const ComplexMatrix& mat) : Observable(mat, FactorShape{}) {}

Observable::Observable(const ComplexMatrix& mat, FactorShape shape) {
  shape_ = checked_shape(mat, std::move(shape));
  if (!is_hermitian(mat)) throw Error(Errc::NotHermitian, "observable is not Hermitian");
  mat_ = hermitian_part(mat);
}

Observable Observable::with_shape(FactorShape shape) const {
  Observable r = *this;
  r.shape_ = checked_shape(mat_, std::move(shape));
  return r;
}

ComplexMatrix KrausMap::apply(const ComplexMatrix& a) const {
  if (a.rows() != dimIn || a.cols() != dimIn) throw Error(Errc::DimensionMismatch, "map input dimension");
  ComplexMatrix r(dimOut, dimOut);
  for (const auto& k : kraus) r += k * a * k.adjoint();
  return r;
}

KrausChannel::KrausChannel(std::size_t dimIn, std::size_t dimOut, std::vector<ComplexMatrix> kraus, double tol) {
  if (dimIn == 0 || dimOut == 0) throw Error(Errc::NotAChannel, "channel dimensions must be positive");
  if (kraus.empty()) throw Error(Errc::NotAChannel, "channel needs at least one Kraus operator");
  if (kraus.size() > dimIn * dimOut) throw Error(Errc::NotAChannel, "more Kraus operators than dimIn * dimOut");
  ComplexMatrix sum(dimIn, dimIn);
  for (const auto& k : kraus) {
    if (k.rows() != dimOut || k.cols() != dimIn) throw Error(Errc::NotAChannel, "Kraus operator has the wrong shape");
    sum += k.adjoint() * k;
  }
  if (max_abs_diff(sum, ComplexMatrix::identity(dimIn)) > tol)
    throw Error(Errc::NotAChannel, "Kraus operators are not trace preserving");
  map_ = {dimIn, dimOut, std::move(kraus)};
}

ComplexMatrix KrausChannel::apply(const ComplexMatrix& a) const { return map_.apply(a); }

DensityOperator KrausChannel::apply(const DensityOperator& rho) const {
  FactorShape shape = dim_in() == dim_out() ? rho.shape() : FactorShape::single(dim_out());
  return DensityOperator(hermitian_part(map_.apply(rho.mat())), std::move(shape), 1e-8);
}

KrausChannel KrausChannel::identity(std::size_t dim) { return KrausChannel(dim, dim, {ComplexMatrix::identity(dim)}); }

KrausChannel KrausChannel::unitary(const ComplexMatrix& u) {
  const std::size_t d = u.dim();
  return KrausChannel(d, d, {u});
}

KrausChannel KrausChannel::constant(const DensityOperator& rho0, std::size_t dimIn) {
  const std::size_t dOut = rho0.dim();
  const auto e = eigh(rho0.mat());
  std::vector<ComplexMatrix> ks;
  for (std::size_t k = 0; k < dOut; ++k) {
    const double lam = e.values[k];
    if (lam <= 1e-15) continue;
    const double s = std::sqrt(lam);
    for (std::size_t j = 0; j < dimIn; ++j) {
      ComplexMatrix b(dOut, dimIn);
      for (std::size_t i = 0; i < dOut; ++i) b(i, j) = s * e.vectors(i, k);
      ks.push_back(std::move(b));
    }
  }
  return KrausChannel(dimIn, dOut, std::move(ks));
}

KrausChannel KrausChannel::local(const KrausChannel& local, const FactorShape& shape,
                                 std::span<const std::size_t> factors) {
  if (local.dim_in() != local.dim_out()) throw Error(Errc::DimensionMismatch, "local channel must preserve dimension");
  std::vector<ComplexMatrix> ks;
  for (const auto& b : local.kraus()) ks.push_back(lift(b, shape, factors));
  const std::size_t d = shape.total();
  return KrausChannel(d, d, std::move(ks));
}

ComplexMatrix apply_channel(const KrausChannel& phi, const ComplexMatrix& a) { return phi.apply(a); }

KrausMap adjoint_channel(const KrausChannel& phi) {
  KrausMap m{phi.dim_out(), phi.dim_in(), {}};
  for (const auto& b : phi.kraus()) m.kraus.push_back(b.adjoint());
  return m;
}

double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  same_dim(rho, sigma);
  return std::clamp(0.5 * schatten1(rho.mat() - sigma.mat()), 0.0, 1.0);
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  same_dim(rho, sigma);
  const ComplexMatrix sr = sqrtm_psd(rho.mat());
  double s = 0.0;
  for (double lam : eigvalsh(hermitian_part(sr * sigma.mat() * sr))) s += std::sqrt(std::max(lam, 0.0));
  return s * s;
}

double vn_entropy(const DensityOperator& rho) {
  double s = 0.0;
  for (double lam : eigvalsh(rho.mat()))
    if (lam > 1e-12) s -= lam * std::log(lam);
  return std::max(0.0, s);
}

double rel_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
  same_dim(rho, sigma);
  const auto es = eigh(sigma.mat());
  const std::size_t d = rho.dim();
  double cross = 0.0;  // tr rho ln sigma on the support of sigma
  double kernelWeight = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double w = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      cplx acc{};
      for (std::size_t j = 0; j < d; ++j) acc += rho.mat()(i, j) * es.vectors(j, k);
      w += (std::conj(es.vectors(i, k)) * acc).real();
    }
    if (es.values[k] < 1e-10)
      kernelWeight += w;
    else
      cross += w * std::log(es.values[k]);
  }
  if (kernelWeight > 1e-10) return std::numeric_limits<double>::infinity();
  return std::max(0.0, -vn_entropy(rho) - cross);
}

ComplexMatrix helstrom_projector(const DensityOperator& rho, const DensityOperator& sigma) {
  same_dim(rho, sigma);
  const auto e = eigh(rho.mat() - sigma.mat());
  std::vector<double> mask(e.values.size());
  for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = e.values[k] > -1e-12 ? 1.0 : 0.0;
  return reconstruct(e, mask);
}

PureState purify(const DensityOperator& sigma) {
  const ComplexMatrix r = sqrtm_psd(sigma.mat());
  PureState p;
  p.vec.assign(r.data().begin(), r.data().end());
  p.shape = FactorShape{{sigma.dim(), sigma.dim()}};
  return p;
}

QuantumCoupling QuantumCoupling::from_state(const ComplexMatrix& pi, std::size_t dimY, std::size_t dimX, double tol) {
  QuantumCoupling c;
  const FactorShape shape{{dimY, dimX}};
  c.state = DensityOperator(pi, shape, tol);
  const std::size_t trY[] = {0};
  const std::size_t trX[] = {1};
  c.sigmaT = partial_trace(c.state.mat(), shape, trY);
  c.rho = partial_trace(c.state.mat(), shape, trX);
  return c;
}

QuantumCoupling QuantumCoupling::product(const DensityOperator& sigma, const DensityOperator& rho) {
  return from_state(kron(rho.mat(), transpose_op(sigma.mat())), rho.dim(), sigma.dim());
}

QuantumCoupling coupling_from_channel(const KrausChannel& phi, const DensityOperator& sigma) {
  if (phi.dim_in() != sigma.dim()) throw Error(Errc::DimensionMismatch, "channel input does not match the state");
  const ComplexMatrix r = sqrtm_psd(sigma.mat());
  const std::size_t n = phi.dim_out() * sigma.dim();
  ComplexMatrix pi(n, n);
  for (const auto& b : phi.kraus()) {
    const ComplexMatrix m = b * r;
    pi += outer(m.data(), m.data());
  }
  return QuantumCoupling::from_state(hermitian_part(pi), phi.dim_out(), sigma.dim(), 1e-8);
}

RecoveredChannel channel_from_coupling(const QuantumCoupling& pi, const DensityOperator& sigma,
                                       ChannelFromCouplingOptions opts) {
  const std::size_t dx = pi.dim_x(), dy = pi.dim_y();
  if (dx != sigma.dim()) throw Error(Errc::DimensionMismatch, "coupling does not match the state");
  const ComplexMatrix sigmaTilde = transpose_op(pi.sigmaT);
  if (max_abs_diff(sigmaTilde, sigma.mat()) > opts.marginalTol)
    throw Error(Errc::MarginalMismatch, "coupling marginal differs from sigma^T");
  if (eigvalsh(sigma.mat()).front() <= 1e-8 && !opts.pseudoInverse)
    throw Error(Errc::SingularSigma, "sigma is singular; enable pseudo-inverse mode");

  // The exact X* marginal makes the recovered family trace preserving.
  const auto es = eigh(hermitian_part(sigmaTilde));
  std::vector<double> inv(dx);
  std::vector<std::size_t> kernel;
  for (std::size_t k = 0; k < dx; ++k) {
    if (es.values[k] < 1e-8) {
      inv[k] = 0.0;
      kernel.push_back(k);
    } else {
      inv[k] = 1.0 / std::sqrt(es.values[k]);
    }
  }
  const ComplexMatrix invSqrt = reconstruct(es, inv);

  const auto ep = eigh(pi.state.mat());
  const double pmax = std::max(ep.values.back(), 0.0);
  std::vector<ComplexMatrix> ks;
  for (std::size_t i = 0; i < ep.values.size(); ++i) {
    const double p = ep.values[i];
    if (p <= 1e-14 * std::max(pmax, 1.0)) continue;
    ComplexMatrix f(dy, dx);
    for (std::size_t a = 0; a < dy; ++a)
      for (std::size_t b = 0; b < dx; ++b) f(a, b) = ep.vectors(a * dx + b, i);
    ks.push_back(f * invSqrt * cplx(std::sqrt(p)));
  }

  RecoveredChannel out;
  if (!kernel.empty()) {
    // Completion off the support of sigma: map ker sigma onto the top
    // eigenvector of the output marginal.
    out.pseudoInverseUsed = true;
    const auto er = eigh(pi.rho);
    for (std::size_t k : kernel) {
      ComplexMatrix b(dy, dx);
      for (std::size_t a = 0; a < dy; ++a)
        for (std::size_t c = 0; c < dx; ++c) b(a, c) = er.vectors(a, dy - 1) * std::conj(es.vectors(c, k));
      ks.push_back(std::move(b));
    }
  }
  // Drop numerically negligible operators, keeping the count within dimIn * dimOut.
  std::stable_sort(ks.begin(), ks.end(),
                   [](const ComplexMatrix& a, const ComplexMatrix& b) { return frobenius(a) > frobenius(b); });
  if (ks.size() > dx * dy) ks.resize(dx * dy);
  out.channel = KrausChannel(dx, dy, std::move(ks), 1e-7);
  return out;
}

DensityOperator random_state(std::size_t dim, std::size_t rank, Rng& rng) {
  if (dim == 0 || rank == 0 || rank > dim) throw Error(Errc::InvalidArgument, "rank must lie in [1, dim]");
  const ComplexMatrix g = rng.ginibre(dim, rank);
  ComplexMatrix m = g * g.adjoint();
  m *= cplx(1.0 / m.trace().real());
  return DensityOperator(hermitian_part(m));
}

DensityOperator random_state(std::size_t dim, std::size_t rank, std::uint64_t seed) {
  Rng rng(seed);
  return random_state(dim, rank, rng);
}

KrausChannel random_channel(std::size_t dimIn, std::size_t dimOut, std::size_t krausRank, Rng& rng) {
  if (dimIn == 0 || dimOut == 0 || krausRank == 0 || krausRank > dimIn * dimOut || krausRank * dimOut < dimIn)
    throw Error(Errc::InvalidArgument, "Kraus rank must satisfy dimIn <= rank * dimOut and rank <= dimIn * dimOut");
  const ComplexMatrix v = orthonormalize_columns(rng.ginibre(krausRank * dimOut, dimIn));
  std::vector<ComplexMatrix> ks;
  for (std::size_t k = 0; k < krausRank; ++k) {
    ComplexMatrix b(dimOut, dimIn);
    for (std::size_t i = 0; i < dimOut; ++i)
      for (std::size_t j = 0; j < dimIn; ++j) b(i, j) = v(k * dimOut + i, j);
    ks.push_back(std::move(b));
  }
  return KrausChannel(dimIn, dimOut, std::move(ks));
}

KrausChannel random_channel(std::size_t dimIn, std::size_t dimOut, std::size_t krausRank, std::uint64_t seed) {
  Rng rng(seed);
  return random_channel(dimIn, dimOut, krausRank, rng);
}

Observable random_observable(std::size_t dim, Rng& rng) {
  if (dim == 0) throw Error(Errc::InvalidArgument, "dimension must be positive");
  const ComplexMatrix g = rng.ginibre(dim, dim);
  return Observable(hermitian_part(g));
}

Observable random_observable(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  return random_observable(dim, rng);
}

ComplexMatrix random_unitary(std::size_t dim, Rng& rng) { return orthonormalize_columns(rng.ginibre(dim, dim)); }

ComplexMatrix pauli(char which) {
  ComplexMatrix m(2, 2);
  switch (which) {
    case 'I': m(0, 0) = 1; m(1, 1) = 1; break;
    case 'X': m(0, 1) = 1; m(1, 0) = 1; break;
    case 'Y': m(0, 1) = cplx(0, -1); m(1, 0) = cplx(0, 1); break;
    case 'Z': m(0, 0) = 1; m(1, 1) = -1; break;
    default: throw Error(Errc::InvalidArgument, "unknown Pauli label");
  }
  return m;
}

}  // namespace qot
