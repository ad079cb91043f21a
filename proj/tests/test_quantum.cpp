#include <doctest.h>

#include "support.hpp"

#include <qotkit/error.hpp>
#include <qotkit/quantum.hpp>

#include <cmath>

using namespace qot;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

ComplexMatrix marginal(const ComplexMatrix& pi, std::size_t dy, std::size_t dx, std::size_t traced) {
  const std::size_t t[] = {traced};
  return partial_trace(pi, FactorShape{{dy, dx}}, t);
}

}  // namespace

TEST_CASE("state validation") {
  ComplexMatrix neg(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK(code_of([&] { DensityOperator{neg}; }) == Errc::NotAState);
  ComplexMatrix nh(2, 2);
  nh(0, 0) = 1.0;
  nh(0, 1) = 0.5;
  CHECK(code_of([&] { DensityOperator{nh}; }) == Errc::NotHermitian);
  ComplexMatrix heavy = ComplexMatrix::identity(2);
  CHECK(code_of([&] { DensityOperator{heavy}; }) == Errc::NotAState);
  CHECK(code_of([&] { DensityOperator(ComplexMatrix::identity(4) * cplx(0.25), FactorShape{{2, 3}}); }) ==
        Errc::ShapeMismatch);
  CHECK_NOTHROW(DensityOperator::maximally_mixed(3));
}

TEST_CASE("purification of the maximally mixed qubit is the Bell vector") {
  const auto psi = purify(DensityOperator::maximally_mixed(2));
  REQUIRE(psi.vec.size() == 4);
  const double h = 1.0 / std::sqrt(2.0);
  const cplx want[] = {h, 0.0, 0.0, h};
  // Global phase from the first nonzero entry.
  const cplx phase = psi.vec[0] / std::abs(psi.vec[0]);
  double dev = 0.0;
  for (std::size_t k = 0; k < 4; ++k) dev = std::max(dev, std::abs(psi.vec[k] - phase * want[k]));
  CHECK(dev <= 1e-9);
  CHECK(psi.shape.dims == std::vector<std::size_t>{2, 2});
}

TEST_CASE("purification marginals on random and rank-deficient states") {
  Rng rng(27);
  for (std::size_t d : {2u, 4u}) {
    for (std::size_t rank = 1; rank <= d; ++rank) {
      const auto sigma = random_state(d, rank, rng);
      const auto psi = purify(sigma);
      const ComplexMatrix p = psi.projector();
      CHECK(max_abs_diff(marginal(p, d, d, 1), sigma.mat()) <= 1e-8);
      CHECK(max_abs_diff(marginal(p, d, d, 0), transpose_op(sigma.mat())) <= 1e-8);
    }
  }
}

TEST_CASE("distances and entropies") {
  const auto z0 = DensityOperator::basis_state(1, 0);
  const auto z1 = DensityOperator::basis_state(1, 1);
  CHECK(trace_distance(z0, z1) == doctest::Approx(1.0));
  CHECK(fidelity(z0, z0) == doctest::Approx(1.0));
  CHECK(fidelity(z0, z1) == doctest::Approx(0.0));
  CHECK(vn_entropy(DensityOperator::maximally_mixed(4)) == doctest::Approx(std::log(4.0)));
  CHECK(vn_entropy(z0) == doctest::Approx(0.0));
  CHECK(std::isinf(rel_entropy(DensityOperator::maximally_mixed(2), z0)));
  CHECK(rel_entropy(z0, DensityOperator::maximally_mixed(2)) == doctest::Approx(std::log(2.0)));

  Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_state(3, 3, rng), b = random_state(3, 3, rng);
    CHECK(rel_entropy(a, a) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(rel_entropy(a, b) >= -1e-12);
    CHECK(trace_distance(a, b) <= std::sqrt(1.0 - fidelity(a, b)) + 1e-10);
  }
}

TEST_CASE("Helstrom projector attains the trace distance") {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_state(4, 4, rng), b = random_state(4, 4, rng);
    const ComplexMatrix p = helstrom_projector(a, b);
    CHECK(max_abs_diff(p * p, p) < 1e-10);
    CHECK(trace_product(p, a.mat() - b.mat()).real() == doctest::Approx(trace_distance(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("channels") {
  ComplexMatrix k(2, 2);
  k(0, 0) = 1.0;
  CHECK(code_of([&] { KrausChannel(2, 2, {k}); }) == Errc::NotAChannel);

  Rng rng(14);
  const auto rho = random_state(2, 2, rng);
  CHECK(max_abs_diff(KrausChannel::identity(2).apply(rho.mat()), rho.mat()) < 1e-15);
  const auto c0 = KrausChannel::constant(DensityOperator::basis_state(1, 1), 3);
  CHECK(max_abs_diff(c0.apply(random_state(3, 3, rng).mat()), DensityOperator::basis_state(1, 1).mat()) < 1e-14);

  const auto phi = random_channel(3, 2, 3, rng);
  const auto out = phi.apply(random_state(3, 3, rng));
  CHECK(out.dim() == 2);
  CHECK(std::abs(out.mat().trace() - 1.0) < 1e-12);

  // Adjoint: tr[A Phi(X)] = tr[Phi^+(A) X].
  const ComplexMatrix a = testing::random_hermitian(2, rng);
  const ComplexMatrix x = testing::random_hermitian(3, rng);
  CHECK(std::abs(trace_product(a, phi.apply(x)) - trace_product(adjoint_channel(phi).apply(a), x)) < 1e-12);
  CHECK(max_abs_diff(adjoint_channel(phi).apply(ComplexMatrix::identity(2)), ComplexMatrix::identity(3)) < 1e-12);

  // A local channel on the second qubit leaves the first marginal alone.
  const auto shape = FactorShape::qubits(2);
  const std::size_t site[] = {1};
  const auto loc = KrausChannel::local(random_channel(2, 2, 2, rng), shape, site);
  const auto r2 = testing::qubit_state(2, rng);
  const ComplexMatrix after = loc.apply(r2.mat());
  CHECK(max_abs_diff(partial_trace(after, shape, site), partial_trace(r2.mat(), shape, site)) < 1e-12);
}

TEST_CASE("coupling of a channel has the right marginals") {
  Rng rng(41);
  for (int t = 0; t < 10; ++t) {
    const auto sigma = random_state(3, 3, rng);
    const auto phi = random_channel(3, 2, 2, rng);
    const auto pi = coupling_from_channel(phi, sigma);
    CHECK(pi.dim_y() == 2);
    CHECK(pi.dim_x() == 3);
    CHECK(max_abs_diff(pi.sigmaT, transpose_op(sigma.mat())) < 1e-10);
    CHECK(max_abs_diff(pi.rho, phi.apply(sigma.mat())) < 1e-10);
    CHECK(max_abs_diff(marginal(pi.state.mat(), 2, 3, 1), pi.rho) < 1e-12);
  }
  const auto prod = QuantumCoupling::product(DensityOperator::basis_state(1, 0), DensityOperator::maximally_mixed(2));
  CHECK(max_abs_diff(prod.rho, DensityOperator::maximally_mixed(2).mat()) < 1e-15);
}

TEST_CASE("channel to coupling round trip on full-rank sigma") {
  Rng rng(55);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 2 + t % 3;
    const auto sigma = random_state(d, d, rng);
    const auto phi = random_channel(d, d, 1 + rng.index(d), rng);
    const auto rec = channel_from_coupling(coupling_from_channel(phi, sigma), sigma);
    CHECK_FALSE(rec.pseudoInverseUsed);
    const auto back = coupling_from_channel(rec.channel, sigma);
    CHECK(max_abs_diff(back.state.mat(), coupling_from_channel(phi, sigma).state.mat()) <= 1e-6);
    const ComplexMatrix x = testing::random_hermitian(d, rng);
    CHECK(max_abs_diff(rec.channel.apply(x), phi.apply(x)) <= 1e-6);
  }
}

TEST_CASE("rank-deficient sigma needs the pseudo-inverse") {
  Rng rng(60);
  const auto sigma = random_state(3, 2, rng);
  const auto phi = random_channel(3, 3, 2, rng);
  const auto pi = coupling_from_channel(phi, sigma);
  CHECK(code_of([&] { channel_from_coupling(pi, sigma); }) == Errc::SingularSigma);
  ChannelFromCouplingOptions opts;
  opts.pseudoInverse = true;
  const auto rec = channel_from_coupling(pi, sigma, opts);
  CHECK(rec.pseudoInverseUsed);
  CHECK(max_abs_diff(rec.channel.apply(sigma.mat()), phi.apply(sigma.mat())) <= 1e-6);
  CHECK(max_abs_diff(coupling_from_channel(rec.channel, sigma).state.mat(), pi.state.mat()) <= 1e-6);
}

TEST_CASE("coupling with the wrong marginal is rejected") {
  Rng rng(61);
  const auto sigma = random_state(2, 2, rng);
  const auto other = random_state(2, 2, rng);
  const auto pi = coupling_from_channel(KrausChannel::identity(2), other);
  CHECK(code_of([&] { channel_from_coupling(pi, sigma); }) == Errc::MarginalMismatch);
}

TEST_CASE("random generators are seeded") {
  CHECK(random_state(4, 4, 9).mat() == random_state(4, 4, 9).mat());
  CHECK_FALSE(random_state(4, 4, 9).mat() == random_state(4, 4, 10).mat());
  Rng rng(1);
  const ComplexMatrix u = random_unitary(4, rng);
  CHECK(max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(4)) < 1e-12);
  CHECK(random_state(4, 1, 3).mat().rows() == 4);
  CHECK(eigvalsh(random_state(4, 1, 3).mat())[2] < 1e-12);
}
