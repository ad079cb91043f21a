#include <doctest.h>

#include "support.hpp"

#include <qotkit/conic.hpp>
#include <qotkit/error.hpp>

#include <sstream>

using namespace qot;
using namespace qot::conic;

namespace {

// min x  s.t.  x - s = 1,  x, s >= 0
ConicProgram lp_at_least_one(double scale = 1.0) {
  ConicProgram p;
  const auto b = p.add_nonneg_block(2);
  p.objective[b].vec = {scale, 0.0};
  Constraint c;
  c.add_nonneg(b, 0, 1.0);
  c.add_nonneg(b, 1, -1.0);
  c.rhs = 1.0;
  p.constraints.push_back(c);
  p.finalize();
  return p;
}

// min <C, X>  s.t.  tr X = 1,  X PSD: the smallest eigenvalue of C.
ConicProgram min_eigenvalue(const RealMatrix& c) {
  ConicProgram p;
  const auto b = p.add_psd_block(c.rows());
  p.objective[b].psd = c;
  Constraint t;
  for (std::size_t i = 0; i < c.rows(); ++i) t.add(b, i, i, 1.0);
  t.rhs = 1.0;
  p.constraints.push_back(t);
  p.finalize();
  return p;
}

}  // namespace

TEST_CASE("LP with x >= 1") {
  const auto sol = solve(lp_at_least_one());
  REQUIRE(sol.optimal());
  CHECK(sol.objPrimal == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.primal[0].vec[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.gap <= 1e-7);
}

TEST_CASE("objective scaling scales the optimum") {
  const auto a = solve(lp_at_least_one(1.0));
  const auto b = solve(lp_at_least_one(10.0));
  REQUIRE(a.optimal());
  REQUIRE(b.optimal());
  CHECK(b.objPrimal == doctest::Approx(10.0 * a.objPrimal).epsilon(1e-7));
}

TEST_CASE("SDP smallest eigenvalue") {
  RealMatrix c(2, 2);
  c(0, 0) = 4.0;
  c(0, 1) = c(1, 0) = 1.0;
  c(1, 1) = 4.0;
  const auto sol = solve(min_eigenvalue(c));
  REQUIRE(sol.optimal());
  CHECK(sol.objPrimal == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(sol.objDual == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("SDP smallest eigenvalue matches eigh on random matrices") {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    RealMatrix c(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j <= i; ++j) c(i, j) = c(j, i) = rng.normal();
    const auto sol = solve(min_eigenvalue(c));
    REQUIRE(sol.optimal());
    CHECK(std::abs(sol.objPrimal - eigvalsh(c).front()) < 1e-7);
  }
}

TEST_CASE("Hermitian embedding of Pauli Y") {
  const RealMatrix e = embed_hermitian(pauli('Y'));
  const auto ev = eigvalsh(e);
  REQUIRE(ev.size() == 4);
  CHECK(ev[0] == doctest::Approx(-1.0));
  CHECK(ev[1] == doctest::Approx(-1.0));
  CHECK(ev[2] == doctest::Approx(1.0));
  CHECK(ev[3] == doctest::Approx(1.0));
  CHECK(max_abs_diff(extract_hermitian(e), pauli('Y')) < 1e-15);
}

TEST_CASE("complex SDP through the embedding") {
  // min tr(H X), tr X = 1 over 3x3 Hermitian PSD X.
  Rng rng(2);
  const ComplexMatrix h = testing::random_hermitian(3, rng);
  ConicProgram p;
  const auto b = p.add_hermitian_block(3);
  p.set_hermitian_objective(b, h);
  Constraint t;
  for (std::size_t i = 0; i < 3; ++i) t.add_hermitian_entry(b, 3, i, i, 1.0);
  t.rhs = 1.0;
  p.constraints.push_back(t);
  p.finalize();
  const auto sol = solve(p);
  REQUIRE(sol.optimal());
  CHECK(std::abs(sol.objPrimal - eigvalsh(h).front()) < 1e-7);
  const ComplexMatrix x = extract_hermitian(sol.primal[b].psd);
  CHECK(std::abs(x.trace() - 1.0) < 1e-7);
}

TEST_CASE("solves are deterministic") {
  RealMatrix c(3, 3);
  c(0, 0) = 1.0;
  c(1, 1) = 2.0;
  c(2, 2) = 0.5;
  c(0, 2) = c(2, 0) = 0.3;
  const auto p = min_eigenvalue(c);
  const auto a = solve(p);
  const auto b = solve(p);
  CHECK(a.objPrimal == b.objPrimal);
  CHECK(a.iterations == b.iterations);
  CHECK(a.primal[0].psd == b.primal[0].psd);
}

TEST_CASE("infeasible and unbounded programs") {
  SUBCASE("x = -1 with x >= 0") {
    ConicProgram p;
    const auto b = p.add_nonneg_block(1);
    p.objective[b].vec = {1.0};
    Constraint c;
    c.add_nonneg(b, 0, 1.0);
    c.rhs = -1.0;
    p.constraints.push_back(c);
    p.finalize();
    CHECK(solve(p).status == SolveStatus::PrimalInfeasible);
  }
  SUBCASE("min -x with x = y") {
    ConicProgram p;
    const auto b = p.add_nonneg_block(2);
    p.objective[b].vec = {-1.0, 0.0};
    Constraint c;
    c.add_nonneg(b, 0, 1.0);
    c.add_nonneg(b, 1, -1.0);
    c.rhs = 0.0;
    p.constraints.push_back(c);
    p.finalize();
    CHECK(solve(p).status == SolveStatus::DualInfeasible);
  }
}

TEST_CASE("program validation") {
  ConicProgram p;
  const auto b = p.add_psd_block(2);
  Constraint c;
  c.add(b, 0, 1, 1.0);
  c.rhs = 0.0;
  p.constraints.push_back(c);
  CHECK_THROWS_AS(p.finalize(), Error);

  ConicProgram q = lp_at_least_one();
  SolveOptions bad;
  bad.stepFraction = 1.5;
  CHECK_THROWS_AS(solve(q, bad), Error);
  CHECK_THROWS_AS(ConicProgram{}.add_psd_block(0), Error);
}

TEST_CASE("program text dump lists one constraint per line") {
  std::ostringstream os;
  write_program_text(os, lp_at_least_one());
  const std::string text = os.str();
  CHECK(text.find("blocks nonneg:2") != std::string::npos);
  CHECK(text.find("constraint 1 0:0,0,1 0:1,1,-1") != std::string::npos);
}
