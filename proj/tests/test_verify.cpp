#include <doctest.h>

#include <qotkit/error.hpp>
#include <qotkit/verify.hpp>

#include <cmath>

using namespace qot;
using namespace qot::verify;

namespace {

SuiteParams small(std::size_t trials, std::uint64_t seed) {
  SuiteParams p;
  p.n = 2;
  p.trials = trials;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.5) == doctest::Approx(std::log(2.0)));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(-0.1) == 0.0);
  CHECK(binary_entropy(0.2) == doctest::Approx(binary_entropy(0.8)));
}

TEST_CASE("every suite passes a short run") {
  for (const auto& name : suite_names()) {
    CAPTURE(name);
    const auto r = run_suite(name, small(6, 11));
    CHECK(r.passed());
    CHECK(r.trials == 6);
    CHECK_FALSE(r.rows.empty());
    CHECK(r.worstMargin <= 1e-6);
    for (const auto& s : r.solves) CHECK(s.gap <= 1e-7);
  }
}

TEST_CASE("reports are a function of the parameters") {
  const auto a = run_suite("pinsker", small(10, 5));
  const auto b = run_suite("pinsker", small(10, 5));
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].seed == b.rows[k].seed);
    CHECK(a.rows[k].lhs == b.rows[k].lhs);
    CHECK(a.rows[k].rhs == b.rows[k].rhs);
  }
  const auto c = run_suite("pinsker", small(10, 6));
  CHECK(c.rows.front().lhs != a.rows.front().lhs);
}

TEST_CASE("a scaled-down W1 is caught by the marton suite") {
  auto p = small(20, 3);
  p.w1.valueScale = 0.9;
  const auto r = run_suite("marton", p);
  CHECK_FALSE(r.passed());
  for (const auto& v : r.violations) {
    CHECK(v.margin > 0.0);
    CHECK(v.inputsDigest.size() == 16);
  }
}

TEST_CASE("a larger tolerance does not loosen the checks") {
  const auto base = run_suite("entropy", small(5, 9));
  auto p = small(5, 9);
  p.tol = 1.0;
  const auto loose = run_suite("entropy", p);
  CHECK(loose.violations.size() == base.violations.size());
  CHECK(loose.worstMargin == base.worstMargin);

  auto m = small(10, 3);
  m.w1.valueScale = 0.9;
  const auto strict = run_suite("marton", m);
  m.tol = 10.0;
  CHECK(run_suite("marton", m).violations.size() == strict.violations.size());
}

TEST_CASE("suite names and dispatch") {
  CHECK(suite_names().size() == 6);
  try {
    run_suite("nope", small(1, 1));
    FAIL("unknown suite accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidArgument);
  }
}

TEST_CASE("quadratic suite on a qutrit") {
  auto p = small(4, 2);
  p.dim = 3;
  const auto r = run_suite("quadratic", p);
  CHECK(r.passed());
  bool found = false;
  for (const auto& [k, v] : r.stats) found = found || k == "centered_triangle_failures";
  CHECK(found);
}
