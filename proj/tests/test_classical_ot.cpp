#include <doctest.h>

#include <qotkit/classical_ot.hpp>
#include <qotkit/error.hpp>
#include <qotkit/random.hpp>

#include <cmath>

using namespace qot;
using namespace qot::ot;

namespace {

Distribution random_distribution(std::size_t n, Rng& rng) {
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& x : p) {
    x = -std::log(1.0 - rng.uniform());
    s += x;
  }
  for (auto& x : p) x /= s;
  return Distribution(p);
}

// The 2x2 transport polytope is the segment pi = [[t, a-t], [b-t, 1-a-b+t]];
// a linear cost attains its minimum at one of the two endpoints.
double brute_force_2x2(double a, double b, const RealMatrix& c) {
  const double lo = std::max(0.0, a + b - 1.0), hi = std::min(a, b);
  auto cost = [&](double t) {
    return c(0, 0) * t + c(0, 1) * (a - t) + c(1, 0) * (b - t) + c(1, 1) * (1.0 - a - b + t);
  };
  return std::min(cost(lo), cost(hi));
}

}  // namespace

TEST_CASE("uniform against a point mass on three bits") {
  const auto u = Distribution::uniform(8);
  const auto d = Distribution::delta(8, 0);
  CHECK(std::abs(hamming_w1(u, d) - 1.5) < 1e-9);
}

TEST_CASE("basis strings 000 and 011") {
  CHECK(std::abs(hamming_w1(Distribution::delta(8, 0), Distribution::delta(8, 3)) - 2.0) < 1e-9);
  CHECK(hamming(0b000, 0b011) == 2);
  CHECK(hamming(0b101, 0b010) == 3);
}

TEST_CASE("Kantorovich matches vertex enumeration on 2x2 instances") {
  Rng rng(44);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double a = rng.uniform(), b = rng.uniform();
    RealMatrix c(2, 2);
    for (auto& x : c.data()) x = rng.uniform(0.0, 3.0);
    const auto r = kantorovich(Distribution({a, 1 - a}), Distribution({b, 1 - b}), c);
    worst = std::max(worst, std::abs(r.value - brute_force_2x2(a, b, c)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("transport plans have the prescribed marginals") {
  Rng rng(7);
  const auto s = random_distribution(5, rng), r = random_distribution(4, rng);
  RealMatrix c(5, 4);
  for (auto& x : c.data()) x = rng.uniform();
  const auto res = kantorovich(s, r, c);
  for (std::size_t i = 0; i < 5; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(res.plan(i, j) >= -1e-9);
      row += res.plan(i, j);
    }
    CHECK(std::abs(row - s[i]) < 1e-8);
  }
  for (std::size_t j = 0; j < 4; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < 5; ++i) col += res.plan(i, j);
    CHECK(std::abs(col - r[j]) < 1e-8);
  }
}

TEST_CASE("dual potential is 1-Lipschitz and attains the primal value") {
  Rng rng(17);
  const auto d = hamming_metric(3);
  for (int t = 0; t < 10; ++t) {
    const auto s = random_distribution(8, rng), r = random_distribution(8, rng);
    const auto dual = dual_w1(s, r, d);
    CHECK(std::abs(dual.value - hamming_w1(s, r)) < 1e-8);
    for (std::size_t x = 0; x < 8; ++x)
      for (std::size_t y = 0; y < 8; ++y) CHECK(dual.potential[x] - dual.potential[y] <= d(x, y) + 1e-9);
  }
}

TEST_CASE("divergences on simple pairs") {
  const Distribution a({1.0, 0.0}), b({0.5, 0.5});
  CHECK(tv(a, b) == doctest::Approx(0.5));
  CHECK(hellinger(a, b) == doctest::Approx(std::sqrt(0.5 * ((1 - std::sqrt(0.5)) * (1 - std::sqrt(0.5)) + 0.5))));
  CHECK(kl(a, b) == doctest::Approx(std::log(2.0)));
  CHECK(std::isinf(kl(b, a)));
  CHECK(tv(a, a) == 0.0);
}

TEST_CASE("Wasserstein with small exponent approaches total variation") {
  Rng rng(3);
  const auto d = hamming_metric(2);
  for (int t = 0; t < 5; ++t) {
    const auto s = random_distribution(4, rng), r = random_distribution(4, rng);
    CHECK(std::abs(wasserstein_p(s, r, d, 1e-7) - tv(s, r)) < 1e-5);
    CHECK(wasserstein_p(s, r, d, 1.0) == doctest::Approx(hamming_w1(s, r)).epsilon(1e-7));
    // Monotone in p for p >= 1 on a metric with unit minimum distance.
    CHECK(wasserstein_p(s, r, d, 2.0) >= wasserstein_p(s, r, d, 1.0) - 1e-8);
  }
}

TEST_CASE("W1 dominates total variation on Hamming space") {
  Rng rng(19);
  for (int t = 0; t < 20; ++t) {
    const auto s = random_distribution(8, rng), r = random_distribution(8, rng);
    const double w = hamming_w1(s, r);
    CHECK(w >= tv(s, r) - 1e-8);
    CHECK(w <= 3.0 * tv(s, r) + 1e-8);
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(Distribution({0.5, 0.6}), Error);
  CHECK_THROWS_AS(Distribution({1.5, -0.5}), Error);
  RealMatrix bad(3, 3);
  bad(0, 1) = bad(1, 0) = 1.0;
  bad(1, 2) = bad(2, 1) = 1.0;
  bad(0, 2) = bad(2, 0) = 3.0;
  try {
    check_metric(bad);
    FAIL("triangle violation accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonMetricCost);
  }
  CHECK_THROWS_AS(bits_for_size(6), Error);
  CHECK(bits_for_size(8) == 3);
  CHECK_THROWS_AS(kantorovich(Distribution::uniform(2), Distribution::uniform(3), RealMatrix(2, 2)), Error);
}
