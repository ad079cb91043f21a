#include <qotkit/classical_ot.hpp>

#include <algorithm>
#include <bit>
#include <cmath>

namespace qot::ot {

Distribution::Distribution(std::vector<double> probs) : p_(std::move(probs)) {
  if (p_.empty()) throw Error(Errc::InvalidArgument, "empty distribution");
  double sum = 0.0;
  for (auto& x : p_) {
    if (!std::isfinite(x)) throw Error(Errc::InvalidArgument, "non-finite probability");
    if (x < -1e-12) throw Error(Errc::InvalidArgument, "negative probability");
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(Errc::InvalidArgument, "probabilities do not sum to 1");
}

Distribution Distribution::uniform(std::size_t n) {
  return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Distribution Distribution::delta(std::size_t n, std::size_t at) {
  if (at >= n) throw Error(Errc::InvalidArgument, "delta position out of range");
  std::vector<double> p(n, 0.0);
  p[at] = 1.0;
  return Distribution(std::move(p));
}

void check_metric(const CostMatrix& d) {
  if (!d.is_square()) throw Error(Errc::NonMetricCost, "metric must be square");
  const std::size_t n = d.rows();
  for (std::size_t x = 0; x < n; ++x) {
    if (std::abs(d(x, x)) > 1e-9) throw Error(Errc::NonMetricCost, "nonzero diagonal");
    for (std::size_t y = 0; y < n; ++y) {
      if (!std::isfinite(d(x, y))) throw Error(Errc::NonMetricCost, "non-finite distance");
      if (std::abs(d(x, y) - d(y, x)) > 1e-9) throw Error(Errc::NonMetricCost, "asymmetric distance");
      if (x != y && d(x, y) < -1e-9) throw Error(Errc::NonMetricCost, "negative distance");
      for (std::size_t z = 0; z < n; ++z)
        if (d(x, z) > d(x, y) + d(y, z) + 1e-9) throw Error(Errc::NonMetricCost, "triangle inequality fails");
    }
  }
}

std::size_t hamming(std::size_t x, std::size_t y) { return static_cast<std::size_t>(std::popcount(x ^ y)); }

CostMatrix hamming_metric(std::size_t n) {
  const std::size_t size = std::size_t{1} << n;
  CostMatrix d(size, size);
  for (std::size_t x = 0; x < size; ++x)
    for (std::size_t y = 0; y < size; ++y) d(x, y) = static_cast<double>(hamming(x, y));
  return d;
}

std::size_t bits_for_size(std::size_t size) {
  if (size == 0 || !std::has_single_bit(size))
    throw Error(Errc::DimensionMismatch, "support size is not a power of two");
  return static_cast<std::size_t>(std::countr_zero(size));
}

conic::SolveOptions transport_solve_options() {
  conic::SolveOptions o;
  o.gapTol = 1e-11;
  o.feasTol = 1e-11;
  return o;
}

namespace {

struct TransportLp {
  conic::ConicProgram program;
  std::size_t n = 0, m = 0;
};

TransportLp build_lp(const Distribution& sigma, const Distribution& rho, const CostMatrix& c) {
  TransportLp lp;
  lp.n = sigma.size();
  lp.m = rho.size();
  if (c.rows() != lp.n || c.cols() != lp.m) throw Error(Errc::DimensionMismatch, "cost shape does not match marginals");
  auto& p = lp.program;
  const std::size_t b = p.add_nonneg_block(lp.n * lp.m);
  for (std::size_t x = 0; x < lp.n; ++x)
    for (std::size_t y = 0; y < lp.m; ++y) {
      if (!std::isfinite(c(x, y))) throw Error(Errc::InvalidArgument, "non-finite cost");
      p.objective[b].vec[x * lp.m + y] = c(x, y);
    }
  for (std::size_t x = 0; x < lp.n; ++x) {
    conic::Constraint k;
    for (std::size_t y = 0; y < lp.m; ++y) k.add_nonneg(b, x * lp.m + y, 1.0);
    k.rhs = sigma[x];
    p.constraints.push_back(std::move(k));
  }
  // The last column constraint is implied by the others and the total mass.
  for (std::size_t y = 0; y + 1 < lp.m; ++y) {
    conic::Constraint k;
    for (std::size_t x = 0; x < lp.n; ++x) k.add_nonneg(b, x * lp.m + y, 1.0);
    k.rhs = rho[y];
    p.constraints.push_back(std::move(k));
  }
  p.finalize();
  return lp;
}

conic::ConicSolution solve_lp(const TransportLp& lp) {
  auto sol = conic::solve(lp.program, transport_solve_options());
  if (!sol.optimal())
    throw Error(Errc::SolverFailure, "transport LP: " + std::string(conic::status_name(sol.status)));
  return sol;
}

}  // namespace

TransportResult kantorovich(const Distribution& sigma, const Distribution& rho, const CostMatrix& c) {
  const auto lp = build_lp(sigma, rho, c);
  const auto sol = solve_lp(lp);
  TransportResult r;
  r.plan = RealMatrix(lp.n, lp.m);
  for (std::size_t x = 0; x < lp.n; ++x)
    for (std::size_t y = 0; y < lp.m; ++y) r.plan(x, y) = std::max(0.0, sol.primal[0].vec[x * lp.m + y]);
  r.value = sol.objPrimal;
  r.solver = conic::SolveSummary::of(sol);
  return r;
}

DualResult dual_w1(const Distribution& sigma, const Distribution& rho, const CostMatrix& d) {
  check_metric(d);
  if (sigma.size() != rho.size() || d.rows() != sigma.size())
    throw Error(Errc::DimensionMismatch, "metric and distributions disagree in size");
  const auto lp = build_lp(sigma, rho, d);
  const auto sol = solve_lp(lp);
  const std::size_t n = lp.n;
  // Column multipliers g (the dropped column has g = 0); the c-transform
  // f(x) = min_y d(x,y) - g(y) is exactly 1-Lipschitz and dominates the row
  // multipliers, so its objective is at least the LP dual value.
  std::vector<double> g(n, 0.0);
  for (std::size_t y = 0; y + 1 < n; ++y) g[y] = sol.dualMultipliers[n + y];
  DualResult r;
  r.potential.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < n; ++y) best = std::min(best, d(x, y) - g[y]);
    r.potential[x] = best;
  }
  const double shift = *std::min_element(r.potential.begin(), r.potential.end());
  for (auto& f : r.potential) f -= shift;
  for (std::size_t x = 0; x < n; ++x) r.value += r.potential[x] * (sigma[x] - rho[x]);
  r.solver = conic::SolveSummary::of(sol);
  return r;
}

double wasserstein_p(const Distribution& sigma, const Distribution& rho, const CostMatrix& d, double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw Error(Errc::InvalidArgument, "order p must be positive");
  check_metric(d);
  CostMatrix c(d.rows(), d.cols());
  for (std::size_t x = 0; x < d.rows(); ++x)
    for (std::size_t y = 0; y < d.cols(); ++y) c(x, y) = x == y ? 0.0 : std::pow(std::max(d(x, y), 0.0), p);
  const double v = std::max(0.0, kantorovich(sigma, rho, c).value);
  return p >= 1.0 ? std::pow(v, 1.0 / p) : v;
}

namespace {
void same_size(const Distribution& a, const Distribution& b) {
  if (a.size() != b.size()) throw Error(Errc::DimensionMismatch, "distributions differ in size");
}
}  // namespace

double tv(const Distribution& sigma, const Distribution& rho) {
  same_size(sigma, rho);
  double s = 0.0;
  for (std::size_t x = 0; x < sigma.size(); ++x) s += std::abs(sigma[x] - rho[x]);
  return 0.5 * s;
}

double hellinger(const Distribution& sigma, const Distribution& rho) {
  same_size(sigma, rho);
  double s = 0.0;
  for (std::size_t x = 0; x < sigma.size(); ++x) {
    const double t = std::sqrt(sigma[x]) - std::sqrt(rho[x]);
    s += t * t;
  }
  return std::sqrt(std::min(1.0, 0.5 * s));
}

double kl(const Distribution& sigma, const Distribution& rho) {
  same_size(sigma, rho);
  double s = 0.0;
  for (std::size_t x = 0; x < sigma.size(); ++x) {
    if (sigma[x] == 0.0) continue;
    if (rho[x] == 0.0) return std::numeric_limits<double>::infinity();
    s += sigma[x] * std::log(sigma[x] / rho[x]);
  }
  return std::max(0.0, s);
}

TransportResult hamming_w1_full(const Distribution& p, const Distribution& q) {
  same_size(p, q);
  return kantorovich(p, q, hamming_metric(bits_for_size(p.size())));
}

double hamming_w1(const Distribution& p, const Distribution& q) { return hamming_w1_full(p, q).value; }

}  // namespace qot::ot
