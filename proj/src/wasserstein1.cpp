#include <qotkit/wasserstein1.hpp>

#include <algorithm>
#include <bit>
#include <cmath>

namespace qot::w1 {

namespace {

std::vector<ComplexMatrix> hermitian_basis(std::size_t d, bool tracelessDiagonal) {
  std::vector<ComplexMatrix> basis;
  if (tracelessDiagonal) {
    for (std::size_t a = 0; a + 1 < d; ++a) {
      ComplexMatrix e(d, d);
      e(a, a) = 1.0;
      e(a + 1, a + 1) = -1.0;
      basis.push_back(std::move(e));
    }
  } else {
    for (std::size_t a = 0; a < d; ++a) {
      ComplexMatrix e(d, d);
      e(a, a) = 1.0;
      basis.push_back(std::move(e));
    }
  }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) {
      ComplexMatrix s(d, d), t(d, d);
      s(a, b) = 1.0;
      s(b, a) = 1.0;
      t(a, b) = cplx(0, -1);
      t(b, a) = cplx(0, 1);
      basis.push_back(std::move(s));
      basis.push_back(std::move(t));
    }
  return basis;
}

std::vector<std::size_t> other_sites(std::size_t n, std::size_t site) {
  std::vector<std::size_t> rest;
  for (std::size_t j = 0; j < n; ++j)
    if (j != site) rest.push_back(j);
  return rest;
}

void add_coefficient(conic::Constraint& k, std::size_t block, const ComplexMatrix& h, double sign) {
  const std::size_t d = h.rows();
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      if (h(r, c) != cplx{}) k.add_hermitian_entry(block, d, r, c, sign * h(r, c));
}

SiteTerm jordan_term(const ComplexMatrix& x) {
  SiteTerm t;
  t.x = hermitian_part(x);
  const auto e = eigh(t.x);
  std::vector<double> pos(e.values.size()), neg(e.values.size());
  double trPos = 0.0, trNeg = 0.0;
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    pos[k] = std::max(e.values[k], 0.0);
    neg[k] = std::max(-e.values[k], 0.0);
    trPos += pos[k];
    trNeg += neg[k];
  }
  t.weight = 0.5 * (trPos + trNeg);
  const std::size_t d = x.rows();
  if (trPos > 0.0)
    t.plus = reconstruct(e, pos) * cplx(1.0 / trPos);
  else
    t.plus = ComplexMatrix(d, d);
  if (trNeg > 0.0)
    t.minus = reconstruct(e, neg) * cplx(1.0 / trNeg);
  else
    t.minus = ComplexMatrix(d, d);
  return t;
}

conic::ConicSolution solve_checked(const conic::ConicProgram& p, const conic::SolveOptions& o, const char* what) {
  auto sol = conic::solve(p, o);
  if (!sol.optimal())
    throw Error(Errc::SolverFailure, std::string(what) + ": " + std::string(conic::status_name(sol.status)));
  return sol;
}

std::size_t checked_pair(const DensityOperator& rho, const DensityOperator& sigma, std::size_t maxQubits) {
  const std::size_t n = qubit_count(rho.shape(), maxQubits);
  if (!(rho.shape() == sigma.shape())) throw Error(Errc::ShapeMismatch, "states have different shapes");
  return n;
}

}  // namespace

std::size_t qubit_count(const FactorShape& shape, std::size_t maxQubits) {
  if (shape.dims.empty() || !shape.all_qubits())
    throw Error(Errc::ShapeMismatch, "expected an all-qubit shape [2, ..., 2]");
  const std::size_t n = shape.factors();
  if (n > maxQubits) throw Error(Errc::InvalidArgument, "number of qubits exceeds the configured maximum");
  return n;
}

conic::ConicProgram w1_program(const DensityOperator& rho, const DensityOperator& sigma) {
  const std::size_t n = checked_pair(rho, sigma, 64);
  const std::size_t d = rho.dim();
  const FactorShape& shape = rho.shape();
  conic::ConicProgram p;
  const ComplexMatrix half = ComplexMatrix::identity(d) * cplx(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    for (int s = 0; s < 2; ++s) {
      const std::size_t b = p.add_hermitian_block(d);
      p.set_hermitian_objective(b, half);
    }
  }
  const ComplexMatrix diff = rho.mat() - sigma.mat();
  // sum_i (P_i - N_i) = rho - sigma; the trace direction is implied by the
  // partial-trace constraints below.
  for (const auto& h : hermitian_basis(d, true)) {
    conic::Constraint k;
    for (std::size_t i = 0; i < n; ++i) {
      add_coefficient(k, 2 * i, h, 1.0);
      add_coefficient(k, 2 * i + 1, h, -1.0);
    }
    k.rhs = trace_product(h, diff).real();
    p.constraints.push_back(std::move(k));
  }
  // tr_i (P_i - N_i) = 0 tested against a basis of operators on the rest.
  const auto restBasis = hermitian_basis(d / 2, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto rest = other_sites(n, i);
    for (const auto& kOp : restBasis) {
      const ComplexMatrix m = lift(kOp, shape, rest);
      conic::Constraint k;
      add_coefficient(k, 2 * i, m, 1.0);
      add_coefficient(k, 2 * i + 1, m, -1.0);
      k.rhs = 0.0;
      p.constraints.push_back(std::move(k));
    }
  }
  p.finalize();
  return p;
}

namespace {

struct W1Solve {
  conic::ConicSolution sol;
  std::size_t n = 0;
};

W1Solve solve_w1(const DensityOperator& rho, const DensityOperator& sigma, const W1Options& opts) {
  W1Solve s;
  s.n = checked_pair(rho, sigma, opts.maxQubits);
  s.sol = solve_checked(w1_program(rho, sigma), opts.solver, "W1 SDP");
  return s;
}

}  // namespace

W1Result w1(const DensityOperator& rho, const DensityOperator& sigma, const W1Options& opts) {
  const auto s = solve_w1(rho, sigma, opts);
  W1Result r;
  for (std::size_t i = 0; i < s.n; ++i) {
    const ComplexMatrix x =
        conic::extract_hermitian(s.sol.primal[2 * i].psd) - conic::extract_hermitian(s.sol.primal[2 * i + 1].psd);
    r.decomposition.push_back(jordan_term(x));
    r.value += r.decomposition.back().weight;
  }
  r.value *= opts.valueScale;
  r.solver = conic::SolveSummary::of(s.sol);
  return r;
}

DualW1Result w1_dual(const DensityOperator& rho, const DensityOperator& sigma, const W1Options& opts) {
  const auto s = solve_w1(rho, sigma, opts);
  const std::size_t d = rho.dim();
  const auto basis = hermitian_basis(d, true);
  ComplexMatrix a(d, d);
  const auto& y = s.sol.dualMultipliers;
  for (std::size_t k = 0; k < basis.size(); ++k) a += basis[k] * cplx(y[k]);
  a = hermitian_part(a);
  const cplx shift = a.trace() / static_cast<double>(d);
  for (std::size_t k = 0; k < d; ++k) a(k, k) -= shift;

  DualW1Result r;
  const auto restBasis = hermitian_basis(d / 2, false);
  std::size_t offset = basis.size();
  for (std::size_t i = 0; i < s.n; ++i) {
    ComplexMatrix b(d / 2, d / 2);
    for (std::size_t k = 0; k < restBasis.size(); ++k) b += restBasis[k] * cplx(-y[offset + k]);
    offset += restBasis.size();
    r.siteShifts.push_back(hermitian_part(b));
  }
  r.witness = Observable(a, rho.shape());
  r.value = trace_product(a, rho.mat() - sigma.mat()).real();
  r.solver = conic::SolveSummary::of(s.sol);
  return r;
}

SiteLipschitz site_lipschitz(const Observable& a, std::size_t site, const W1Options& opts) {
  const std::size_t n = qubit_count(a.shape(), opts.maxQubits);
  if (site >= n) throw Error(Errc::InvalidArgument, "site index out of range");
  const std::size_t d = a.dim();
  const auto rest = other_sites(n, site);
  conic::ConicProgram p;
  const std::size_t bp = p.add_hermitian_block(d);
  const std::size_t bm = p.add_hermitian_block(d);
  p.set_hermitian_objective(bp, a.mat() * cplx(-1.0));
  p.set_hermitian_objective(bm, a.mat());
  {
    conic::Constraint k;
    const ComplexMatrix id = ComplexMatrix::identity(d);
    add_coefficient(k, bp, id, -1.0);
    add_coefficient(k, bm, id, -1.0);
    k.rhs = -1.0;
    p.constraints.push_back(std::move(k));
  }
  const auto restBasis = hermitian_basis(d / 2, false);
  std::vector<ComplexMatrix> lifted;
  for (const auto& kOp : restBasis) {
    lifted.push_back(lift(kOp, a.shape(), rest));
    conic::Constraint k;
    add_coefficient(k, bp, lifted.back(), -1.0);
    add_coefficient(k, bm, lifted.back(), 1.0);
    k.rhs = 0.0;
    p.constraints.push_back(std::move(k));
  }
  p.finalize();
  const auto sol = solve_checked(p, opts.solver, "Lipschitz SDP");
  ComplexMatrix b(d / 2, d / 2);
  for (std::size_t k = 0; k < restBasis.size(); ++k) b += restBasis[k] * cplx(sol.dualMultipliers[1 + k]);
  SiteLipschitz out;
  out.minimizer = hermitian_part(b);
  out.t = opnorm(hermitian_part(a.mat() - lift(out.minimizer, a.shape(), rest)));
  out.solver = conic::SolveSummary::of(sol);
  return out;
}

LipschitzResult lipschitz(const Observable& a, const W1Options& opts) {
  const std::size_t n = qubit_count(a.shape(), opts.maxQubits);
  LipschitzResult r;
  double tmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.perSite.push_back(site_lipschitz(a, i, opts));
    r.solver.push_back(r.perSite.back().solver);
    tmax = std::max(tmax, r.perSite.back().t);
  }
  r.value = 2.0 * tmax;
  return r;
}

ComplexMatrix replace_with_maximally_mixed(const ComplexMatrix& rho, const FactorShape& shape,
                                           std::span<const std::size_t> sites) {
  if (sites.empty()) return rho;
  const ComplexMatrix t = partial_trace(rho, shape, sites);
  std::vector<std::size_t> rest;
  double scale = 1.0;
  for (std::size_t j = 0; j < shape.factors(); ++j) {
    if (std::find(sites.begin(), sites.end(), j) == sites.end())
      rest.push_back(j);
    else
      scale *= static_cast<double>(shape.dims[j]);
  }
  return lift(t, shape, rest) * cplx(1.0 / scale);
}

std::vector<SiteTerm> telescoping_decomposition(const DensityOperator& rho, const DensityOperator& sigma,
                                                std::span<const std::size_t> sites) {
  const std::size_t n = checked_pair(rho, sigma, 64);
  const FactorShape& shape = rho.shape();
  if (max_abs_diff(partial_trace(rho.mat(), shape, sites), partial_trace(sigma.mat(), shape, sites)) > 1e-7)
    throw Error(Errc::MarginalMismatch, "states differ outside the listed qubits");
  const std::size_t d = rho.dim();
  std::vector<SiteTerm> terms(n);
  for (auto& t : terms) {
    t.x = ComplexMatrix(d, d);
    t.plus = ComplexMatrix(d, d);
    t.minus = ComplexMatrix(d, d);
  }
  ComplexMatrix rPrev = rho.mat(), sPrev = sigma.mat();
  for (std::size_t j = 0; j < sites.size(); ++j) {
    const auto prefix = sites.subspan(0, j + 1);
    const ComplexMatrix rNext = replace_with_maximally_mixed(rho.mat(), shape, prefix);
    const ComplexMatrix sNext = replace_with_maximally_mixed(sigma.mat(), shape, prefix);
    terms[sites[j]] = jordan_term((rPrev - rNext) - (sPrev - sNext));
    rPrev = rNext;
    sPrev = sNext;
  }
  return terms;
}

BoundCheck neighbor_bound(const DensityOperator& rho, const DensityOperator& sigma, std::size_t site,
                          const W1Options& opts) {
  const std::size_t n = checked_pair(rho, sigma, opts.maxQubits);
  if (site >= n) throw Error(Errc::InvalidArgument, "site index out of range");
  const std::size_t traced[] = {site};
  if (max_abs_diff(partial_trace(rho.mat(), rho.shape(), traced), partial_trace(sigma.mat(), sigma.shape(), traced)) >
      1e-7)
    throw Error(Errc::MarginalMismatch, "states differ after tracing out the site");
  BoundCheck c;
  c.bound = 1.0;
  c.value = w1(rho, sigma, opts).value;
  c.feasibleCost = trace_distance(rho, sigma);
  c.holds = c.value <= c.bound + 1e-6;
  return c;
}

BoundCheck local_channel_bound(const KrausChannel& localPhi, std::span<const std::size_t> sites,
                               const DensityOperator& rho, const W1Options& opts) {
  qubit_count(rho.shape(), opts.maxQubits);
  BoundCheck c;
  c.bound = 2.0 * static_cast<double>(sites.size());
  if (sites.empty()) {
    c.holds = true;
    return c;
  }
  const KrausChannel full = KrausChannel::local(localPhi, rho.shape(), sites);
  const DensityOperator out(hermitian_part(full.apply(rho.mat())), rho.shape(), 1e-8);
  c.value = w1(rho, out, opts).value;
  for (const auto& t : telescoping_decomposition(rho, out, sites)) c.feasibleCost += t.weight;
  c.holds = c.value <= c.bound + 1e-6 && c.feasibleCost <= c.bound + 1e-9;
  return c;
}

ContractionEstimate contraction_lower_bound(const KrausChannel& phi, std::size_t trials, std::uint64_t seed,
                                            const W1Options& opts) {
  auto bits = [](std::size_t d) {
    if (d < 2 || !std::has_single_bit(d)) throw Error(Errc::ShapeMismatch, "channel must act between qubit systems");
    return static_cast<std::size_t>(std::countr_zero(d));
  };
  const std::size_t nIn = bits(phi.dim_in()), nOut = bits(phi.dim_out());
  const FactorShape inShape = FactorShape::qubits(nIn), outShape = FactorShape::qubits(nOut);
  ContractionEstimate est;
  est.upper = static_cast<double>(nOut);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, t);
    const DensityOperator rho = random_state(phi.dim_in(), phi.dim_in(), rng).with_shape(inShape);
    DensityOperator sigma;
    if (t % 2 == 0) {
      sigma = random_state(phi.dim_in(), phi.dim_in(), rng).with_shape(inShape);
    } else {
      const std::size_t site[] = {rng.index(nIn)};
      const KrausChannel loc = KrausChannel::local(random_channel(2, 2, 2, rng), inShape, site);
      sigma = DensityOperator(hermitian_part(loc.apply(rho.mat())), inShape, 1e-8);
    }
    const double din = w1(rho, sigma, opts).value;
    if (din < 1e-7) continue;
    const DensityOperator a(hermitian_part(phi.apply(rho.mat())), outShape, 1e-8);
    const DensityOperator b(hermitian_part(phi.apply(sigma.mat())), outShape, 1e-8);
    const double dout = w1(a, b, opts).value;
    est.lower = std::max(est.lower, dout / din);
    ++est.pairs;
  }
  return est;
}

}  // namespace qot::w1
