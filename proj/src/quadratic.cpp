#include <qotkit/quadratic.hpp>

#include <cmath>

namespace qot::quad {

namespace {

double tr_real(const ComplexMatrix& a) { return a.trace().real(); }

void check_dims(const DensityOperator& sigma, const DensityOperator& rho, const QuadraticCost& cost) {
  if (sigma.dim() != cost.dim || rho.dim() != cost.dim)
    throw Error(Errc::DimensionMismatch, "states do not match the cost dimension");
}

// sum_i tr[R_i^2 s] - tr[R_i sqrt(s) R_i sqrt(s)]
double self_term(const DensityOperator& s, const QuadraticCost& cost) {
  const ComplexMatrix r = sqrtm_psd(s.mat());
  double acc = 0.0;
  for (const auto& obs : cost.observables) {
    const auto& R = obs.mat();
    acc += trace_product(R * R, s.mat()).real() - trace_product(R * r, R * r).real();
  }
  return acc;
}

std::vector<ComplexMatrix> hermitian_basis(std::size_t d) {
  std::vector<ComplexMatrix> basis;
  for (std::size_t a = 0; a < d; ++a) {
    ComplexMatrix e(d, d);
    e(a, a) = 1.0;
    basis.push_back(std::move(e));
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

}  // namespace

QuadraticCost cost_operator(const std::vector<Observable>& rs, std::size_t dim) {
  if (dim == 0) throw Error(Errc::InvalidArgument, "cost dimension must be positive");
  QuadraticCost c;
  c.dim = dim;
  c.observables = rs;
  const ComplexMatrix id = ComplexMatrix::identity(dim);
  ComplexMatrix total(dim * dim, dim * dim);
  for (const auto& r : rs) {
    if (r.dim() != dim) throw Error(Errc::DimensionMismatch, "cost observables have different dimensions");
    const ComplexMatrix t = kron(r.mat(), id) - kron(id, transpose_op(r.mat()));
    total += t * t;
  }
  c.costOp = Observable(hermitian_part(total), FactorShape{{dim, dim}});
  return c;
}

double coupling_cost(const QuadraticCost& cost, const ComplexMatrix& pi) {
  return trace_product(cost.costOp.mat(), pi).real();
}

namespace {

// Orthonormal basis of the support of a PSD matrix.
ComplexMatrix support_isometry(const ComplexMatrix& a) {
  const auto e = eigh(a);
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < e.values.size(); ++k)
    if (e.values[k] > 1e-12) keep.push_back(k);
  ComplexMatrix v(a.rows(), keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c)
    for (std::size_t r = 0; r < a.rows(); ++r) v(r, c) = e.vectors(r, keep[c]);
  return v;
}

ComplexMatrix compress(const ComplexMatrix& v, const ComplexMatrix& a) {
  ComplexMatrix c = hermitian_part(v.adjoint() * a * v);
  c *= cplx(1.0 / c.trace().real());
  return c;
}

// The coupling SDP restricted to supp(rho) (x) supp(sigma^T): every coupling
// lives there, and the restricted feasible set has an interior.
struct ReducedProgram {
  conic::ConicProgram program;
  ComplexMatrix embedding;  // V_rho (x) V_sigmaT, d^2 x (rY rX)
  std::size_t rY = 0, rX = 0;
};

ReducedProgram reduced_program(const DensityOperator& sigma, const DensityOperator& rho, const QuadraticCost& cost) {
  check_dims(sigma, rho, cost);
  ReducedProgram out;
  const ComplexMatrix sigmaT = transpose_op(sigma.mat());
  const ComplexMatrix vy = support_isometry(rho.mat());
  const ComplexMatrix vx = support_isometry(sigmaT);
  out.rY = vy.cols();
  out.rX = vx.cols();
  out.embedding = kron(vy, vx);
  const ComplexMatrix rhoR = compress(vy, rho.mat());
  const ComplexMatrix sigmaTR = compress(vx, sigmaT);
  const std::size_t dy = out.rY, dx = out.rX, n = dy * dx;

  conic::ConicProgram& p = out.program;
  const std::size_t blk = p.add_hermitian_block(n);
  p.set_hermitian_objective(blk, hermitian_part(out.embedding.adjoint() * cost.costOp.mat() * out.embedding));

  // <H (x) 1, pi> = tr[H rho] on Y.
  for (const auto& h : hermitian_basis(dy)) {
    conic::Constraint k;
    for (std::size_t a = 0; a < dy; ++a)
      for (std::size_t c = 0; c < dy; ++c) {
        if (h(a, c) == cplx{}) continue;
        for (std::size_t b = 0; b < dx; ++b) k.add_hermitian_entry(blk, n, a * dx + b, c * dx + b, h(a, c));
      }
    k.rhs = trace_product(h, rhoR).real();
    p.constraints.push_back(std::move(k));
  }
  // <1 (x) H, pi> = tr[H sigma^T] on X*; the identity direction repeats the
  // total-mass condition already fixed above, so diagonal elements are
  // replaced by traceless differences.
  const auto full = hermitian_basis(dx);
  std::vector<ComplexMatrix> starBasis;
  for (std::size_t a = 0; a + 1 < dx; ++a) {
    ComplexMatrix e(dx, dx);
    e(a, a) = 1.0;
    e(a + 1, a + 1) = -1.0;
    starBasis.push_back(std::move(e));
  }
  for (std::size_t k = dx; k < full.size(); ++k) starBasis.push_back(full[k]);
  for (const auto& h : starBasis) {
    conic::Constraint k;
    for (std::size_t b = 0; b < dx; ++b)
      for (std::size_t c = 0; c < dx; ++c) {
        if (h(b, c) == cplx{}) continue;
        for (std::size_t a = 0; a < dy; ++a) k.add_hermitian_entry(blk, n, a * dx + b, a * dx + c, h(b, c));
      }
    k.rhs = trace_product(h, sigmaTR).real();
    p.constraints.push_back(std::move(k));
  }
  p.finalize();
  return out;
}

}  // namespace

conic::ConicProgram dquad_program(const DensityOperator& sigma, const DensityOperator& rho, const QuadraticCost& cost) {
  return reduced_program(sigma, rho, cost).program;
}

QuadResult dquad(const DensityOperator& sigma, const DensityOperator& rho, const QuadraticCost& cost,
                 const conic::SolveOptions& opts) {
  check_dims(sigma, rho, cost);
  QuadResult r;
  auto product = [&] {
    r.coupling = QuantumCoupling::product(sigma, rho);
    r.valueSquared = coupling_cost(cost, r.coupling.state.mat());
    r.solver = {conic::SolveStatus::Optimal, 0.0, 0.0, 0};
    return r;
  };
  if (max_abs(cost.costOp.mat()) == 0.0) return product();
  auto red = reduced_program(sigma, rho, cost);
  // A pure marginal leaves the product as the only coupling.
  if (red.rY == 1 || red.rX == 1) return product();
  const auto sol = conic::solve(red.program, opts);
  if (!sol.optimal())
    throw Error(Errc::SolverFailure, "coupling SDP: " + std::string(conic::status_name(sol.status)));
  const ComplexMatrix piR = conic::extract_hermitian(sol.primal[0].psd);
  const ComplexMatrix pi = hermitian_part(red.embedding * piR * red.embedding.adjoint());
  r.coupling = QuantumCoupling::from_state(pi, cost.dim, cost.dim, 1e-7);
  r.valueSquared = coupling_cost(cost, r.coupling.state.mat());
  r.solver = conic::SolveSummary::of(sol);
  return r;
}

double plan_cost(const KrausChannel& phi, const DensityOperator& sigma, const DensityOperator& rho,
                 const QuadraticCost& cost) {
  check_dims(sigma, rho, cost);
  if (phi.dim_in() != cost.dim || phi.dim_out() != cost.dim)
    throw Error(Errc::DimensionMismatch, "plan dimensions do not match the cost");
  if (max_abs_diff(phi.apply(sigma.mat()), rho.mat()) > 1e-6)
    throw Error(Errc::NotATransportPlan, "plan does not map sigma to rho");
  const ComplexMatrix s = sqrtm_psd(sigma.mat());
  const KrausMap adj = adjoint_channel(phi);
  double acc = 0.0;
  for (const auto& obs : cost.observables) {
    const auto& R = obs.mat();
    const ComplexMatrix r2 = R * R;
    acc += trace_product(r2, sigma.mat()).real() + trace_product(r2, rho.mat()).real() -
           2.0 * tr_real(R * s * adj.apply(R) * s);
  }
  return acc;
}

double self_cost_identity(const DensityOperator& sigma, const QuadraticCost& cost) {
  if (sigma.dim() != cost.dim) throw Error(Errc::DimensionMismatch, "state does not match the cost dimension");
  return 2.0 * self_term(sigma, cost);
}

double dquad_lower_bound(const DensityOperator& sigma, const DensityOperator& rho, const QuadraticCost& cost) {
  check_dims(sigma, rho, cost);
  return self_term(sigma, cost) + self_term(rho, cost);
}

ComplexMatrix swap_transpose(const ComplexMatrix& pi, std::size_t d) {
  if (pi.rows() != d * d || !pi.is_square()) throw Error(Errc::ShapeMismatch, "coupling must be (d*d) x (d*d)");
  ComplexMatrix r(d * d, d * d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      for (std::size_t c = 0; c < d; ++c)
        for (std::size_t e = 0; e < d; ++e) r(a * d + b, c * d + e) = pi(e * d + c, b * d + a);
  return r;
}

LiebSides lieb_monotonicity(const KrausChannel& phi, const DensityOperator& sigma, const Observable& r) {
  if (phi.dim_in() != sigma.dim() || phi.dim_out() != r.dim())
    throw Error(Errc::DimensionMismatch, "channel, state and observable dimensions disagree");
  const ComplexMatrix rhoOut = hermitian_part(phi.apply(sigma.mat()));
  const ComplexMatrix sr = sqrtm_psd(rhoOut);
  const ComplexMatrix ss = sqrtm_psd(sigma.mat());
  const ComplexMatrix pr = adjoint_channel(phi).apply(r.mat());
  return {tr_real(pr * ss * pr * ss), tr_real(r.mat() * sr * r.mat() * sr)};
}

}  // namespace qot::quad
