#include <qotkit/matrix.hpp>

#include <algorithm>
#include <limits>
#include <numeric>

namespace qot {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::NegativeEigenvalue: return "NegativeEigenvalue";
    case Errc::DomainError: return "DomainError";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotAState: return "NotAState";
    case Errc::NotAChannel: return "NotAChannel";
    case Errc::NonMetricCost: return "NonMetricCost";
    case Errc::SingularSigma: return "SingularSigma";
    case Errc::MarginalMismatch: return "MarginalMismatch";
    case Errc::NotATransportPlan: return "NotATransportPlan";
    case Errc::SolverFailure: return "SolverFailure";
    case Errc::ConvergenceFailure: return "ConvergenceFailure";
  }
  return "Unknown";
}

std::size_t FactorShape::total() const {
  std::size_t t = 1;
  for (auto d : dims) {
    if (d == 0) throw Error(Errc::ShapeMismatch, "factor dimension must be positive");
    t *= d;
  }
  return t;
}

bool FactorShape::all_qubits() const {
  return !dims.empty() && std::all_of(dims.begin(), dims.end(), [](std::size_t d) { return d == 2; });
}

FactorShape FactorShape::without(std::span<const std::size_t> traced) const {
  FactorShape r;
  for (std::size_t f = 0; f < dims.size(); ++f) {
    if (std::find(traced.begin(), traced.end(), f) == traced.end()) r.dims.push_back(dims[f]);
  }
  return r;
}

cplx trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols()) throw Error(Errc::ShapeMismatch, "trace_product shapes");
  cplx s{};
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, i);
  return s;
}

namespace {

template <typename T>
T unit_phase(T x) {
  const double m = std::abs(x);
  return m == 0.0 ? T(1) : x / m;
}

// Reduces Hermitian `a` in place to real symmetric tridiagonal form
// (diag, sub) with a = q * T * q^dagger.
template <typename T>
void tridiagonalize(Matrix<T>& a, Matrix<T>& q, std::vector<double>& diag, std::vector<double>& sub) {
  const std::size_t n = a.rows();
  q = Matrix<T>::identity(n);
  std::vector<T> v(n), p(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;  // length of the column below the diagonal
    double tail = 0.0;
    for (std::size_t j = 1; j < m; ++j) tail += abs2(a(k + 1 + j, k));
    if (tail == 0.0) continue;
    const T x0 = a(k + 1, k);
    const double norm = std::sqrt(tail + abs2(x0));
    const T alpha = -unit_phase(x0) * norm;
    for (std::size_t j = 0; j < m; ++j) v[j] = a(k + 1 + j, k);
    v[0] -= alpha;
    double vn = 0.0;
    for (std::size_t j = 0; j < m; ++j) vn += abs2(v[j]);
    vn = std::sqrt(vn);
    if (vn == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) v[j] /= vn;

    a(k + 1, k) = alpha;
    a(k, k + 1) = conj_of(alpha);
    for (std::size_t j = 1; j < m; ++j) {
      a(k + 1 + j, k) = T{};
      a(k, k + 1 + j) = T{};
    }
    // Trailing block S <- H S H with H = I - 2 v v^dagger.
    for (std::size_t i = 0; i < m; ++i) {
      T s{};
      for (std::size_t j = 0; j < m; ++j) s += a(k + 1 + i, k + 1 + j) * v[j];
      p[i] = s;
    }
    double kk = 0.0;
    for (std::size_t i = 0; i < m; ++i) kk += real_of(conj_of(v[i]) * p[i]);
    for (std::size_t i = 0; i < m; ++i) p[i] -= kk * v[i];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        a(k + 1 + i, k + 1 + j) -= 2.0 * (v[i] * conj_of(p[j]) + p[i] * conj_of(v[j]));
    for (std::size_t r = 0; r < n; ++r) {
      T s{};
      for (std::size_t j = 0; j < m; ++j) s += q(r, k + 1 + j) * v[j];
      for (std::size_t j = 0; j < m; ++j) q(r, k + 1 + j) -= 2.0 * s * conj_of(v[j]);
    }
  }
  diag.assign(n, 0.0);
  sub.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i] = real_of(a(i, i));
  // Rotate off-diagonal phases into q so T is real with non-negative sub-diagonal.
  T phase = T(1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const T e = a(i + 1, i);
    sub[i] = std::abs(e);
    phase = phase * unit_phase(e);
    for (std::size_t r = 0; r < n; ++r) q(r, i + 1) *= phase;
  }
}

// Implicit QL on a real symmetric tridiagonal matrix, accumulating the
// rotations into the columns of v. sub[i] couples i and i+1.
template <typename T>
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, Matrix<T>& v) {
  const std::size_t n = d.size();
  if (n == 0) return;
  e[n - 1] = 0.0;
  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 100) throw Error(Errc::ConvergenceFailure, "tridiagonal QL did not converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          for (std::size_t k = 0; k < v.rows(); ++k) {
            const T hk = v(k, ii + 1);
            v(k, ii + 1) = s * v(k, ii) + c * hk;
            v(k, ii) = c * v(k, ii) - s * hk;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

template <typename T>
HermitianEig<T> eigh(const Matrix<T>& h) {
  if (!h.is_square()) throw Error(Errc::ShapeMismatch, "eigh requires a square matrix");
  if (hermiticity_defect(h) > kHermitianTol) throw Error(Errc::NotHermitian, "eigh input is not Hermitian");
  const std::size_t n = h.rows();
  Matrix<T> a = hermitian_part(h);
  HermitianEig<T> out;
  std::vector<double> sub;
  tridiagonalize(a, out.vectors, out.values, sub);
  tridiagonal_ql(out.values, sub, out.vectors);
  // Ascending order; selection sort keeps the permutation deterministic.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t k = i;
    for (std::size_t j = i + 1; j < n; ++j)
      if (out.values[j] < out.values[k]) k = j;
    if (k != i) {
      std::swap(out.values[i], out.values[k]);
      for (std::size_t r = 0; r < n; ++r) std::swap(out.vectors(r, i), out.vectors(r, k));
    }
  }
  return out;
}

template <typename T>
std::vector<double> eigvalsh(const Matrix<T>& h) {
  return eigh(h).values;
}

template <typename T>
Matrix<T> reconstruct(const HermitianEig<T>& eig, std::span<const double> values) {
  const std::size_t n = eig.vectors.rows();
  Matrix<T> r(n, n);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double lam = values[k];
    if (lam == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const T vik = eig.vectors(i, k) * lam;
      for (std::size_t j = 0; j < n; ++j) r(i, j) += vik * conj_of(eig.vectors(j, k));
    }
  }
  return r;
}

template HermitianEig<double> eigh(const Matrix<double>&);
template HermitianEig<cplx> eigh(const Matrix<cplx>&);
template std::vector<double> eigvalsh(const Matrix<double>&);
template std::vector<double> eigvalsh(const Matrix<cplx>&);
template Matrix<double> reconstruct(const HermitianEig<double>&, std::span<const double>);
template Matrix<cplx> reconstruct(const HermitianEig<cplx>&, std::span<const double>);

ComplexMatrix matfunc(const ComplexMatrix& h, const std::function<double(double)>& f, MatFuncOptions opts) {
  auto eig = eigh(h);
  std::vector<double> fv(eig.values.size());
  for (std::size_t k = 0; k < fv.size(); ++k) {
    double lam = eig.values[k];
    if (opts.clamp_negative && lam < 0.0) {
      if (lam < -opts.negative_tol) throw Error(Errc::NegativeEigenvalue, "eigenvalue below clamping tolerance");
      lam = 0.0;
    }
    fv[k] = f(lam);
    if (!std::isfinite(fv[k])) throw Error(Errc::DomainError, "function undefined at an eigenvalue");
  }
  return hermitian_part(reconstruct(eig, fv));
}

ComplexMatrix sqrtm_psd(const ComplexMatrix& h) {
  return matfunc(h, [](double x) { return std::sqrt(x); }, MatFuncOptions{true});
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx{}) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return r;
}

ComplexMatrix kron_all(std::span<const ComplexMatrix> factors) {
  ComplexMatrix r = ComplexMatrix::identity(1);
  for (const auto& f : factors) r = kron(r, f);
  return r;
}

namespace {

std::vector<std::size_t> strides_of(const FactorShape& shape) {
  std::vector<std::size_t> s(shape.dims.size());
  std::size_t acc = 1;
  for (std::size_t f = shape.dims.size(); f-- > 0;) {
    s[f] = acc;
    acc *= shape.dims[f];
  }
  return s;
}

// Offsets into the full index for every multi-index over `factors`, with the
// listed factors as digits in the listed order.
std::vector<std::size_t> offsets_for(const FactorShape& shape, std::span<const std::size_t> factors) {
  const auto strides = strides_of(shape);
  std::vector<std::size_t> out{0};
  for (auto f : factors) {
    std::vector<std::size_t> next;
    next.reserve(out.size() * shape.dims[f]);
    for (auto base : out)
      for (std::size_t digit = 0; digit < shape.dims[f]; ++digit) next.push_back(base + digit * strides[f]);
    out = std::move(next);
  }
  return out;
}

void check_factor_set(const FactorShape& shape, std::span<const std::size_t> set) {
  std::vector<bool> seen(shape.dims.size(), false);
  for (auto f : set) {
    if (f >= shape.dims.size()) throw Error(Errc::ShapeMismatch, "factor index out of range");
    if (seen[f]) throw Error(Errc::ShapeMismatch, "duplicate factor index");
    seen[f] = true;
  }
}

std::vector<std::size_t> complement(const FactorShape& shape, std::span<const std::size_t> set) {
  std::vector<std::size_t> rest;
  for (std::size_t f = 0; f < shape.dims.size(); ++f)
    if (std::find(set.begin(), set.end(), f) == set.end()) rest.push_back(f);
  return rest;
}

}  // namespace

ComplexMatrix partial_trace(const ComplexMatrix& a, const FactorShape& shape, std::span<const std::size_t> traced) {
  if (!a.is_square() || shape.total() != a.rows())
    throw Error(Errc::ShapeMismatch, "factor shape does not match matrix dimension");
  check_factor_set(shape, traced);
  const auto kept = complement(shape, traced);
  const auto keptOff = offsets_for(shape, kept);
  const auto trOff = offsets_for(shape, traced);
  ComplexMatrix r(keptOff.size(), keptOff.size());
  for (std::size_t i = 0; i < keptOff.size(); ++i)
    for (std::size_t j = 0; j < keptOff.size(); ++j) {
      cplx s{};
      for (auto t : trOff) s += a(keptOff[i] + t, keptOff[j] + t);
      r(i, j) = s;
    }
  return r;
}

ComplexMatrix lift(const ComplexMatrix& op, const FactorShape& shape, std::span<const std::size_t> factors) {
  check_factor_set(shape, factors);
  const auto opOff = offsets_for(shape, factors);
  if (!op.is_square() || op.rows() != opOff.size())
    throw Error(Errc::ShapeMismatch, "operator dimension does not match the listed factors");
  const auto rest = complement(shape, factors);
  const auto restOff = offsets_for(shape, rest);
  const std::size_t n = shape.total();
  ComplexMatrix r(n, n);
  for (std::size_t i = 0; i < opOff.size(); ++i)
    for (std::size_t j = 0; j < opOff.size(); ++j) {
      const cplx v = op(i, j);
      if (v == cplx{}) continue;
      for (auto t : restOff) r(opOff[i] + t, opOff[j] + t) = v;
    }
  return r;
}

ComplexMatrix permute_factors(const ComplexMatrix& a, const FactorShape& shape, std::span<const std::size_t> perm) {
  if (perm.size() != shape.dims.size()) throw Error(Errc::ShapeMismatch, "permutation length");
  check_factor_set(shape, perm);
  if (!a.is_square() || a.rows() != shape.total()) throw Error(Errc::ShapeMismatch, "shape/matrix mismatch");
  // old index of each new basis element
  const auto oldOff = offsets_for(shape, perm);
  const std::size_t n = a.rows();
  ComplexMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(i, j) = a(oldOff[i], oldOff[j]);
  return r;
}

ComplexMatrix transpose_op(const ComplexMatrix& a) { return a.transpose(); }

double schatten1(const ComplexMatrix& a) {
  double s = 0.0;
  if (is_hermitian(a)) {
    for (double lam : eigvalsh(a)) s += std::abs(lam);
    return s;
  }
  for (double lam : eigvalsh(hermitian_part(a.adjoint() * a))) s += std::sqrt(std::max(lam, 0.0));
  return s;
}

double opnorm(const ComplexMatrix& a) {
  if (!is_hermitian(a)) throw Error(Errc::NotHermitian, "opnorm expects a Hermitian matrix");
  const auto v = eigvalsh(a);
  if (v.empty()) return 0.0;
  return std::max(std::abs(v.front()), std::abs(v.back()));
}

ComplexMatrix orthonormalize_columns(const ComplexMatrix& a) {
  ComplexMatrix q = a;
  const std::size_t rows = q.rows();
  for (std::size_t j = 0; j < q.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        cplx dot{};
        for (std::size_t i = 0; i < rows; ++i) dot += std::conj(q(i, k)) * q(i, j);
        for (std::size_t i = 0; i < rows; ++i) q(i, j) -= dot * q(i, k);
      }
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) nrm += std::norm(q(i, j));
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) throw Error(Errc::DomainError, "columns are numerically dependent");
    for (std::size_t i = 0; i < rows; ++i) q(i, j) /= nrm;
  }
  return q;
}

ComplexMatrix outer(std::span<const cplx> u, std::span<const cplx> v) {
  ComplexMatrix r(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) r(i, j) = u[i] * std::conj(v[j]);
  return r;
}

ComplexVector matvec(const ComplexMatrix& a, std::span<const cplx> x) {
  if (a.cols() != x.size()) throw Error(Errc::ShapeMismatch, "matvec dimension mismatch");
  ComplexVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx s{};
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

}  // namespace qot
