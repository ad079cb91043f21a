#pragma once

// Dense complex/real matrices, Kronecker products, partial traces and
// Hermitian functional calculus.
//
// Tensor convention: factor 0 is the most significant (leftmost) digit of a
// row-major basis index, so kron(A, B)[(i,j),(k,l)] = A[i,k] * B[j,l] with
// composite index i * dimB + j. All partial-trace and lifting helpers use
// this ordering.

#include <qotkit/error.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qot {

using cplx = std::complex<double>;

inline double conj_of(double x) { return x; }
inline cplx conj_of(cplx z) { return std::conj(z); }
inline double abs2(double x) { return x * x; }
inline double abs2(cplx z) { return std::norm(z); }
inline double real_of(double x) { return x; }
inline double real_of(cplx z) { return z.real(); }

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  explicit Matrix(std::size_t dim) : Matrix(dim, dim) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(Errc::ShapeMismatch, "matrix data has wrong number of entries");
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  static Matrix diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = T(diag[i]);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  std::size_t dim() const {
    if (!is_square()) throw Error(Errc::ShapeMismatch, "matrix is not square");
    return rows_;
  }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  Matrix adjoint() const {
    Matrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = conj_of((*this)(i, j));
    return r;
  }

  Matrix transpose() const {
    Matrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  Matrix conjugate() const {
    Matrix r(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] = conj_of(data_[k]);
    return r;
  }

  T trace() const {
    T t{};
    for (std::size_t i = 0; i < dim(); ++i) t += (*this)(i, i);
    return t;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(T s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, T s) { return a *= s; }
  friend Matrix operator*(T s, Matrix a) { return a *= s; }
  friend Matrix operator-(Matrix a) { return a *= T(-1); }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw Error(Errc::ShapeMismatch, "matrix product dimension mismatch");
    Matrix r(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      T* out = &r.data_[i * b.cols_];
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T aik = a(i, k);
        if (aik == T{}) continue;
        const T* brow = &b.data_[k * b.cols_];
        for (std::size_t j = 0; j < b.cols_; ++j) out[j] += aik * brow[j];
      }
    }
    return r;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void check_same(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(Errc::ShapeMismatch, "matrix shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using ComplexMatrix = Matrix<cplx>;
using RealMatrix = Matrix<double>;
using ComplexVector = std::vector<cplx>;

/// Tensor-factor dimensions of a composite system; product equals the
/// annotated matrix dimension.
struct FactorShape {
  std::vector<std::size_t> dims;

  static FactorShape single(std::size_t d) { return FactorShape{{d}}; }
  static FactorShape qubits(std::size_t n) { return FactorShape{std::vector<std::size_t>(n, 2)}; }

  std::size_t total() const;
  std::size_t factors() const noexcept { return dims.size(); }
  bool all_qubits() const;
  /// Shape of the factors that remain after removing `traced`.
  FactorShape without(std::span<const std::size_t> traced) const;
  friend bool operator==(const FactorShape&, const FactorShape&) = default;
};

constexpr double kHermitianTol = 1e-9;

template <typename T>
double max_abs(const Matrix<T>& a) {
  double m = 0.0;
  for (const auto& x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

template <typename T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(Errc::ShapeMismatch, "matrix shapes differ");
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

template <typename T>
double frobenius(const Matrix<T>& a) {
  double s = 0.0;
  for (const auto& x : a.data()) s += abs2(x);
  return std::sqrt(s);
}

/// max |A - A^dagger| entry.
template <typename T>
double hermiticity_defect(const Matrix<T>& a) {
  if (!a.is_square()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - conj_of(a(j, i))));
  return m;
}

template <typename T>
bool is_hermitian(const Matrix<T>& a, double tol = kHermitianTol) {
  return a.is_square() && hermiticity_defect(a) <= tol;
}

/// (A + A^dagger) / 2, bit-exactly Hermitian.
template <typename T>
Matrix<T> hermitian_part(const Matrix<T>& a) {
  const std::size_t n = a.dim();
  Matrix<T> r(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    r(i, i) = T(real_of(a(i, i)));
    for (std::size_t j = i + 1; j < n; ++j) {
      const T v = (a(i, j) + conj_of(a(j, i))) * 0.5;
      r(i, j) = v;
      r(j, i) = conj_of(v);
    }
  }
  return r;
}

/// Re tr(A^dagger B), the real Hilbert-Schmidt pairing.
template <typename T>
double hs_inner(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(Errc::ShapeMismatch, "matrix shapes differ");
  double s = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) s += real_of(conj_of(a.data()[k]) * b.data()[k]);
  return s;
}

/// tr(A B) without forming the product.
cplx trace_product(const ComplexMatrix& a, const ComplexMatrix& b);

template <typename T>
struct HermitianEig {
  std::vector<double> values;  // ascending
  Matrix<T> vectors;           // eigenvectors as columns
};

/// Hermitian eigendecomposition via Householder tridiagonalization followed by
/// implicit QL. Throws NotHermitian when max |H - H^dagger| > 1e-9.
template <typename T>
HermitianEig<T> eigh(const Matrix<T>& h);

template <typename T>
std::vector<double> eigvalsh(const Matrix<T>& h);

/// V diag(values) V^dagger.
template <typename T>
Matrix<T> reconstruct(const HermitianEig<T>& eig, std::span<const double> values);

struct MatFuncOptions {
  /// Eigenvalues in [-1e-9, 0) are clamped to 0; below -1e-9 is an error.
  bool clamp_negative = false;
  double negative_tol = 1e-9;
};

/// Functional calculus f(H) = V diag(f(lambda)) V^dagger. Throws
/// NegativeEigenvalue (clamping mode) or DomainError when f is not finite.
ComplexMatrix matfunc(const ComplexMatrix& h, const std::function<double(double)>& f,
                      MatFuncOptions opts = {});

/// sqrt of a PSD matrix with negative clamping.
ComplexMatrix sqrtm_psd(const ComplexMatrix& h);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_all(std::span<const ComplexMatrix> factors);

/// Partial trace over the factor indices in `traced`; kept factors retain
/// their relative order.
ComplexMatrix partial_trace(const ComplexMatrix& a, const FactorShape& shape,
                            std::span<const std::size_t> traced);

/// Embeds `op`, acting on the listed factors (in the listed order), as
/// op (x) identity on the full composite system.
ComplexMatrix lift(const ComplexMatrix& op, const FactorShape& shape, std::span<const std::size_t> factors);

/// Reorders tensor factors: factor j of the result is factor perm[j] of `a`.
ComplexMatrix permute_factors(const ComplexMatrix& a, const FactorShape& shape,
                              std::span<const std::size_t> perm);

/// Entrywise transpose (no conjugation) in the computational basis.
ComplexMatrix transpose_op(const ComplexMatrix& a);

/// Trace norm tr|A|: eigenvalue sum for Hermitian input, singular values otherwise.
double schatten1(const ComplexMatrix& a);

/// Operator norm max |lambda| of a Hermitian matrix.
double opnorm(const ComplexMatrix& a);

/// Orthonormalizes the columns of `a` (modified Gram-Schmidt, two passes).
/// Throws DomainError when the columns are numerically dependent.
ComplexMatrix orthonormalize_columns(const ComplexMatrix& a);

ComplexMatrix outer(std::span<const cplx> u, std::span<const cplx> v);
ComplexVector matvec(const ComplexMatrix& a, std::span<const cplx> x);

}  // namespace qot
