#include <qotkit/conic.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <tuple>

namespace qot::conic {

std::string_view status_name(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
    case SolveStatus::DualInfeasible: return "DualInfeasible";
    case SolveStatus::IterLimit: return "IterLimit";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

void Constraint::add_hermitian_entry(std::size_t block, std::size_t dim, std::size_t r, std::size_t c, cplx v) {
  const double re = 0.5 * v.real();
  const double im = 0.5 * v.imag();
  if (re != 0.0) {
    add(block, r, c, re);
    add(block, dim + r, dim + c, re);
  }
  if (im != 0.0) {
    add(block, r, dim + c, -im);
    add(block, dim + r, c, im);
  }
}

std::size_t ConicProgram::add_psd_block(std::size_t size) {
  if (size == 0) throw Error(Errc::InvalidArgument, "empty PSD block");
  blocks.push_back({BlockKind::Psd, size});
  objective.push_back({RealMatrix(size, size), {}});
  return blocks.size() - 1;
}

std::size_t ConicProgram::add_nonneg_block(std::size_t length) {
  if (length == 0) throw Error(Errc::InvalidArgument, "empty orthant block");
  blocks.push_back({BlockKind::Nonneg, length});
  objective.push_back({{}, std::vector<double>(length, 0.0)});
  return blocks.size() - 1;
}

void ConicProgram::set_hermitian_objective(std::size_t block, const ComplexMatrix& c) {
  if (block >= blocks.size() || blocks[block].kind != BlockKind::Psd || blocks[block].size != 2 * c.rows())
    throw Error(Errc::ShapeMismatch, "objective does not match the Hermitian block");
  objective[block].psd = embed_hermitian(c) * 0.5;
}

std::size_t ConicProgram::real_dimension() const {
  std::size_t d = 0;
  for (const auto& b : blocks) d += b.kind == BlockKind::Psd ? b.size * (b.size + 1) / 2 : b.size;
  return d;
}

void ConicProgram::finalize() {
  for (auto& con : constraints) {
    auto& e = con.entries;
    std::sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) {
      return std::tie(a.block, a.row, a.col) < std::tie(b.block, b.row, b.col);
    });
    std::vector<Entry> merged;
    for (const auto& x : e) {
      if (!merged.empty() && merged.back().block == x.block && merged.back().row == x.row &&
          merged.back().col == x.col) {
        merged.back().value += x.value;
      } else {
        merged.push_back(x);
      }
    }
    std::erase_if(merged, [](const Entry& x) { return x.value == 0.0; });
    e = std::move(merged);
  }
  validate();
}

void ConicProgram::validate() const {
  if (objective.size() != blocks.size()) throw Error(Errc::InvalidArgument, "objective/block count mismatch");
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& spec = blocks[b];
    if (spec.kind == BlockKind::Psd) {
      const auto& c = objective[b].psd;
      if (c.rows() != spec.size || c.cols() != spec.size)
        throw Error(Errc::ShapeMismatch, "objective block has wrong size");
      if (hermiticity_defect(c) > 1e-12 * (1.0 + max_abs(c)))
        throw Error(Errc::NotHermitian, "objective block is not symmetric");
    } else if (objective[b].vec.size() != spec.size) {
      throw Error(Errc::ShapeMismatch, "orthant objective has wrong length");
    }
  }
  if (constraints.size() > real_dimension())
    throw Error(Errc::InvalidArgument, "more constraints than variable dimension");
  for (const auto& con : constraints) {
    if (!std::isfinite(con.rhs)) throw Error(Errc::InvalidArgument, "non-finite right-hand side");
    for (const auto& x : con.entries) {
      if (x.block >= blocks.size()) throw Error(Errc::InvalidArgument, "entry block out of range");
      const auto& spec = blocks[x.block];
      if (x.row >= spec.size || x.col >= spec.size) throw Error(Errc::InvalidArgument, "entry index out of range");
      if (spec.kind == BlockKind::Nonneg && x.row != x.col)
        throw Error(Errc::InvalidArgument, "orthant entries must be diagonal");
      if (!std::isfinite(x.value)) throw Error(Errc::InvalidArgument, "non-finite coefficient");
    }
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> acc;
    for (const auto& x : con.entries)
      if (blocks[x.block].kind == BlockKind::Psd && x.row != x.col) acc[{x.block, x.row, x.col}] += x.value;
    for (const auto& [k, v] : acc) {
      const auto [blk, r, c] = k;
      auto it = acc.find({blk, c, r});
      const double other = it == acc.end() ? 0.0 : it->second;
      if (std::abs(other - v) > 1e-12 * (1.0 + std::abs(v)))
        throw Error(Errc::NotHermitian, "constraint coefficient is not symmetric");
    }
  }
}

RealMatrix embed_hermitian(const ComplexMatrix& h) {
  if (!is_hermitian(h)) throw Error(Errc::NotHermitian, "embed_hermitian expects a Hermitian matrix");
  const std::size_t d = h.rows();
  RealMatrix r(2 * d, 2 * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double a = 0.5 * (h(i, j).real() + h(j, i).real());
      const double b = 0.5 * (h(i, j).imag() - h(j, i).imag());
      r(i, j) = a;
      r(d + i, d + j) = a;
      r(i, d + j) = -b;
      r(d + i, j) = b;
    }
  return r;
}

ComplexMatrix extract_hermitian(const RealMatrix& x) {
  if (!x.is_square() || x.rows() % 2 != 0) throw Error(Errc::ShapeMismatch, "embedded block must be 2d x 2d");
  const std::size_t d = x.rows() / 2;
  ComplexMatrix h(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double a = 0.5 * (x(i, j) + x(d + i, d + j));
      const double b = 0.5 * (x(d + i, j) - x(i, d + j));
      h(i, j) = {a, b};
    }
  return hermitian_part(h);
}

void write_program_text(std::ostream& os, const ConicProgram& p) {
  os.precision(17);
  os << "# conic program: minimize <C,X> s.t. <A_k,X> = b_k\n";
  os << "blocks";
  for (const auto& b : p.blocks) os << ' ' << (b.kind == BlockKind::Psd ? "psd:" : "nonneg:") << b.size;
  os << '\n';
  os << "objective";
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    if (p.blocks[b].kind == BlockKind::Psd) {
      const auto& c = p.objective[b].psd;
      for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j)
          if (c(i, j) != 0.0) os << ' ' << b << ':' << i << ',' << j << ',' << c(i, j);
    } else {
      const auto& c = p.objective[b].vec;
      for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0.0) os << ' ' << b << ':' << i << ',' << i << ',' << c[i];
    }
  }
  os << '\n';
  for (const auto& con : p.constraints) {
    os << "constraint " << con.rhs;
    for (const auto& e : con.entries) os << ' ' << e.block << ':' << e.row << ',' << e.col << ',' << e.value;
    os << '\n';
  }
}

namespace {

using Blocks = std::vector<BlockValue>;

struct LocalEntry {
  std::size_t row, col;
  double value;
};

struct Slice {
  std::size_t constraint;
  std::vector<LocalEntry> entries;
};

double sym_inner(const RealMatrix& a, const RealMatrix& b) {
  double s = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t k = 0; k < da.size(); ++k) s += da[k] * db[k];
  return s;
}

RealMatrix symmetrize(const RealMatrix& a) { return hermitian_part(a); }

// Symmetric eigendecomposition with eigenvalue transform: V f(lambda) V^T.
RealMatrix spectral(const HermitianEig<double>& e, double (*f)(double)) {
  std::vector<double> v(e.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(e.values[i]);
  return symmetrize(reconstruct(e, v));
}

double safe_sqrt(double x) { return std::sqrt(std::max(x, 0.0)); }
double inv_sqrt(double x) { return 1.0 / std::sqrt(std::max(x, 1e-300)); }

// Largest alpha with X + alpha dX in the cone (infinity when unbounded).
double max_step_psd(const RealMatrix& xInvHalf, const RealMatrix& dx) {
  const RealMatrix t = symmetrize(xInvHalf * dx * xInvHalf);
  const auto ev = eigvalsh(t);
  const double lmin = ev.empty() ? 0.0 : ev.front();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double max_step_vec(const std::vector<double>& x, const std::vector<double>& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
  return a;
}

bool cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& x) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * x[k];
    x[i] = s / l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * x[k];
    x[i] = s / l[i * n + i];
  }
}

void axpy(Blocks& y, double a, const Blocks& x) {
  for (std::size_t b = 0; b < y.size(); ++b) {
    if (y[b].psd.rows() > 0) {
      auto yd = y[b].psd.data();
      auto xd = x[b].psd.data();
      for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += a * xd[i];
    }
    for (std::size_t i = 0; i < y[b].vec.size(); ++i) y[b].vec[i] += a * x[b].vec[i];
  }
}

class InteriorPoint {
 public:
  InteriorPoint(const ConicProgram& p, const SolveOptions& o) : p_(p), opts_(o) {
    m_ = p.constraints.size();
    slices_.resize(p.blocks.size());
    for (std::size_t k = 0; k < m_; ++k) {
      const auto& es = p.constraints[k].entries;
      std::size_t i = 0;
      while (i < es.size()) {
        Slice s{k, {}};
        const std::size_t b = es[i].block;
        while (i < es.size() && es[i].block == b) {
          s.entries.push_back({es[i].row, es[i].col, es[i].value});
          ++i;
        }
        slices_[b].push_back(std::move(s));
      }
    }
    b_.resize(m_);
    for (std::size_t k = 0; k < m_; ++k) b_[k] = p.constraints[k].rhs;
    nu_ = 0.0;
    for (const auto& blk : p.blocks) nu_ += static_cast<double>(blk.size);
    build_gram();
    std::size_t len = 0;
    for (const auto& blk : p.blocks) len += blk.kind == BlockKind::Psd ? blk.size * blk.size : blk.size;
    schurWork_ = len * m_ * m_;
  }

  ConicSolution run();

 private:
  Blocks zeros() const {
    Blocks z(p_.blocks.size());
    for (std::size_t b = 0; b < z.size(); ++b) {
      if (psd(b))
        z[b].psd = RealMatrix(p_.blocks[b].size, p_.blocks[b].size);
      else
        z[b].vec.assign(p_.blocks[b].size, 0.0);
    }
    return z;
  }
  bool psd(std::size_t b) const { return p_.blocks[b].kind == BlockKind::Psd; }

  std::vector<double> apply_a(const Blocks& x) const {
    std::vector<double> r(m_, 0.0);
    for (std::size_t b = 0; b < slices_.size(); ++b)
      for (const auto& s : slices_[b]) {
        double acc = 0.0;
        if (psd(b))
          for (const auto& e : s.entries) acc += e.value * x[b].psd(e.row, e.col);
        else
          for (const auto& e : s.entries) acc += e.value * x[b].vec[e.row];
        r[s.constraint] += acc;
      }
    return r;
  }

  Blocks apply_at(const std::vector<double>& y) const {
    Blocks r = zeros();
    for (std::size_t b = 0; b < slices_.size(); ++b)
      for (const auto& s : slices_[b]) {
        const double yk = y[s.constraint];
        if (yk == 0.0) continue;
        if (psd(b))
          for (const auto& e : s.entries) r[b].psd(e.row, e.col) += yk * e.value;
        else
          for (const auto& e : s.entries) r[b].vec[e.row] += yk * e.value;
      }
    return r;
  }

  double inner(const Blocks& a, const Blocks& c) const {
    double s = 0.0;
    for (std::size_t b = 0; b < a.size(); ++b) {
      if (psd(b))
        s += sym_inner(a[b].psd, c[b].psd);
      else
        for (std::size_t i = 0; i < a[b].vec.size(); ++i) s += a[b].vec[i] * c[b].vec[i];
    }
    return s;
  }

  static double inf_norm(const Blocks& a) {
    double m = 0.0;
    for (const auto& v : a) {
      m = std::max(m, max_abs(v.psd));
      for (double x : v.vec) m = std::max(m, std::abs(x));
    }
    return m;
  }

  struct Scaling {
    RealMatrix w, g, gInv, xInvHalf, sInvHalf;
    HermitianEig<double> v;  // eigendecomposition of the scaled point
    std::vector<double> wv, gv, vv;
  };

  void compute_scaling(const Blocks& x, const Blocks& s) {
    scal_.resize(p_.blocks.size());
    for (std::size_t b = 0; b < p_.blocks.size(); ++b) {
      auto& sc = scal_[b];
      if (psd(b)) {
        const auto ex = eigh(symmetrize(x[b].psd));
        const RealMatrix xh = spectral(ex, safe_sqrt);
        sc.xInvHalf = spectral(ex, inv_sqrt);
        const auto es = eigh(symmetrize(s[b].psd));
        sc.sInvHalf = spectral(es, inv_sqrt);
        const auto emid = eigh(symmetrize(xh * s[b].psd * xh));
        const RealMatrix midInvHalf = spectral(emid, inv_sqrt);
        sc.w = symmetrize(xh * midInvHalf * xh);
        const auto ew = eigh(sc.w);
        sc.g = spectral(ew, safe_sqrt);
        sc.gInv = spectral(ew, inv_sqrt);
        sc.v = eigh(symmetrize(sc.g * s[b].psd * sc.g));
      } else {
        const std::size_t n = x[b].vec.size();
        sc.wv.resize(n);
        sc.gv.resize(n);
        sc.vv.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double xi = x[b].vec[i], si = s[b].vec[i];
          sc.wv[i] = std::sqrt(xi / si);
          sc.gv[i] = std::sqrt(sc.wv[i]);
          sc.vv[i] = std::sqrt(xi * si);
        }
      }
    }
  }

  // W * Y * W per block.
  Blocks apply_w(const Blocks& y) const {
    Blocks r = zeros();
    for (std::size_t b = 0; b < y.size(); ++b) {
      if (psd(b))
        r[b].psd = symmetrize(scal_[b].w * y[b].psd * scal_[b].w);
      else
        for (std::size_t i = 0; i < y[b].vec.size(); ++i) r[b].vec[i] = scal_[b].wv[i] * scal_[b].wv[i] * y[b].vec[i];
    }
    return r;
  }

  // Factor of M = A W A^T from a QR of the scaled constraints G A_k G, which
  // avoids squaring the condition number of the normal equations.
  bool build_schur_qr() {
    std::size_t len = 0;
    std::vector<std::size_t> off(p_.blocks.size());
    for (std::size_t b = 0; b < p_.blocks.size(); ++b) {
      off[b] = len;
      len += psd(b) ? p_.blocks[b].size * p_.blocks[b].size : p_.blocks[b].size;
    }
    std::vector<double> at(len * m_, 0.0);  // column k holds vec(G A_k G)
    for (std::size_t b = 0; b < slices_.size(); ++b) {
      if (psd(b)) {
        const RealMatrix& g = scal_[b].g;
        const std::size_t n = g.rows();
        for (const auto& sl : slices_[b]) {
          double* col = &at[sl.constraint * len + off[b]];
          for (const auto& e : sl.entries)
            for (std::size_t i = 0; i < n; ++i) {
              const double gi = g(i, e.row) * e.value;
              if (gi == 0.0) continue;
              const double* gc = &g.data()[e.col * n];
              for (std::size_t j = 0; j < n; ++j) col[i * n + j] += gi * gc[j];
            }
        }
      } else {
        const auto& wv = scal_[b].wv;
        for (const auto& sl : slices_[b]) {
          double* col = &at[sl.constraint * len + off[b]];
          for (const auto& e : sl.entries) col[e.row] += e.value * wv[e.row];
        }
      }
    }
    // Householder QR, keeping only R.
    std::vector<double> r(m_ * m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
      double* ck = &at[k * len];
      double norm = 0.0;
      for (std::size_t i = k; i < len; ++i) norm += ck[i] * ck[i];
      norm = std::sqrt(norm);
      if (!(norm > 0.0) || !std::isfinite(norm)) return false;
      const double alpha = ck[k] > 0.0 ? -norm : norm;
      ck[k] -= alpha;  // v = x - alpha e_k, stored in place
      double vv = 0.0;
      for (std::size_t i = k; i < len; ++i) vv += ck[i] * ck[i];
      for (std::size_t j = k + 1; j < m_; ++j) {
        double* cj = &at[j * len];
        double dot = 0.0;
        for (std::size_t i = k; i < len; ++i) dot += ck[i] * cj[i];
        const double f = 2.0 * dot / vv;
        for (std::size_t i = k; i < len; ++i) cj[i] -= f * ck[i];
      }
      r[k * m_ + k] = alpha;
      for (std::size_t j = k + 1; j < m_; ++j) r[j * m_ + k] = at[j * len + k];  // L = R^T
    }
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m_; ++k) {
      dmax = std::max(dmax, std::abs(r[k * m_ + k]));
      dmin = std::min(dmin, std::abs(r[k * m_ + k]));
    }
    if (!(dmin > 1e-15 * dmax)) return false;
    chol_ = std::move(r);
    return true;
  }

  bool build_schur() {
    if (useQr_ && build_schur_qr()) return true;
    schur_.assign(m_ * m_, 0.0);
    std::vector<double> scratch;
    for (std::size_t b = 0; b < slices_.size(); ++b) {
      const auto& sl = slices_[b];
      if (sl.empty()) continue;
      if (psd(b)) {
        const RealMatrix& w = scal_[b].w;
        const std::size_t n = w.rows();
        RealMatrix g(n, n);
        for (std::size_t li = 0; li < sl.size(); ++li) {
          // G = W A_l W = sum_(r,s) a_rs W[:,r] W[s,:]
          std::fill(g.data().begin(), g.data().end(), 0.0);
          for (const auto& e : sl[li].entries)
            for (std::size_t i = 0; i < n; ++i) {
              const double wir = w(i, e.row) * e.value;
              if (wir == 0.0) continue;
              double* gi = &g.data()[i * n];
              const double* ws = &w.data()[e.col * n];
              for (std::size_t j = 0; j < n; ++j) gi[j] += wir * ws[j];
            }
          const std::size_t l = sl[li].constraint;
          for (std::size_t ki = 0; ki <= li; ++ki) {
            double acc = 0.0;
            for (const auto& e : sl[ki].entries) acc += e.value * g(e.col, e.row);
            const std::size_t k = sl[ki].constraint;
            schur_[std::max(k, l) * m_ + std::min(k, l)] += acc;
          }
        }
      } else {
        scratch.assign(p_.blocks[b].size, 0.0);
        const auto& wv = scal_[b].wv;
        for (std::size_t li = 0; li < sl.size(); ++li) {
          for (const auto& e : sl[li].entries) scratch[e.row] = e.value * wv[e.row] * wv[e.row];
          const std::size_t l = sl[li].constraint;
          for (std::size_t ki = 0; ki <= li; ++ki) {
            double acc = 0.0;
            for (const auto& e : sl[ki].entries) acc += e.value * scratch[e.row];
            const std::size_t k = sl[ki].constraint;
            schur_[std::max(k, l) * m_ + std::min(k, l)] += acc;
          }
          for (const auto& e : sl[li].entries) scratch[e.row] = 0.0;
        }
      }
    }
    double maxDiag = 0.0;
    for (std::size_t i = 0; i < m_; ++i) maxDiag = std::max(maxDiag, schur_[i * m_ + i]);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = i + 1; j < m_; ++j) schur_[i * m_ + j] = schur_[j * m_ + i];
    for (double reg = 1e-12; reg <= 1e-6; reg *= 100.0) {
      chol_ = schur_;
      for (std::size_t i = 0; i < m_; ++i) chol_[i * m_ + i] += reg * std::max(maxDiag, 1.0);
      if (cholesky(chol_, m_)) return true;
    }
    return false;
  }

  // Cholesky factor of A A^T, used to keep A dX = rp exact when the Schur
  // system is too ill-conditioned to deliver it.
  void build_gram() {
    struct Pos {
      std::size_t block, row, col, k;
      double v;
    };
    std::vector<Pos> all;
    for (std::size_t k = 0; k < m_; ++k)
      for (const auto& e : p_.constraints[k].entries) all.push_back({e.block, e.row, e.col, k, e.value});
    std::sort(all.begin(), all.end(), [](const Pos& a, const Pos& b) {
      return std::tie(a.block, a.row, a.col, a.k) < std::tie(b.block, b.row, b.col, b.k);
    });
    gram_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < all.size();) {
      std::size_t j = i;
      while (j < all.size() && all[j].block == all[i].block && all[j].row == all[i].row && all[j].col == all[i].col) ++j;
      for (std::size_t a = i; a < j; ++a)
        for (std::size_t b = i; b <= a; ++b) gram_[all[a].k * m_ + all[b].k] += all[a].v * all[b].v;
      i = j;
    }
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < i; ++j) gram_[j * m_ + i] = gram_[i * m_ + j];
    haveGram_ = m_ > 0 && cholesky(gram_, m_);
  }

  void project_primal(const std::vector<double>& rp, Blocks& dx) const {
    if (!haveGram_) return;
    const auto adx = apply_a(dx);
    std::vector<double> r(m_);
    for (std::size_t k = 0; k < m_; ++k) r[k] = rp[k] - adx[k];
    cholesky_solve(gram_, m_, r);
    axpy(dx, 1.0, apply_at(r));
  }

  // Solves A dX = rp, A^T dy + dS = rd, dX + W dS W = rx.
  // Returns false when refinement stalls, i.e. the factorization is too
  // inaccurate for the current scaling.
  bool direction(const std::vector<double>& rp, const Blocks& rd, const Blocks& rx, Blocks& dx,
                 std::vector<double>& dy, Blocks& ds) const {
    Blocks t = apply_w(rd);
    for (std::size_t b = 0; b < t.size(); ++b) {
      if (psd(b))
        t[b].psd = rx[b].psd - t[b].psd;
      else
        for (std::size_t i = 0; i < t[b].vec.size(); ++i) t[b].vec[i] = rx[b].vec[i] - t[b].vec[i];
    }
    const auto at = apply_a(t);
    dy.assign(m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) dy[k] = rp[k] - at[k];
    const std::vector<double> rhs = dy;
    cholesky_solve(chol_, m_, dy);
    // Refinement against the operator A W A^T itself, not its formed matrix;
    // a pass is kept only when it reduces the residual.
    auto residual = [&](const std::vector<double>& v, std::vector<double>& r) {
      const auto awa = apply_a(apply_w(apply_at(v)));
      double rn = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        r[i] = rhs[i] - awa[i];
        rn = std::max(rn, std::abs(r[i]));
      }
      return rn;
    };
    std::vector<double> r(m_), rNew(m_);
    double rn = residual(dy, r);
    const double rn0 = rn;
    for (int pass = 0; pass < 3 && rn > 0.0; ++pass) {
      std::vector<double> cand = r;
      cholesky_solve(chol_, m_, cand);
      for (std::size_t i = 0; i < m_; ++i) cand[i] += dy[i];
      const double rc = residual(cand, rNew);
      if (!(rc < rn)) break;
      dy = std::move(cand);
      r.swap(rNew);
      rn = rc;
    }
    double rhsMax = 0.0;
    for (double v : rhs) rhsMax = std::max(rhsMax, std::abs(v));
    const bool accurate = rn <= 1e-12 * (1.0 + rhsMax) || rn <= 0.01 * rn0;
    ds = apply_at(dy);
    for (std::size_t b = 0; b < ds.size(); ++b) {
      if (psd(b))
        ds[b].psd = symmetrize(rd[b].psd - ds[b].psd);
      else
        for (std::size_t i = 0; i < ds[b].vec.size(); ++i) ds[b].vec[i] = rd[b].vec[i] - ds[b].vec[i];
    }
    dx = apply_w(ds);
    for (std::size_t b = 0; b < dx.size(); ++b) {
      if (psd(b))
        dx[b].psd = symmetrize(rx[b].psd - dx[b].psd);
      else
        for (std::size_t i = 0; i < dx[b].vec.size(); ++i) dx[b].vec[i] = rx[b].vec[i] - dx[b].vec[i];
    }
    project_primal(rp, dx);
    return accurate;
  }

  void step_lengths(const Blocks& x, const Blocks& s, const Blocks& dx, const Blocks& ds, double& ap,
                    double& ad) const {
    ap = std::numeric_limits<double>::infinity();
    ad = ap;
    for (std::size_t b = 0; b < x.size(); ++b) {
      if (psd(b)) {
        ap = std::min(ap, max_step_psd(scal_[b].xInvHalf, dx[b].psd));
        ad = std::min(ad, max_step_psd(scal_[b].sInvHalf, ds[b].psd));
      } else {
        ap = std::min(ap, max_step_vec(x[b].vec, dx[b].vec));
        ad = std::min(ad, max_step_vec(s[b].vec, ds[b].vec));
      }
    }
  }

  const ConicProgram& p_;
  SolveOptions opts_;
  std::size_t m_ = 0;
  double nu_ = 0.0;
  std::vector<double> b_;
  std::vector<std::vector<Slice>> slices_;
  std::vector<Scaling> scal_;
  std::vector<double> schur_, chol_, gram_;
  bool haveGram_ = false;
  std::size_t schurWork_ = 0;
  bool useQr_ = false;
};

ConicSolution InteriorPoint::run() {
  ConicSolution sol;
  const double bNorm = [&] {
    double v = 0.0;
    for (double x : b_) v = std::max(v, std::abs(x));
    return v;
  }();
  const double cNorm = inf_norm(p_.objective);

  // Starting point: identity-scaled blocks.
  double aMax = 0.0, xi = 10.0, eta = 10.0;
  for (const auto& con : p_.constraints) {
    double fro = 0.0;
    for (const auto& e : con.entries) fro += e.value * e.value;
    fro = std::sqrt(fro);
    aMax = std::max(aMax, fro);
    xi = std::max(xi, (1.0 + std::abs(con.rhs)) / (1.0 + fro));
  }
  double cFro = 0.0;
  for (std::size_t b = 0; b < p_.blocks.size(); ++b) {
    cFro = std::max(cFro, psd(b) ? frobenius(p_.objective[b].psd) : [&] {
      double s = 0.0;
      for (double v : p_.objective[b].vec) s += v * v;
      return std::sqrt(s);
    }());
  }
  eta = std::max({eta, aMax, cFro});
  xi = std::max(xi, std::sqrt(nu_));
  eta = std::max(eta, std::sqrt(nu_));

  Blocks x = zeros(), s = zeros();
  for (std::size_t b = 0; b < x.size(); ++b) {
    if (psd(b)) {
      x[b].psd = RealMatrix::identity(p_.blocks[b].size) * xi;
      s[b].psd = RealMatrix::identity(p_.blocks[b].size) * eta;
    } else {
      std::fill(x[b].vec.begin(), x[b].vec.end(), xi);
      std::fill(s[b].vec.begin(), s[b].vec.end(), eta);
    }
  }
  std::vector<double> y(m_, 0.0);

  auto record = [&](SolveStatus st, int iter) {
    sol.status = st;
    sol.iterations = iter;
    sol.primal = x;
    sol.dualSlacks = s;
    sol.dualMultipliers = y;
    sol.objPrimal = inner(p_.objective, x);
    double d = 0.0;
    for (std::size_t k = 0; k < m_; ++k) d += b_[k] * y[k];
    sol.objDual = d;
    sol.gap = std::abs(sol.objPrimal - sol.objDual) / (1.0 + std::abs(sol.objPrimal));
    const auto ax = apply_a(x);
    double rp = 0.0;
    for (std::size_t k = 0; k < m_; ++k) rp = std::max(rp, std::abs(ax[k] - b_[k]));
    sol.primalResidual = rp;
    Blocks rd = apply_at(y);
    for (std::size_t b = 0; b < rd.size(); ++b) {
      if (psd(b))
        rd[b].psd = p_.objective[b].psd - rd[b].psd - s[b].psd;
      else
        for (std::size_t i = 0; i < rd[b].vec.size(); ++i)
          rd[b].vec[i] = p_.objective[b].vec[i] - rd[b].vec[i] - s[b].vec[i];
    }
    sol.dualResidual = inf_norm(rd);
    sol.complementarity = inner(x, s) / nu_;
  };

  auto acceptable = [&](double rpRel, double rdRel, double gap, double compl_) {
    return rpRel <= 1e-8 && rdRel <= 1e-8 && gap <= 1e-7 && compl_ <= 1e-7;
  };

  // QR of the scaled constraints costs about len * m^2 per iteration.
  const bool qrAllowed = m_ > 0 && static_cast<double>(schurWork_) <= 4e8;
  int lastIter = 0;
  int stall = 0;
  int noProgress = 0;
  bool haveAcceptable = false;
  double bestMerit = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= opts_.maxIters; ++iter) {
    lastIter = iter;
    const auto ax = apply_a(x);
    std::vector<double> rp(m_);
    double rpInf = 0.0;
    for (std::size_t k = 0; k < m_; ++k) {
      rp[k] = b_[k] - ax[k];
      rpInf = std::max(rpInf, std::abs(rp[k]));
    }
    Blocks rd = apply_at(y);
    for (std::size_t b = 0; b < rd.size(); ++b) {
      if (psd(b))
        rd[b].psd = symmetrize(p_.objective[b].psd - rd[b].psd - s[b].psd);
      else
        for (std::size_t i = 0; i < rd[b].vec.size(); ++i)
          rd[b].vec[i] = p_.objective[b].vec[i] - rd[b].vec[i] - s[b].vec[i];
    }
    const double rdInf = inf_norm(rd);
    const double xs = inner(x, s);
    const double mu = xs / nu_;
    const double pobj = inner(p_.objective, x);
    double dobj = 0.0;
    for (std::size_t k = 0; k < m_; ++k) dobj += b_[k] * y[k];

    const double rpRel = rpInf / (1.0 + bNorm);
    const double rdRel = rdInf / (1.0 + cNorm);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    const double complRel = xs / (1.0 + std::abs(pobj));
    if (!std::isfinite(pobj) || !std::isfinite(dobj) || !std::isfinite(mu)) {
      record(SolveStatus::NumericalFailure, iter);
      return sol;
    }
    if (rpRel <= opts_.feasTol && rdRel <= opts_.feasTol && gap <= opts_.gapTol && complRel <= opts_.gapTol) {
      record(SolveStatus::Optimal, iter);
      return sol;
    }
    // Keep the best acceptable iterate in case later steps stall.
    const double merit = std::max({rpRel, rdRel, gap, complRel});
    if (acceptable(rpRel, rdRel, gap, mu)) {
      if (merit < bestMerit) {
        record(SolveStatus::Optimal, iter);
        haveAcceptable = true;
      }
    }
    if (haveAcceptable) {
      noProgress = merit < 0.5 * bestMerit ? 0 : noProgress + 1;
      if (noProgress >= 4) break;
    }
    if (haveAcceptable && merit < bestMerit) bestMerit = merit;
    // Divergence of the normalized iterates signals infeasibility.
    const double yNorm = [&] {
      double v = 0.0;
      for (double t : y) v = std::max(v, std::abs(t));
      return v;
    }();
    if (iter > 10 && rpRel > 1e-6 && dobj > 1e8 * (1.0 + std::abs(pobj)) && yNorm > 1e8) {
      record(SolveStatus::PrimalInfeasible, iter);
      return sol;
    }
    if (iter > 10 && rdRel > 1e-6 && -pobj > 1e8 * (1.0 + std::abs(dobj)) && inf_norm(x) > 1e8) {
      record(SolveStatus::DualInfeasible, iter);
      return sol;
    }
    if (iter == opts_.maxIters) break;

    compute_scaling(x, s);
    if (!build_schur()) break;

    // Predictor.
    Blocks rx = x;
    for (auto& v : rx) {
      v.psd *= -1.0;
      for (auto& t : v.vec) t = -t;
    }
    Blocks dxa, dsa;
    std::vector<double> dya;
    if (!direction(rp, rd, rx, dxa, dya, dsa) && !useQr_ && qrAllowed) {
      useQr_ = true;
      if (!build_schur()) break;
      direction(rp, rd, rx, dxa, dya, dsa);
    }
    double apA, adA;
    step_lengths(x, s, dxa, dsa, apA, adA);
    apA = std::min(1.0, apA);
    adA = std::min(1.0, adA);
    Blocks xa = x, sa = s;
    axpy(xa, apA, dxa);
    axpy(sa, adA, dsa);
    const double muAff = inner(xa, sa) / nu_;
    double sigma = std::pow(std::max(muAff, 0.0) / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector: V o (Dx + Ds) = sigma mu I - V^2 - Dx_a o Ds_a.
    for (std::size_t b = 0; b < x.size(); ++b) {
      const auto& sc = scal_[b];
      if (psd(b)) {
        const std::size_t n = p_.blocks[b].size;
        const RealMatrix dxs = sc.gInv * dxa[b].psd * sc.gInv;
        const RealMatrix dss = sc.g * dsa[b].psd * sc.g;
        RealMatrix rc = symmetrize(dxs * dss) * -1.0;
        const RealMatrix& q = sc.v.vectors;
        const auto& lam = sc.v.values;
        // rc in the eigenbasis of V, then add sigma mu I - Lambda^2.
        RealMatrix rh = q.transpose() * rc * q;
        for (std::size_t i = 0; i < n; ++i) rh(i, i) += sigma * mu - lam[i] * lam[i];
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) rh(i, j) *= 2.0 / std::max(lam[i] + lam[j], 1e-300);
        const RealMatrix z = q * rh * q.transpose();
        rx[b].psd = symmetrize(sc.g * z * sc.g);
      } else {
        for (std::size_t i = 0; i < x[b].vec.size(); ++i) {
          const double rcv = sigma * mu - x[b].vec[i] * s[b].vec[i] - dxa[b].vec[i] * dsa[b].vec[i];
          rx[b].vec[i] = rcv / s[b].vec[i];
        }
      }
    }
    Blocks dx, ds;
    std::vector<double> dy;
    direction(rp, rd, rx, dx, dy, ds);
    double ap, ad;
    step_lengths(x, s, dx, ds, ap, ad);
    const double frac = std::min(opts_.stepFraction, 0.9 + 0.09 * std::min({ap, ad, 1.0}));
    ap = std::min(1.0, frac * ap);
    ad = std::min(1.0, frac * ad);
    if (!std::isfinite(ap) || !std::isfinite(ad)) break;
    axpy(x, ap, dx);
    axpy(s, ad, ds);
    for (std::size_t k = 0; k < m_; ++k) y[k] += ad * dy[k];
    for (std::size_t b = 0; b < x.size(); ++b)
      if (psd(b)) {
        x[b].psd = symmetrize(x[b].psd);
        s[b].psd = symmetrize(s[b].psd);
      }

    stall = (ap < 1e-8 && ad < 1e-8) ? stall + 1 : 0;
    if (stall >= 3) break;
  }
  if (haveAcceptable) return sol;
  const bool limit = lastIter >= opts_.maxIters;
  record(limit ? SolveStatus::IterLimit : SolveStatus::NumericalFailure, lastIter);
  return sol;
}

}  // namespace

ConicSolution solve(const ConicProgram& program, const SolveOptions& opts) {
  if (opts.maxIters <= 0 || opts.gapTol <= 0 || opts.feasTol <= 0 || opts.stepFraction <= 0 || opts.stepFraction >= 1)
    throw Error(Errc::InvalidArgument, "solve options must be positive (step fraction in (0,1))");
  program.validate();
  if (program.blocks.empty()) throw Error(Errc::InvalidArgument, "program has no variables");
  InteriorPoint ipm(program, opts);
  return ipm.run();
}

}  // namespace qot::conic
