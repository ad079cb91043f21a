#pragma once

// Dense primal-dual interior-point solver for conic programs in equality
// standard form
//
//   minimize    sum_b <C_b, X_b>
//   subject to  sum_b <A_kb, X_b> = b_k      k = 1..m
//               X_b PSD (symmetric blocks) or X_b >= 0 (orthant blocks)
//
// with dual  maximize b^T y  s.t.  S_b = C_b - sum_k y_k A_kb in the cone.
//
// Complex Hermitian data enters through the real embedding
// H = A + iB -> [[A, -B], [B, A]]; coefficients on embedded blocks carry a
// factor 1/2 so inner products equal Re tr(H X) in the complex domain.

#include <qotkit/matrix.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace qot::conic {

enum class BlockKind { Psd, Nonneg };

struct BlockSpec {
  BlockKind kind = BlockKind::Psd;
  std::size_t size = 0;  // side length for Psd, length for Nonneg
};

/// Single coefficient entry. Psd coefficients list the full symmetric
/// pattern (both (i,j) and (j,i)); Nonneg entries use row == col == index.
struct Entry {
  std::size_t block = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

struct Constraint {
  std::vector<Entry> entries;
  double rhs = 0.0;

  void add(std::size_t block, std::size_t row, std::size_t col, double value) {
    entries.push_back({block, row, col, value});
  }
  /// Adds value at (i,j) and, off the diagonal, at (j,i).
  void add_sym(std::size_t block, std::size_t i, std::size_t j, double value) {
    add(block, i, j, value);
    if (i != j) add(block, j, i, value);
  }
  void add_nonneg(std::size_t block, std::size_t index, double value) { add(block, index, index, value); }
  /// Adds the embedding of one entry of a Hermitian matrix of complex
  /// dimension `dim` (the caller supplies both (r,c) and (c,r)).
  void add_hermitian_entry(std::size_t block, std::size_t dim, std::size_t r, std::size_t c, cplx v);
};

/// Per-block value holder: `psd` for Psd blocks, `vec` for Nonneg blocks.
struct BlockValue {
  RealMatrix psd;
  std::vector<double> vec;
};

struct ConicProgram {
  std::vector<BlockSpec> blocks;
  std::vector<BlockValue> objective;
  std::vector<Constraint> constraints;

  std::size_t add_psd_block(std::size_t size);
  std::size_t add_nonneg_block(std::size_t length);
  /// Adds a complex Hermitian PSD variable of dimension `dim` (embedded as 2*dim).
  std::size_t add_hermitian_block(std::size_t dim) { return add_psd_block(2 * dim); }
  void set_hermitian_objective(std::size_t block, const ComplexMatrix& c);

  std::size_t real_dimension() const;
  /// Merges duplicate entries and checks symmetry and index bounds.
  void finalize();
  void validate() const;
};

struct SolveOptions {
  int maxIters = 200;
  double gapTol = 1e-8;
  double feasTol = 1e-8;
  double stepFraction = 0.98;
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, IterLimit, NumericalFailure };

std::string_view status_name(SolveStatus s) noexcept;

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<BlockValue> primal;
  std::vector<double> dualMultipliers;
  std::vector<BlockValue> dualSlacks;
  double objPrimal = 0.0;
  double objDual = 0.0;
  /// |objPrimal - objDual| / (1 + |objPrimal|)
  double gap = 0.0;
  double primalResidual = 0.0;  // ||A(X) - b||_inf
  double dualResidual = 0.0;    // ||C - A^T y - S||_inf
  double complementarity = 0.0; // <X, S> / total cone dimension
  int iterations = 0;

  bool optimal() const noexcept { return status == SolveStatus::Optimal; }
};

/// Compact record of a solve, carried by every higher-level result.
struct SolveSummary {
  SolveStatus status = SolveStatus::NumericalFailure;
  double gap = 0.0;
  double primalResidual = 0.0;
  int iterations = 0;

  static SolveSummary of(const ConicSolution& s) {
    return {s.status, s.gap, s.primalResidual, s.iterations};
  }
};

ConicSolution solve(const ConicProgram& program, const SolveOptions& opts = {});

/// [[Re H, -Im H], [Im H, Re H]]; throws NotHermitian.
RealMatrix embed_hermitian(const ComplexMatrix& h);
/// Inverse of embed_hermitian after projecting onto the complex-structured
/// subspace (the average of the two diagonal / off-diagonal block pairs).
ComplexMatrix extract_hermitian(const RealMatrix& embedded);

/// Text dump: one line per constraint as block-indexed triplets.
void write_program_text(std::ostream& os, const ConicProgram& program);

}  // namespace qot::conic
