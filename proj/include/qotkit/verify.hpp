#pragma once

// Randomized checks of the inequality ladder. Every trial draws from its own
// stream derived from (seed, trial index), so a report is a pure function of
// the suite name and parameters.

#include <qotkit/wasserstein1.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qot::verify {

/// h2(x) = -(1-x) ln(1-x) - x ln x on [0,1]; arguments are clamped into [0,1].
double binary_entropy(double x);

struct Violation {
  std::size_t trial = 0;
  std::uint64_t seed = 0;  // per-trial stream seed
  std::string check;
  double margin = 0.0;     // lhs - rhs - tolerance > 0
  std::string inputsDigest;
};

/// One evaluated inequality lhs <= rhs (+ tolerance).
struct TrialRow {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs - rhs
};

struct SuiteReport {
  std::string suite;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<Violation> violations;
  double worstMargin = -std::numeric_limits<double>::infinity();  // max over rows of lhs - rhs
  std::vector<std::pair<std::string, double>> params;
  std::vector<std::pair<std::string, double>> stats;
  std::vector<TrialRow> rows;
  std::vector<conic::SolveSummary> solves;

  bool passed() const { return violations.empty(); }
};

struct SuiteParams {
  std::size_t n = 2;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::vector<double> deltaGrid{0.5, 1.0, 2.0};
  std::size_t dim = 2;        // quadratic suite: system dimension
  std::size_t costTerms = 2;  // quadratic suite: number of observables
  /// Tightens every stated tolerance when smaller; never loosens them.
  std::optional<double> tol;
  w1::W1Options w1{};
};

SuiteReport suite_pinsker(const SuiteParams& p);
SuiteReport suite_marton(const SuiteParams& p);
SuiteReport suite_concentration(const SuiteParams& p);
SuiteReport suite_entropy_continuity(const SuiteParams& p);
SuiteReport suite_data_processing(const SuiteParams& p);
SuiteReport suite_quadratic(const SuiteParams& p);

const std::vector<std::string>& suite_names();
/// Dispatches by name ("pinsker", "marton", "concentration", "entropy",
/// "dataproc", "quadratic"); throws InvalidArgument for unknown names.
SuiteReport run_suite(const std::string& name, const SuiteParams& p);

/// FNV-1a 64 over the bytes of the given matrices, as 16 hex digits.
std::string digest_matrices(std::span<const ComplexMatrix* const> mats);

}  // namespace qot::verify
