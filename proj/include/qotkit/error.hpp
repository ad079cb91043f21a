#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qot {

enum class Errc {
  InvalidArgument,
  NotHermitian,
  NegativeEigenvalue,
  DomainError,
  ShapeMismatch,
  DimensionMismatch,
  NotAState,
  NotAChannel,
  NonMetricCost,
  SingularSigma,
  MarginalMismatch,
  NotATransportPlan,
  SolverFailure,
  ConvergenceFailure,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qot
