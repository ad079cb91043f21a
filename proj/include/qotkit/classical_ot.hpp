#pragma once

// Discrete optimal transport on finite sets. Couplings are N x M matrices
// pi(x, y) with row sums sigma and column sums rho. Binary strings index
// distributions on {0,1}^n big-endian (bit 1 is the most significant).

#include <qotkit/conic.hpp>

#include <limits>
#include <vector>

namespace qot::ot {

/// Probability vector; entries in [-1e-12, 0) are clamped to 0.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> probs);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probs() const noexcept { return p_; }

  static Distribution uniform(std::size_t n);
  static Distribution delta(std::size_t n, std::size_t at);

 private:
  std::vector<double> p_;
};

using CostMatrix = RealMatrix;

/// Throws NonMetricCost unless d is symmetric, zero on the diagonal, and
/// satisfies the triangle inequality within 1e-9.
void check_metric(const CostMatrix& d);

CostMatrix hamming_metric(std::size_t n);
/// Hamming distance of the n-bit strings x and y.
std::size_t hamming(std::size_t x, std::size_t y);

struct TransportResult {
  double value = 0.0;
  RealMatrix plan;
  conic::SolveSummary solver;
};

struct DualResult {
  double value = 0.0;
  std::vector<double> potential;
  conic::SolveSummary solver;
};

/// Options tuned to reach ~1e-10 accuracy on small transport LPs.
conic::SolveOptions transport_solve_options();

/// min sum c(x,y) pi(x,y) over couplings of sigma (rows) and rho (columns).
TransportResult kantorovich(const Distribution& sigma, const Distribution& rho, const CostMatrix& c);

/// Kantorovich-Rubinstein dual: max sum f (sigma - rho) over 1-Lipschitz f.
DualResult dual_w1(const Distribution& sigma, const Distribution& rho, const CostMatrix& d);

/// (min sum d^p pi)^(1/p) for p >= 1, min sum d^p pi for 0 < p < 1.
double wasserstein_p(const Distribution& sigma, const Distribution& rho, const CostMatrix& d, double p);

double tv(const Distribution& sigma, const Distribution& rho);
double hellinger(const Distribution& sigma, const Distribution& rho);
/// Natural log; +infinity when sigma is not absolutely continuous w.r.t. rho.
double kl(const Distribution& sigma, const Distribution& rho);

/// W1 on {0,1}^n with Hamming distance; size must be a power of two.
double hamming_w1(const Distribution& p, const Distribution& q);
TransportResult hamming_w1_full(const Distribution& p, const Distribution& q);

/// Number of bits n with 2^n == size, or throws DimensionMismatch.
std::size_t bits_for_size(std::size_t size);

}  // namespace qot::ot
