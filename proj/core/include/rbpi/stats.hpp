#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Core>

namespace rbpi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Reproducible random stream identified by (seed, stream_id).
///
/// Two streams constructed from the same pair produce identical draws on any
/// thread. `derive` builds an independent child stream whose identity depends
/// only on the parent's ids and the child index, never on how many draws the
/// parent has consumed, so per-trial / per-bag / per-round streams can be
/// created in any order.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  RngStream derive(std::uint64_t child) const;

  double uniform();                                   // [0, 1)
  double uniform(double lo, double hi);               // [lo, hi)
  std::size_t uniform_index(std::size_t n);           // [0, n)
  double normal();                                    // N(0, 1)
  bool bernoulli(double p);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// splitmix64 finalizer; used to mix stream identifiers.
std::uint64_t mix64(std::uint64_t x);

double normal_cdf(double x);

/// Inverse standard-normal CDF. Throws DomainError unless 0 < q < 1.
double normal_quantile(double q);

/// Inverse CDF of chi-squared with `dof` degrees of freedom.
double chi2_quantile(double q, int dof);

/// eta(p) = Phi^-1((1 + p) / 2): number of normal standard deviations whose
/// symmetric interval has coverage p.
double coverage_to_sigmas(double p);

/// Linear-interpolation percentile on the sorted values at rank h = p (n - 1).
double percentile(std::span<const double> values, double p);

double median(std::span<const double> values);

struct PearsonResult {
  double value = 0.0;
  bool degenerate = false;  // one input was constant; value is 0
};

/// Sample Pearson correlation, clamped to [-1, 1].
PearsonResult pearson(std::span<const double> a, std::span<const double> b);

/// Lower-triangular factor of a repaired covariance matrix.
struct CovarianceFactor {
  Matrix lower;          // cov ~= lower * lower^T
  double jitter = 0.0;   // diagonal jitter added on the correlation scale
  bool clamped = false;  // some |rho| was clamped to 1 - 1e-9
};

/// Symmetrize, clamp correlations, and factor; escalates diagonal jitter
/// 1e-10 -> 1e-6 before giving up with NumericalError. Zero-variance
/// dimensions yield zero rows in the factor (degenerate directions).
CovarianceFactor factor_covariance(const Matrix& cov);

/// n x d samples mean + L z, z iid N(0, 1).
Matrix mvn_sample(const Vector& mean, const Matrix& cov, std::size_t n, RngStream& rng);

/// Same as above with pre-drawn standard normals (n x d); samples are
/// mean + L z row by row.
Matrix mvn_transform(const Vector& mean, const CovarianceFactor& factor, const Matrix& standard_normals);

/// n x d matrix of iid N(0, 1).
Matrix standard_normal_matrix(std::size_t n, std::size_t d, RngStream& rng);

/// Column-wise sample covariance (divisor rows - 1).
Matrix sample_covariance(const Matrix& rows);

}  // namespace rbpi
