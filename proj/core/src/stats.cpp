#include "rbpi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "rbpi/error.hpp"

namespace rbpi {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(mix64(seed ^ mix64(stream_id))) {}

RngStream RngStream::derive(std::uint64_t child) const {
  return RngStream(seed_, mix64(stream_id_ * 0x100000001b3ULL + mix64(child + 1)));
}

double RngStream::uniform() { return std::generate_canonical<double, 64>(engine_); }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t RngStream::uniform_index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

double RngStream::normal() { return normal_(engine_); }

bool RngStream::bernoulli(double p) { return uniform() < p; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("normal_quantile: probability must lie in (0, 1), got " + std::to_string(q));
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), q);
}

double chi2_quantile(double q, int dof) {
  if (dof < 1) throw DomainError("chi2_quantile: degrees of freedom must be >= 1");
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("chi2_quantile: probability must lie in (0, 1), got " + std::to_string(q));
  }
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), q);
}

double coverage_to_sigmas(double p) { return normal_quantile(0.5 * (1.0 + p)); }

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw DomainError("percentile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("percentile: p must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  const double v = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  return std::clamp(v, sorted.front(), sorted.back());
}

double median(std::span<const double> values) { return percentile(values, 0.5); }

PearsonResult pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("pearson: length mismatch");
  if (a.size() < 2) throw DomainError("pearson: need at least two values");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return {0.0, true};
  return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), false};
}

namespace {

std::string describe(const Matrix& m) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << (i ? "; " : "");
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
  }
  os << "]";
  return os.str();
}

}  // namespace

CovarianceFactor factor_covariance(const Matrix& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw DomainError("factor_covariance: covariance must be square and non-empty");
  }
  const Eigen::Index d = cov.rows();
  const Matrix sym = 0.5 * (cov + cov.transpose());
  if (!sym.allFinite()) throw NumericalError("factor_covariance: non-finite covariance " + describe(cov));

  Vector scale(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (sym(j, j) < 0.0) throw NumericalError("factor_covariance: negative variance in " + describe(cov));
    scale(j) = std::sqrt(sym(j, j));
  }

  constexpr double kMaxCorrelation = 1.0 - 1e-9;
  CovarianceFactor out;
  Matrix corr = Matrix::Identity(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < j; ++k) {
      if (scale(j) == 0.0 || scale(k) == 0.0) continue;
      double r = sym(j, k) / (scale(j) * scale(k));
      if (std::abs(r) > kMaxCorrelation) {
        r = std::copysign(kMaxCorrelation, r);
        out.clamped = true;
      }
      corr(j, k) = corr(k, j) = r;
    }
  }

  double jitter = 0.0;
  for (;;) {
    Eigen::LLT<Matrix> llt(corr + jitter * Matrix::Identity(d, d));
    if (llt.info() == Eigen::Success) {
      out.lower = scale.asDiagonal() * Matrix(llt.matrixL());
      out.jitter = jitter;
      return out;
    }
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
    if (jitter > 1e-6 * (1.0 + 1e-9)) break;
  }
  throw NumericalError("factor_covariance: Cholesky failed after repair for " + describe(cov));
}

Matrix standard_normal_matrix(std::size_t n, std::size_t d, RngStream& rng) {
  Matrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = rng.normal();
  }
  return z;
}

Matrix mvn_transform(const Vector& mean, const CovarianceFactor& factor, const Matrix& standard_normals) {
  if (standard_normals.cols() != mean.size() || factor.lower.rows() != mean.size()) {
    throw DomainError("mvn_transform: dimension mismatch");
  }
  Matrix samples = standard_normals * factor.lower.transpose();
  samples.rowwise() += mean.transpose();
  return samples;
}

Matrix mvn_sample(const Vector& mean, const Matrix& cov, std::size_t n, RngStream& rng) {
  if (cov.rows() != mean.size()) throw DomainError("mvn_sample: mean/covariance dimension mismatch");
  const CovarianceFactor factor = factor_covariance(cov);
  return mvn_transform(mean, factor, standard_normal_matrix(n, static_cast<std::size_t>(mean.size()), rng));
}

Matrix sample_covariance(const Matrix& rows) {
  if (rows.rows() < 2) throw DomainError("sample_covariance: need at least two rows");
  const Matrix centered = rows.rowwise() - rows.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(rows.rows() - 1);
}

}  // namespace rbpi
