#include "rbpi/metrics.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "rbpi/error.hpp"

namespace rbpi {

namespace {

struct Whitened {
  double squared_distance = 0.0;
  double log_det = 0.0;
};

Whitened whiten(const PredictionDistribution& dist, const Vector& observed) {
  if (observed.size() != dist.mean.size() || dist.cov.rows() != dist.mean.size()) {
    throw DomainError("metrics: observation and distribution dimensions differ");
  }
  CovarianceFactor factor;
  try {
    factor = factor_covariance(dist.cov);
  } catch (const NumericalError& e) {
    throw MetricError(std::string("metrics: covariance not factorizable: ") + e.what());
  }
  const Matrix& l = factor.lower;
  Whitened out;
  for (Eigen::Index j = 0; j < l.rows(); ++j) {
    if (!(l(j, j) > 0.0)) throw MetricError("metrics: singular prediction covariance (zero variance on output " +
                                            std::to_string(j) + ")");
    out.log_det += 2.0 * std::log(l(j, j));
  }
  const Vector residual = dist.mean - observed;
  const Vector z = l.triangularView<Eigen::Lower>().solve(residual);
  out.squared_distance = z.squaredNorm();
  return out;
}

}  // namespace

double standard_error(std::span<const EvaluationPoint> points) {
  if (points.empty()) throw MetricError("standard_error: no points");
  double acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.dist.dim() != 1) throw MetricError("standard_error: only defined for univariate distributions");
    const double sigma = p.dist.sigma.size() ? p.dist.sigma(0) : std::sqrt(p.dist.cov(0, 0));
    if (!(sigma > 0.0)) throw MetricError("standard_error: zero predicted uncertainty at point " + std::to_string(i));
    acc += std::abs(p.dist.mean(0) - p.observed(0)) / sigma;
  }
  return acc / static_cast<double>(points.size());
}

double mahalanobis(const PredictionDistribution& dist, const Vector& observed) {
  return std::sqrt(whiten(dist, observed).squared_distance);
}

double standard_confidence(std::span<const EvaluationPoint> points, double p_c) {
  if (points.empty()) throw MetricError("standard_confidence: no points");
  const int d = static_cast<int>(points.front().dist.dim());
  const double cutoff = chi2_quantile(p_c, d);
  std::size_t inside = 0;
  for (const auto& p : points) {
    if (static_cast<int>(p.dist.dim()) != d) throw MetricError("standard_confidence: mixed dimensions");
    inside += whiten(p.dist, p.observed).squared_distance <= cutoff ? 1 : 0;
  }
  return static_cast<double>(inside) / static_cast<double>(points.size());
}

double nlpd(const PredictionDistribution& dist, const Vector& observed) {
  const Whitened w = whiten(dist, observed);
  const double d = static_cast<double>(dist.dim());
  return 0.5 * (d * std::log(2.0 * std::numbers::pi) + w.log_det + w.squared_distance);
}

double median_nlpd(std::span<const EvaluationPoint> points) {
  if (points.empty()) throw MetricError("median_nlpd: no points");
  std::vector<double> values;
  values.reserve(points.size());
  for (const auto& p : points) values.push_back(nlpd(p.dist, p.observed));
  return median(values);
}

MetricReport evaluate(std::span<const EvaluationPoint> points, double p_c) {
  MetricReport report;
  report.n_points = points.size();
  report.p_c = p_c;
  report.standard_confidence = standard_confidence(points, p_c);
  report.median_nlpd = median_nlpd(points);
  if (!points.empty() && points.front().dist.dim() == 1) report.standard_error = standard_error(points);
  return report;
}

}  // namespace rbpi
