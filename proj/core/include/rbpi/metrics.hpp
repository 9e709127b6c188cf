#pragma once

#include <optional>
#include <span>

#include "rbpi/intervals.hpp"

namespace rbpi {

/// A prediction distribution paired with the value actually observed.
struct EvaluationPoint {
  PredictionDistribution dist;
  Vector observed;
};

struct MetricReport {
  std::optional<double> standard_error;  // univariate problems only
  double standard_confidence = 0.0;
  double median_nlpd = 0.0;
  std::size_t n_points = 0;
  double p_c = kDefaultConfidence;
};

/// Mean of |mean - y| / sigma over univariate points. A perfectly calibrated
/// Gaussian gives sqrt(2/pi), not 1.
double standard_error(std::span<const EvaluationPoint> points);

/// sqrt(r^T Sigma^-1 r), solved through the Cholesky factor.
double mahalanobis(const PredictionDistribution& dist, const Vector& observed);

/// Fraction of points with squared Mahalanobis distance <= chi2_d^-1(p_c).
double standard_confidence(std::span<const EvaluationPoint> points, double p_c = kDefaultConfidence);

/// -ln N(y; mean, cov).
double nlpd(const PredictionDistribution& dist, const Vector& observed);

double median_nlpd(std::span<const EvaluationPoint> points);

MetricReport evaluate(std::span<const EvaluationPoint> points, double p_c = kDefaultConfidence);

}  // namespace rbpi
