#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "rbpi/ensemble.hpp"

namespace rbpi {

inline constexpr double kDefaultConfidence = 0.683;

/// How the correlation between outputs of the prediction distribution is
/// estimated. The per-output standard deviations are the recalibrated
/// bootstrap ones in every case.
enum class CorrelationMethod {
  Trivial,       // identity: outputs treated as independent
  TrainingData,  // Pearson over the training outputs, same for every input
  Jackknife,     // averaged IJ / JaB covariance normalized to a correlation
  Bootstrap,     // Pearson over the tree-wise predictions
};

std::string_view to_string(CorrelationMethod method);
/// Accepts "trivial", "training-data", "jackknife", "bootstrap".
CorrelationMethod parse_correlation_method(std::string_view name);

/// alpha_j = percentile_p(|standard residual_j|) / eta(p) over records with
/// non-zero out-of-bag spread. Throws CalibrationError with fewer than eight
/// usable records for some output.
RecalibrationFactor recalibration_factor(std::span<const OobRecord> records, double p = kDefaultConfidence);

/// alpha_j maximizing the Gaussian log likelihood of the standard residuals:
/// sqrt(mean of squared standard residuals).
Vector mle_recalibration_factor(std::span<const OobRecord> records);

/// Compute out-of-bag records, the recalibration factor at `p`, and store it
/// in the forest.
RecalibrationFactor calibrate(TrainedForest& forest, double p = kDefaultConfidence);

/// Column-wise sample standard deviation (divisor B - 1) of B x d predictions.
Vector bootstrap_std(const Matrix& per_tree);

/// alpha_j * bootstrap std, in original output units.
Vector recalibrated_sigma(const TrainedForest& forest, std::span<const double> input);

struct CorrelationEstimate {
  Matrix rho;
  bool degenerate = false;  // some pair was set to 0 (constant column / floored variance)
  bool projected = false;   // eigenvalues were clipped to make rho positive definite
};

inline constexpr double kMinCorrelationEigenvalue = 1e-6;

/// Pearson over tree-wise predictions; unit diagonal.
CorrelationEstimate bootstrap_correlation(const Matrix& per_tree);

/// Bias-corrected infinitesimal-jackknife and jackknife-after-bootstrap
/// covariance between outputs at one input, plus their element-wise mean.
struct JackknifeCovariance {
  Matrix ij;
  Matrix jab;
  Matrix averaged;
  std::size_t dropped_rows = 0;  // rows in every bag, left out of the JaB sum
  bool clamped = false;          // a negative averaged variance was raised to the floor
};

inline constexpr double kJackknifeVarianceFloor = 1e-12;

/// Precomputed bag-count terms shared by every input of one forest.
class JackknifeBasis {
 public:
  explicit JackknifeBasis(const BagCounts& counts);

  /// Covariances from the B x d tree-wise predictions at one input.
  JackknifeCovariance covariance(const Matrix& per_tree) const;

  std::size_t dropped_rows() const { return dropped_; }

 private:
  Matrix centered_counts_;  // N x B, (Y_bi - 1) / B
  Matrix oob_weights_;      // N_kept x B, 1 / B_i on out-of-bag trees
  std::size_t n_rows_ = 0;
  std::size_t n_bags_ = 0;
  std::size_t dropped_ = 0;
};

/// Standardized units. Throws NumericalError when no row is out of bag anywhere.
JackknifeCovariance jackknife_covariance(const TrainedForest& forest, std::span<const double> input);

/// Cov_J[j,k] / sqrt(V_J[j] V_J[k]) from the averaged matrix, clamped to
/// [-1, 1]; pairs with a floored variance get 0.
CorrelationEstimate jackknife_correlation(const JackknifeCovariance& cov);
CorrelationEstimate jackknife_correlation(const TrainedForest& forest, std::span<const double> input);

/// Pearson over the training outputs (standardized or not, same result).
Matrix training_correlation(const TrainedForest& forest);

/// N(mean, cov) at one input, in original output units.
struct PredictionDistribution {
  Vector mean;
  Matrix cov;
  Matrix correlation;
  Vector sigma;  // recalibrated standard deviations

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

/// Sigma_jk = rho_jk sigma_j sigma_k with rho from `method`. `train_corr`
/// is required for TrainingData.
PredictionDistribution prediction_distribution(const TrainedForest& forest, std::span<const double> input,
                                               CorrelationMethod method,
                                               const std::optional<Matrix>& train_corr = std::nullopt);

/// Variant that reuses a JackknifeBasis built for this forest.
PredictionDistribution prediction_distribution(const TrainedForest& forest, std::span<const double> input,
                                               CorrelationMethod method, const std::optional<Matrix>& train_corr,
                                               const JackknifeBasis* basis);

/// Unconditional interval from raw out-of-bag residuals, original units.
struct OobConstantInterval {
  Vector half_width;  // p-percentile of |oob mean - y|
  Vector sigma;       // half_width / eta(p)
  double p = kDefaultConfidence;
};

/// p-percentile of raw absolute residuals.
double oob_constant_half_width(std::span<const double> raw_residuals, double p);

OobConstantInterval oob_constant_interval(const TrainedForest& forest, double p = kDefaultConfidence);

/// Mean from the forest, diagonal covariance from the constant interval.
PredictionDistribution oob_constant_distribution(const TrainedForest& forest, const OobConstantInterval& interval,
                                                 std::span<const double> input);

}  // namespace rbpi
