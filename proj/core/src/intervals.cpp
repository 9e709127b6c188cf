#include "rbpi/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rbpi/error.hpp"

namespace rbpi {

std::string_view to_string(CorrelationMethod method) {
  switch (method) {
    case CorrelationMethod::Trivial: return "trivial";
    case CorrelationMethod::TrainingData: return "training-data";
    case CorrelationMethod::Jackknife: return "jackknife";
    case CorrelationMethod::Bootstrap: return "bootstrap";
  }
  return "unknown";
}

CorrelationMethod parse_correlation_method(std::string_view name) {
  if (name == "trivial") return CorrelationMethod::Trivial;
  if (name == "training-data" || name == "training_data") return CorrelationMethod::TrainingData;
  if (name == "jackknife") return CorrelationMethod::Jackknife;
  if (name == "bootstrap") return CorrelationMethod::Bootstrap;
  throw DomainError("unknown correlation method '" + std::string(name) + "'");
}

namespace {

std::vector<double> usable_residuals(std::span<const OobRecord> records, Eigen::Index j) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (j >= r.std_residual.size()) throw DomainError("recalibration: records disagree on output count");
    if (!r.zero_spread(j)) out.push_back(r.std_residual(j));
  }
  if (out.size() < kMinCalibrationRows) {
    throw CalibrationError("recalibration: output " + std::to_string(j) + " has " + std::to_string(out.size()) +
                           " usable out-of-bag residuals; need " + std::to_string(kMinCalibrationRows));
  }
  return out;
}

Eigen::Index output_count(std::span<const OobRecord> records) {
  if (records.empty()) throw CalibrationError("recalibration: no out-of-bag records");
  return records.front().std_residual.size();
}

}  // namespace

RecalibrationFactor recalibration_factor(std::span<const OobRecord> records, double p) {
  const double eta = coverage_to_sigmas(p);
  const Eigen::Index d = output_count(records);
  RecalibrationFactor out;
  out.p = p;
  out.alpha.resize(d);
  out.usable_rows = records.size();
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto residuals = usable_residuals(records, j);
    out.usable_per_output.push_back(residuals.size());
    double alpha = percentile(residuals, p) / eta;
    if (!(alpha > 0.0)) {
      alpha = 1e-6;
      out.clamped = true;
    }
    out.alpha(j) = alpha;
  }
  return out;
}

Vector mle_recalibration_factor(std::span<const OobRecord> records) {
  const Eigen::Index d = output_count(records);
  Vector alpha(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto residuals = usable_residuals(records, j);
    double acc = 0.0;
    for (double r : residuals) acc += r * r;
    alpha(j) = std::sqrt(acc / static_cast<double>(residuals.size()));
  }
  return alpha;
}

RecalibrationFactor calibrate(TrainedForest& forest, double p) {
  const OobSummary oob = oob_records(forest);
  RecalibrationFactor factor = recalibration_factor(oob.records, p);
  forest.set_recalibration(factor);
  return factor;
}

Vector bootstrap_std(const Matrix& per_tree) {
  if (per_tree.rows() < 2) throw DomainError("bootstrap_std: need at least two trees");
  const Vector mean = per_tree.colwise().mean().transpose();
  Vector s(per_tree.cols());
  for (Eigen::Index j = 0; j < per_tree.cols(); ++j) {
    s(j) = std::sqrt((per_tree.col(j).array() - mean(j)).square().sum() / static_cast<double>(per_tree.rows() - 1));
  }
  return s;
}

namespace {

void require_calibrated(const TrainedForest& forest) {
  if (!forest.calibrated()) throw DomainError("forest has no recalibration factor; call calibrate() first");
}

}  // namespace

Vector recalibrated_sigma(const TrainedForest& forest, std::span<const double> input) {
  require_calibrated(forest);
  return bootstrap_std(forest.per_tree_standardized(input))
      .cwiseProduct(forest.recalibration().alpha)
      .cwiseProduct(forest.standardizer().scale);
}

CorrelationEstimate bootstrap_correlation(const Matrix& per_tree) {
  if (per_tree.rows() < 2) throw DomainError("bootstrap_correlation: need at least two trees");
  const Eigen::Index d = per_tree.cols();
  CorrelationEstimate out{Matrix::Identity(d, d), false};
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < j; ++k) {
      const Vector a = per_tree.col(j);
      const Vector b = per_tree.col(k);
      const PearsonResult r = pearson({a.data(), static_cast<std::size_t>(a.size())},
                                      {b.data(), static_cast<std::size_t>(b.size())});
      out.rho(j, k) = out.rho(k, j) = r.value;
      out.degenerate = out.degenerate || r.degenerate;
    }
  }
  return out;
}

JackknifeBasis::JackknifeBasis(const BagCounts& counts) : n_rows_(counts.n_rows()), n_bags_(counts.n_bags()) {
  const auto n = static_cast<Eigen::Index>(n_rows_);
  const auto b = static_cast<Eigen::Index>(n_bags_);
  centered_counts_.resize(n, b);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    bool any_oob = false;
    for (Eigen::Index t = 0; t < b; ++t) {
      const auto y = counts(static_cast<std::size_t>(t), static_cast<std::size_t>(i));
      centered_counts_(i, t) = (static_cast<double>(y) - 1.0) / static_cast<double>(n_bags_);
      any_oob = any_oob || y == 0;
    }
    if (any_oob) {
      kept.push_back(i);
    } else {
      ++dropped_;
    }
  }
  oob_weights_ = Matrix::Zero(static_cast<Eigen::Index>(kept.size()), b);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const std::size_t oob = counts.oob_trees(static_cast<std::size_t>(kept[k]));
    for (Eigen::Index t = 0; t < b; ++t) {
      if (counts(static_cast<std::size_t>(t), static_cast<std::size_t>(kept[k])) == 0) {
        oob_weights_(static_cast<Eigen::Index>(k), t) = 1.0 / static_cast<double>(oob);
      }
    }
  }
}

JackknifeCovariance JackknifeBasis::covariance(const Matrix& per_tree) const {
  if (static_cast<std::size_t>(per_tree.rows()) != n_bags_) throw DomainError("jackknife: tree count mismatch");
  if (oob_weights_.rows() == 0) throw NumericalError("jackknife: no training row is out of bag for any tree");
  const double n = static_cast<double>(n_rows_);
  const double b = static_cast<double>(n_bags_);
  const Vector mean = per_tree.colwise().mean().transpose();
  const Matrix dev = per_tree.rowwise() - mean.transpose();
  // Finite-B bias terms use the covariance over bags, tree_cross / B.
  const Matrix tree_cov = dev.transpose() * dev / b;

  const Matrix influence = centered_counts_ * dev;  // N x d
  JackknifeCovariance out;
  out.ij = influence.transpose() * influence - (n - 1.0) / b * tree_cov;

  const Matrix delta = (oob_weights_ * per_tree).rowwise() - mean.transpose();  // N_kept x d
  out.jab = (n - 1.0) / n * (delta.transpose() * delta) - (std::numbers::e - 1.0) * (n - 1.0) / b * tree_cov;

  out.averaged = 0.5 * (out.ij + out.jab);
  out.dropped_rows = dropped_;
  for (Eigen::Index j = 0; j < out.averaged.rows(); ++j) {
    if (out.averaged(j, j) < 0.0) {
      out.averaged(j, j) = kJackknifeVarianceFloor;
      out.clamped = true;
    }
  }
  return out;
}

JackknifeCovariance jackknife_covariance(const TrainedForest& forest, std::span<const double> input) {
  return JackknifeBasis(forest.bag_counts()).covariance(forest.per_tree_standardized(input));
}

CorrelationEstimate jackknife_correlation(const JackknifeCovariance& cov) {
  const Matrix& m = cov.averaged;
  const Eigen::Index d = m.rows();
  CorrelationEstimate out{Matrix::Identity(d, d), false};
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < j; ++k) {
      if (m(j, j) <= kJackknifeVarianceFloor || m(k, k) <= kJackknifeVarianceFloor) {
        out.degenerate = true;
        continue;
      }
      const double r = std::clamp(m(j, k) / std::sqrt(m(j, j) * m(k, k)), -1.0, 1.0);
      out.rho(j, k) = out.rho(k, j) = r;
    }
  }
  // Bias-corrected estimates are often indefinite for d >= 3. Clip the
  // spectrum and rescale back to a unit diagonal.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(out.rho);
  if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() < kMinCorrelationEigenvalue) {
    const Vector clipped = eig.eigenvalues().cwiseMax(kMinCorrelationEigenvalue);
    Matrix fixed = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    const Vector inv = fixed.diagonal().cwiseSqrt().cwiseInverse();
    fixed = inv.asDiagonal() * fixed * inv.asDiagonal();
    out.rho = 0.5 * (fixed + fixed.transpose());
    out.rho.diagonal().setOnes();
    out.projected = true;
  }
  return out;
}

CorrelationEstimate jackknife_correlation(const TrainedForest& forest, std::span<const double> input) {
  return jackknife_correlation(jackknife_covariance(forest, input));
}

Matrix training_correlation(const TrainedForest& forest) {
  const Matrix& y = forest.training_outputs();
  const Eigen::Index d = y.cols();
  Matrix rho = Matrix::Identity(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < j; ++k) {
      const Vector a = y.col(j);
      const Vector b = y.col(k);
      rho(j, k) = rho(k, j) = pearson({a.data(), static_cast<std::size_t>(a.size())},
                                      {b.data(), static_cast<std::size_t>(b.size())})
                                  .value;
    }
  }
  return rho;
}

PredictionDistribution prediction_distribution(const TrainedForest& forest, std::span<const double> input,
                                               CorrelationMethod method, const std::optional<Matrix>& train_corr,
                                               const JackknifeBasis* basis) {
  require_calibrated(forest);
  const Matrix per_tree = forest.per_tree_standardized(input);
  const auto d = static_cast<Eigen::Index>(forest.n_outputs());
  const Vector& scale = forest.standardizer().scale;

  PredictionDistribution dist;
  dist.mean = forest.standardizer().invert(Vector(per_tree.colwise().mean().transpose()));
  dist.sigma = bootstrap_std(per_tree).cwiseProduct(forest.recalibration().alpha).cwiseProduct(scale);

  switch (method) {
    case CorrelationMethod::Trivial:
      dist.correlation = Matrix::Identity(d, d);
      break;
    case CorrelationMethod::TrainingData:
      if (!train_corr) throw DomainError("prediction_distribution: TrainingData needs a training correlation");
      if (train_corr->rows() != d || train_corr->cols() != d) {
        throw DomainError("prediction_distribution: training correlation has wrong shape");
      }
      dist.correlation = *train_corr;
      break;
    case CorrelationMethod::Jackknife:
      dist.correlation = basis ? jackknife_correlation(basis->covariance(per_tree)).rho
                               : jackknife_correlation(JackknifeBasis(forest.bag_counts()).covariance(per_tree)).rho;
      break;
    case CorrelationMethod::Bootstrap:
      dist.correlation = bootstrap_correlation(per_tree).rho;
      break;
  }
  dist.cov = dist.sigma.asDiagonal() * dist.correlation * dist.sigma.asDiagonal();
  return dist;
}

PredictionDistribution prediction_distribution(const TrainedForest& forest, std::span<const double> input,
                                               CorrelationMethod method, const std::optional<Matrix>& train_corr) {
  return prediction_distribution(forest, input, method, train_corr, nullptr);
}

double oob_constant_half_width(std::span<const double> raw_residuals, double p) {
  if (raw_residuals.size() < kMinCalibrationRows) {
    throw CalibrationError("oob_constant: need at least " + std::to_string(kMinCalibrationRows) + " residuals");
  }
  return percentile(raw_residuals, p);
}

OobConstantInterval oob_constant_interval(const TrainedForest& forest, double p) {
  const OobSummary oob = oob_records(forest);
  const auto d = static_cast<Eigen::Index>(forest.n_outputs());
  const double eta = coverage_to_sigmas(p);
  OobConstantInterval out;
  out.p = p;
  out.half_width.resize(d);
  out.sigma.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<double> residuals;
    for (const auto& r : oob.records) residuals.push_back(r.raw_residual(j) * forest.standardizer().scale(j));
    out.half_width(j) = oob_constant_half_width(residuals, p);
    out.sigma(j) = out.half_width(j) / eta;
  }
  return out;
}

PredictionDistribution oob_constant_distribution(const TrainedForest& forest, const OobConstantInterval& interval,
                                                 std::span<const double> input) {
  const auto d = static_cast<Eigen::Index>(forest.n_outputs());
  PredictionDistribution dist;
  dist.mean = forest.predict_mean(input);
  dist.sigma = interval.sigma;
  dist.correlation = Matrix::Identity(d, d);
  dist.cov = dist.sigma.cwiseAbs2().asDiagonal();
  return dist;
}

}  // namespace rbpi
