#include "rbpi/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "rbpi/error.hpp"

namespace rbpi {

BagCounts::BagCounts(std::size_t n_bags, std::size_t n_rows, std::vector<std::uint32_t> counts)
    : n_bags_(n_bags), n_rows_(n_rows), counts_(std::move(counts)) {
  if (counts_.size() != n_bags_ * n_rows_) throw DomainError("BagCounts: size mismatch");
}

std::size_t BagCounts::oob_trees(std::size_t row) const {
  std::size_t n = 0;
  for (std::size_t b = 0; b < n_bags_; ++b) n += (*this)(b, row) == 0 ? 1 : 0;
  return n;
}

double BagCounts::zero_fraction() const {
  if (counts_.empty()) return 0.0;
  const auto zeros = std::count(counts_.begin(), counts_.end(), 0u);
  return static_cast<double>(zeros) / static_cast<double>(counts_.size());
}

TrainedForest::TrainedForest(std::vector<TreeModel> trees, BagCounts bag_counts, Standardizer standardizer,
                             InputSchema schema, std::vector<std::string> output_names, Matrix training_inputs,
                             Matrix training_outputs)
    : trees_(std::move(trees)), bag_counts_(std::move(bag_counts)), standardizer_(std::move(standardizer)),
      schema_(std::move(schema)), output_names_(std::move(output_names)),
      training_inputs_(std::move(training_inputs)), training_outputs_(std::move(training_outputs)) {
  if (trees_.size() < 2) throw DomainError("TrainedForest: need at least two trees");
  if (bag_counts_.n_bags() != trees_.size() || bag_counts_.n_rows() != n_train()) {
    throw DomainError("TrainedForest: bag counts do not match trees / training rows");
  }
}

std::size_t TrainedForest::never_oob_rows() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < n_train(); ++i) n += bag_counts_.oob_trees(i) == 0 ? 1 : 0;
  return n;
}

Matrix TrainedForest::per_tree_standardized(std::span<const double> input) const {
  Matrix out(static_cast<Eigen::Index>(trees_.size()), static_cast<Eigen::Index>(n_outputs()));
  for (std::size_t b = 0; b < trees_.size(); ++b) {
    const auto pred = trees_[b].predict(input);
    for (std::size_t j = 0; j < pred.size(); ++j) out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = pred[j];
  }
  return out;
}

Matrix TrainedForest::predict_per_tree(std::span<const double> input) const {
  return standardizer_.invert(per_tree_standardized(input));
}

Vector TrainedForest::predict_mean(std::span<const double> input) const {
  return predict_per_tree(input).colwise().mean().transpose();
}

void TrainedForest::set_recalibration(RecalibrationFactor factor) {
  if (factor.alpha.size() != static_cast<Eigen::Index>(n_outputs())) {
    throw DomainError("TrainedForest: recalibration factor has wrong dimension");
  }
  recalibration_ = std::move(factor);
}

TrainedForest fit_forest(const Dataset& data, std::size_t n_bags, const RngStream& rng,
                         const ForestOptions& options) {
  data.validate();
  const std::size_t n = data.rows();
  if (n < 2) throw DomainError("fit_forest: need at least two training rows");
  if (n_bags < 2) throw DomainError("fit_forest: need at least two bags");

  const Standardizer standardizer = data.standardizer();
  const Matrix y = standardizer.apply(data.outputs);

  std::vector<std::uint32_t> counts(n_bags * n, 0);
  for (std::size_t b = 0; b < n_bags; ++b) {
    RngStream bag_rng = rng.derive(b);
    for (std::size_t k = 0; k < n; ++k) ++counts[b * n + bag_rng.uniform_index(n)];
  }
  BagCounts bags(n_bags, n, std::move(counts));

  std::vector<TreeModel> trees(n_bags);
  auto fit_range = [&](std::size_t worker, std::size_t stride) {
    for (std::size_t b = worker; b < n_bags; b += stride) trees[b] = fit_tree(data.inputs, y, bags.bag(b), data.schema);
  };
  std::size_t threads = options.n_threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.n_threads;
  threads = std::min(threads, n_bags);
  if (threads <= 1) {
    fit_range(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(fit_range, t, threads);
  }

  return TrainedForest(std::move(trees), std::move(bags), standardizer, data.schema, data.output_names, data.inputs,
                       y);
}

OobSummary oob_records(const TrainedForest& forest) {
  const std::size_t n = forest.n_train();
  const std::size_t n_bags = forest.n_trees();
  const auto d = static_cast<Eigen::Index>(forest.n_outputs());
  const BagCounts& bags = forest.bag_counts();
  const Matrix& x = forest.training_inputs();
  const Matrix& y = forest.training_outputs();

  OobSummary summary;
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t oob = bags.oob_trees(i);
    if (oob < 2) {
      ++summary.omitted_rows;
      continue;
    }
    for (Eigen::Index f = 0; f < x.cols(); ++f) row[static_cast<std::size_t>(f)] = x(static_cast<Eigen::Index>(i), f);
    Matrix preds(static_cast<Eigen::Index>(oob), d);
    Eigen::Index k = 0;
    for (std::size_t b = 0; b < n_bags; ++b) {
      if (bags(b, i) != 0) continue;
      const auto p = forest.trees()[b].predict(row);
      for (Eigen::Index j = 0; j < d; ++j) preds(k, j) = p[static_cast<std::size_t>(j)];
      ++k;
    }
    OobRecord rec;
    rec.row = i;
    rec.oob_trees = oob;
    rec.oob_mean = preds.colwise().mean().transpose();
    rec.oob_std.resize(d);
    rec.std_residual.resize(d);
    rec.raw_residual.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double var = (preds.col(j).array() - rec.oob_mean(j)).square().sum() / static_cast<double>(oob - 1);
      rec.oob_std(j) = std::sqrt(var);
      rec.raw_residual(j) = std::abs(rec.oob_mean(j) - y(static_cast<Eigen::Index>(i), j));
      rec.std_residual(j) =
          rec.oob_std(j) > 0.0 ? rec.raw_residual(j) / rec.oob_std(j) : std::numeric_limits<double>::infinity();
    }
    summary.records.push_back(std::move(rec));
  }
  if (summary.records.size() < kMinCalibrationRows) {
    throw CalibrationError("oob_records: only " + std::to_string(summary.records.size()) +
                           " training rows have two or more out-of-bag trees; need " +
                           std::to_string(kMinCalibrationRows));
  }
  return summary;
}

}  // namespace rbpi
