#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rbpi/datasets.hpp"
#include "rbpi/tree.hpp"

namespace rbpi {

/// B x N bootstrap multiplicities: count(b, i) is how often training row i
/// was drawn into bag b. Each row of the matrix sums to N.
class BagCounts {
 public:
  BagCounts() = default;
  BagCounts(std::size_t n_bags, std::size_t n_rows, std::vector<std::uint32_t> counts);

  std::size_t n_bags() const { return n_bags_; }
  std::size_t n_rows() const { return n_rows_; }
  std::uint32_t operator()(std::size_t bag, std::size_t row) const { return counts_[bag * n_rows_ + row]; }
  std::span<const std::uint32_t> bag(std::size_t b) const { return {counts_.data() + b * n_rows_, n_rows_}; }
  const std::vector<std::uint32_t>& raw() const { return counts_; }

  /// Number of bags that leave row i out.
  std::size_t oob_trees(std::size_t row) const;
  /// Fraction of (bag, row) cells equal to zero.
  double zero_fraction() const;

  bool operator==(const BagCounts&) const = default;

 private:
  std::size_t n_bags_ = 0;
  std::size_t n_rows_ = 0;
  std::vector<std::uint32_t> counts_;
};

/// Per-output recalibration factors alpha_j plus how they were obtained.
struct RecalibrationFactor {
  Vector alpha;
  double p = 0.683;
  std::size_t usable_rows = 0;
  std::vector<std::size_t> usable_per_output;
  bool clamped = false;  // some alpha was 0 and was raised to 1e-6
};

/// Bagged multi-output trees trained on standardized outputs.
class TrainedForest {
 public:
  TrainedForest() = default;
  TrainedForest(std::vector<TreeModel> trees, BagCounts bag_counts, Standardizer standardizer, InputSchema schema,
                std::vector<std::string> output_names, Matrix training_inputs, Matrix training_outputs);

  std::size_t n_trees() const { return trees_.size(); }
  std::size_t n_train() const { return static_cast<std::size_t>(training_inputs_.rows()); }
  std::size_t n_outputs() const { return standardizer_.dim(); }
  std::size_t n_features() const { return schema_.size(); }

  const std::vector<TreeModel>& trees() const { return trees_; }
  const BagCounts& bag_counts() const { return bag_counts_; }
  const Standardizer& standardizer() const { return standardizer_; }
  const InputSchema& schema() const { return schema_; }
  const std::vector<std::string>& output_names() const { return output_names_; }
  const Matrix& training_inputs() const { return training_inputs_; }
  /// Training outputs in standardized units.
  const Matrix& training_outputs() const { return training_outputs_; }

  /// Rows that are in-bag for every tree (no out-of-bag prediction possible).
  std::size_t never_oob_rows() const;

  /// B x d tree-wise predictions in standardized units.
  Matrix per_tree_standardized(std::span<const double> input) const;
  /// B x d tree-wise predictions in original output units.
  Matrix predict_per_tree(std::span<const double> input) const;
  /// Mean over trees, original output units.
  Vector predict_mean(std::span<const double> input) const;

  bool calibrated() const { return recalibration_.alpha.size() == static_cast<Eigen::Index>(n_outputs()); }
  const RecalibrationFactor& recalibration() const { return recalibration_; }
  /// Setup-phase only; not safe concurrently with predictions.
  void set_recalibration(RecalibrationFactor factor);

 private:
  std::vector<TreeModel> trees_;
  BagCounts bag_counts_;
  Standardizer standardizer_;
  InputSchema schema_;
  std::vector<std::string> output_names_;
  Matrix training_inputs_;
  Matrix training_outputs_;
  RecalibrationFactor recalibration_;
};

struct ForestOptions {
  std::size_t n_threads = 1;  // 0 = hardware concurrency
};

/// Draw `n_bags` bootstrap samples of size N and fit one full-depth tree per
/// bag. Bag b uses the sub-stream rng.derive(b), so results do not depend on
/// the thread count.
TrainedForest fit_forest(const Dataset& data, std::size_t n_bags, const RngStream& rng,
                         const ForestOptions& options = {});

/// Out-of-bag summary for one training row (standardized units).
struct OobRecord {
  std::size_t row = 0;
  std::size_t oob_trees = 0;
  Vector oob_mean;      // mean over trees that left the row out
  Vector oob_std;       // sample standard deviation over those trees
  Vector std_residual;  // |oob_mean - y| / oob_std (infinity where oob_std == 0)
  Vector raw_residual;  // |oob_mean - y|

  bool zero_spread(Eigen::Index j) const { return !(oob_std(j) > 0.0); }
};

struct OobSummary {
  std::vector<OobRecord> records;
  std::size_t omitted_rows = 0;  // fewer than two out-of-bag trees
};

/// Rows with fewer than two out-of-bag trees are omitted and counted.
/// Throws CalibrationError when fewer than 8 rows remain.
OobSummary oob_records(const TrainedForest& forest);

inline constexpr std::size_t kMinCalibrationRows = 8;

}  // namespace rbpi
