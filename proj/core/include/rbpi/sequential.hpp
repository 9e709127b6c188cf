#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbpi/datasets.hpp"
#include "rbpi/intervals.hpp"

namespace rbpi {

enum class Direction { GreaterThan, LessThan };

/// Threshold objective on one named output, in original units. Thresholds
/// are strict: "greater than 22" is not met by 22.
struct Objective {
  std::string output;
  Direction direction = Direction::GreaterThan;
  double threshold = 0.0;
};

/// Objective bound to an output column index.
struct BoundObjective {
  std::size_t output = 0;
  Direction direction = Direction::GreaterThan;
  double threshold = 0.0;

  bool satisfied_by(double value) const {
    return direction == Direction::GreaterThan ? value > threshold : value < threshold;
  }
};

std::vector<BoundObjective> bind_objectives(std::span<const Objective> objectives,
                                            std::span<const std::string> output_names);

/// True when `values` meets every objective.
bool satisfies_all(std::span<const BoundObjective> objectives, const Vector& values);

/// Candidate selection rule for one sequential-learning run: a model-based
/// acquisition with one of the correlation estimators, or uniform random picks.
enum class AcquisitionMethod { Trivial, TrainingData, Jackknife, Bootstrap, Random };

std::string_view to_string(AcquisitionMethod method);
AcquisitionMethod parse_acquisition_method(std::string_view name);

/// Monte-Carlo probability that a draw from `dist` meets every objective.
double acquisition_score(const PredictionDistribution& dist, std::span<const BoundObjective> objectives,
                         std::size_t n_mc, RngStream& rng);

/// Same estimate from pre-drawn n_mc x d standard normals (common random
/// numbers shared across candidates).
double acquisition_score(const PredictionDistribution& dist, std::span<const BoundObjective> objectives,
                         const Matrix& standard_normals);

struct SlConfig {
  Dataset data;
  std::vector<Objective> objectives;
  std::size_t n_initial = 16;
  AcquisitionMethod method = AcquisitionMethod::Bootstrap;
  std::size_t max_rounds = 0;  // 0 = candidate pool size
  std::size_t n_mc_samples = 10000;
  std::size_t n_bags = 64;
  double p = kDefaultConfidence;
  std::size_t n_trials = 64;
  std::uint64_t seed = 0;

  /// Throws DomainError when the objectives, pool or counts are unusable.
  void validate() const;
};

struct SlRound {
  std::size_t candidate = 0;  // dataset row measured this round
  double score = 0.0;         // acquisition score (NaN for random picks)
  bool fallback_random = false;
};

struct SlTrialResult {
  std::size_t trial = 0;
  std::size_t rounds = 0;
  bool censored = false;
  std::vector<std::size_t> initial_rows;
  std::vector<SlRound> trace;
};

/// One simulated campaign: train on the measured rows, score every
/// unmeasured row, measure the best, stop at the first row whose recorded
/// outputs meet all objectives. The initial training rows are drawn from
/// rows that do not meet the objectives.
SlTrialResult run_trial(const SlConfig& config, std::size_t trial_index);

struct SlSummary {
  std::string method;
  std::size_t n_trials = 0;
  std::size_t n_censored = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double p5 = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

/// Distribution summary over uncensored trials.
SlSummary summarize(std::span<const SlTrialResult> trials, std::string method);

struct SlStudy {
  std::vector<SlTrialResult> trials;
  SlSummary summary;
};

/// Trials are independent; trial t uses streams derived from (seed, t).
SlStudy run_study(const SlConfig& config, std::size_t n_threads = 1);

/// Expected rounds for uniform random picks without replacement from a pool
/// of `pool` rows containing `winners` satisfying rows: (pool + 1) / (winners + 1).
double random_expected_rounds(std::size_t pool, std::size_t winners);

/// One CSV row per trial: trial,method,rounds,censored,initial_rows,trace.
std::string trials_to_csv(std::span<const SlTrialResult> trials, std::string_view method);

}  // namespace rbpi
