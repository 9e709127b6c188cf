#include "rbpi/sequential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "rbpi/ensemble.hpp"
#include "rbpi/error.hpp"

namespace rbpi {

std::vector<BoundObjective> bind_objectives(std::span<const Objective> objectives,
                                            std::span<const std::string> output_names) {
  std::vector<BoundObjective> out;
  for (const auto& o : objectives) {
    const auto it = std::find(output_names.begin(), output_names.end(), o.output);
    if (it == output_names.end()) throw DomainError("objective refers to unknown output '" + o.output + "'");
    out.push_back({static_cast<std::size_t>(it - output_names.begin()), o.direction, o.threshold});
  }
  return out;
}

bool satisfies_all(std::span<const BoundObjective> objectives, const Vector& values) {
  return std::all_of(objectives.begin(), objectives.end(), [&](const BoundObjective& o) {
    return o.satisfied_by(values(static_cast<Eigen::Index>(o.output)));
  });
}

std::string_view to_string(AcquisitionMethod method) {
  switch (method) {
    case AcquisitionMethod::Trivial: return "trivial";
    case AcquisitionMethod::TrainingData: return "training-data";
    case AcquisitionMethod::Jackknife: return "jackknife";
    case AcquisitionMethod::Bootstrap: return "bootstrap";
    case AcquisitionMethod::Random: return "random";
  }
  return "unknown";
}

AcquisitionMethod parse_acquisition_method(std::string_view name) {
  if (name == "random") return AcquisitionMethod::Random;
  switch (parse_correlation_method(name)) {
    case CorrelationMethod::Trivial: return AcquisitionMethod::Trivial;
    case CorrelationMethod::TrainingData: return AcquisitionMethod::TrainingData;
    case CorrelationMethod::Jackknife: return AcquisitionMethod::Jackknife;
    case CorrelationMethod::Bootstrap: return AcquisitionMethod::Bootstrap;
  }
  throw DomainError("unknown acquisition method");
}

double acquisition_score(const PredictionDistribution& dist, std::span<const BoundObjective> objectives,
                         const Matrix& standard_normals) {
  const auto d = static_cast<Eigen::Index>(dist.dim());
  if (standard_normals.cols() != d) throw DomainError("acquisition_score: draw dimension mismatch");
  if (standard_normals.rows() == 0) throw DomainError("acquisition_score: no Monte-Carlo draws");
  for (const auto& o : objectives) {
    if (static_cast<Eigen::Index>(o.output) >= d) throw DomainError("acquisition_score: objective output out of range");
  }
  const Matrix lower = factor_covariance(dist.cov).lower;
  std::size_t hits = 0;
  Vector sample(d);
  for (Eigen::Index s = 0; s < standard_normals.rows(); ++s) {
    for (Eigen::Index j = 0; j < d; ++j) {
      double v = dist.mean(j);
      for (Eigen::Index k = 0; k <= j; ++k) v += lower(j, k) * standard_normals(s, k);
      sample(j) = v;
    }
    hits += satisfies_all(objectives, sample) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(standard_normals.rows());
}

double acquisition_score(const PredictionDistribution& dist, std::span<const BoundObjective> objectives,
                         std::size_t n_mc, RngStream& rng) {
  return acquisition_score(dist, objectives, standard_normal_matrix(n_mc, dist.dim(), rng));
}

namespace {

std::vector<std::size_t> winning_rows(const Dataset& data, std::span<const BoundObjective> objectives) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (satisfies_all(objectives, data.outputs.row(static_cast<Eigen::Index>(i)).transpose())) rows.push_back(i);
  }
  return rows;
}

std::optional<CorrelationMethod> correlation_of(AcquisitionMethod m) {
  switch (m) {
    case AcquisitionMethod::Trivial: return CorrelationMethod::Trivial;
    case AcquisitionMethod::TrainingData: return CorrelationMethod::TrainingData;
    case AcquisitionMethod::Jackknife: return CorrelationMethod::Jackknife;
    case AcquisitionMethod::Bootstrap: return CorrelationMethod::Bootstrap;
    case AcquisitionMethod::Random: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

void SlConfig::validate() const {
  data.validate();
  if (objectives.empty()) throw DomainError("SlConfig: no objectives");
  const auto bound = bind_objectives(objectives, data.output_names);
  const auto winners = winning_rows(data, bound);
  if (winners.empty()) throw DomainError("SlConfig: no row of the dataset satisfies every objective");
  if (n_initial < 2) throw DomainError("SlConfig: n_initial must be at least 2");
  if (n_initial + winners.size() > data.rows()) {
    throw DomainError("SlConfig: n_initial exceeds the number of non-satisfying rows");
  }
  if (n_initial >= data.rows()) throw DomainError("SlConfig: n_initial must be smaller than the dataset");
  if (n_bags < 2) throw DomainError("SlConfig: need at least two bags");
  if (n_mc_samples < 1) throw DomainError("SlConfig: need at least one Monte-Carlo sample");
  if (n_trials < 1) throw DomainError("SlConfig: need at least one trial");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("SlConfig: p must lie in (0, 1)");
}

SlTrialResult run_trial(const SlConfig& config, std::size_t trial_index) {
  const auto objectives = bind_objectives(config.objectives, config.data.output_names);
  const Dataset& data = config.data;
  const std::size_t n = data.rows();
  const RngStream trial_rng = RngStream(config.seed).derive(trial_index);

  std::vector<bool> is_winner(n, false);
  const auto winners = winning_rows(data, objectives);
  for (std::size_t w : winners) is_winner[w] = true;

  std::vector<std::size_t> losers;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_winner[i]) losers.push_back(i);
  }
  if (config.n_initial > losers.size()) throw DomainError("run_trial: not enough non-satisfying rows");

  SlTrialResult result;
  result.trial = trial_index;
  {
    RngStream init_rng = trial_rng.derive(0);
    const auto perm = permutation(losers.size(), init_rng);
    for (std::size_t k = 0; k < config.n_initial; ++k) result.initial_rows.push_back(losers[perm[k]]);
  }

  std::vector<bool> measured(n, false);
  std::vector<std::size_t> train = result.initial_rows;
  for (std::size_t r : train) measured[r] = true;

  // Trial-fixed tie-break order over rows.
  std::vector<std::size_t> rank(n);
  {
    RngStream order_rng = trial_rng.derive(1);
    const auto order = permutation(n, order_rng);
    for (std::size_t k = 0; k < n; ++k) rank[order[k]] = k;
  }

  const std::size_t pool = n - config.n_initial;
  const std::size_t max_rounds = config.max_rounds == 0 ? pool : std::min(config.max_rounds, pool);
  const auto correlation = correlation_of(config.method);

  for (std::size_t round = 1; round <= max_rounds; ++round) {
    RngStream round_rng = trial_rng.derive(100 + round);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i) {
      if (!measured[i]) candidates.push_back(i);
    }
    if (candidates.empty()) break;

    SlRound pick;
    pick.score = std::numeric_limits<double>::quiet_NaN();
    if (!correlation || candidates.size() == 1) {
      RngStream pick_rng = round_rng.derive(0);
      pick.candidate = candidates[pick_rng.uniform_index(candidates.size())];
      pick.fallback_random = correlation.has_value();
    } else {
      TrainedForest forest = fit_forest(data.subset(train), config.n_bags, round_rng.derive(1));
      calibrate(forest, config.p);
      std::optional<Matrix> train_corr;
      if (*correlation == CorrelationMethod::TrainingData) train_corr = training_correlation(forest);
      std::optional<JackknifeBasis> basis;
      if (*correlation == CorrelationMethod::Jackknife) basis.emplace(forest.bag_counts());

      RngStream mc_rng = round_rng.derive(2);
      const Matrix draws = standard_normal_matrix(config.n_mc_samples, data.n_outputs(), mc_rng);
      double best_score = -1.0;
      std::size_t best = candidates.front();
      std::vector<double> row(data.n_features());
      for (std::size_t c : candidates) {
        for (std::size_t f = 0; f < row.size(); ++f) {
          row[f] = data.inputs(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(f));
        }
        const PredictionDistribution dist =
            prediction_distribution(forest, row, *correlation, train_corr, basis ? &*basis : nullptr);
        const double score = acquisition_score(dist, objectives, draws);
        if (score > best_score || (score == best_score && rank[c] < rank[best])) {
          best_score = score;
          best = c;
        }
      }
      if (best_score > 0.0) {
        pick.candidate = best;
        pick.score = best_score;
      } else {
        RngStream pick_rng = round_rng.derive(0);
        pick.candidate = candidates[pick_rng.uniform_index(candidates.size())];
        pick.score = 0.0;
        pick.fallback_random = true;
      }
    }

    result.trace.push_back(pick);
    result.rounds = round;
    measured[pick.candidate] = true;
    if (is_winner[pick.candidate]) return result;
    train.push_back(pick.candidate);
  }
  result.censored = true;
  return result;
}

SlSummary summarize(std::span<const SlTrialResult> trials, std::string method) {
  SlSummary s;
  s.method = std::move(method);
  s.n_trials = trials.size();
  std::vector<double> rounds;
  for (const auto& t : trials) {
    if (t.censored) {
      ++s.n_censored;
    } else {
      rounds.push_back(static_cast<double>(t.rounds));
    }
  }
  if (rounds.empty()) return s;
  const double m = static_cast<double>(rounds.size());
  double sum = 0.0;
  for (double r : rounds) sum += r;
  s.mean = sum / m;
  if (rounds.size() > 1) {
    double ss = 0.0;
    for (double r : rounds) ss += (r - s.mean) * (r - s.mean);
    s.std_error = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
  }
  s.p5 = percentile(rounds, 0.05);
  s.median = percentile(rounds, 0.5);
  s.p95 = percentile(rounds, 0.95);
  return s;
}

SlStudy run_study(const SlConfig& config, std::size_t n_threads) {
  config.validate();
  SlStudy study;
  study.trials.resize(config.n_trials);
  auto work = [&](std::size_t worker, std::size_t stride) {
    for (std::size_t t = worker; t < config.n_trials; t += stride) study.trials[t] = run_trial(config, t);
  };
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, config.n_trials);
  if (n_threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
  }
  study.summary = summarize(study.trials, std::string(to_string(config.method)));
  return study;
}

double random_expected_rounds(std::size_t pool, std::size_t winners) {
  if (winners == 0 || winners > pool) throw DomainError("random_expected_rounds: need 1 <= winners <= pool");
  return static_cast<double>(pool + 1) / static_cast<double>(winners + 1);
}

std::string trials_to_csv(std::span<const SlTrialResult> trials, std::string_view method) {
  std::ostringstream os;
  os.precision(17);
  os << "trial,method,rounds,censored,initial_rows,chosen_rows,scores\n";
  for (const auto& t : trials) {
    os << t.trial << ',' << method << ',' << t.rounds << ',' << (t.censored ? 1 : 0) << ',';
    for (std::size_t k = 0; k < t.initial_rows.size(); ++k) os << (k ? ";" : "") << t.initial_rows[k];
    os << ',';
    for (std::size_t k = 0; k < t.trace.size(); ++k) os << (k ? ";" : "") << t.trace[k].candidate;
    os << ',';
    for (std::size_t k = 0; k < t.trace.size(); ++k) {
      os << (k ? ";" : "");
      if (std::isnan(t.trace[k].score)) {
        os << "nan";
      } else {
        os << t.trace[k].score;
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace rbpi
