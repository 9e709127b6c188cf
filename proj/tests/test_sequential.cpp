#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "generators.hpp"
#include "rbpi/error.hpp"
#include "rbpi/sequential.hpp"

namespace rbpi {
namespace {

PredictionDistribution point_mass(const Vector& mean) {
  PredictionDistribution d;
  d.mean = mean;
  d.cov = Matrix::Zero(mean.size(), mean.size());
  d.correlation = Matrix::Identity(mean.size(), mean.size());
  d.sigma = Vector::Zero(mean.size());
  return d;
}

PredictionDistribution standard_bivariate(double rho) {
  PredictionDistribution d;
  d.mean = Vector::Zero(2);
  d.cov = Matrix::Identity(2, 2);
  d.cov(0, 1) = d.cov(1, 0) = rho;
  d.correlation = d.cov;
  d.sigma = Vector::Ones(2);
  return d;
}

const std::vector<BoundObjective> kBothPositive = {{0, Direction::GreaterThan, 0.0}, {1, Direction::GreaterThan, 0.0}};

// Rows 0..n-1 with a single real input and outputs (i, -i); rows listed in
// `winners` are moved into the satisfying region y0 > 1000.
Dataset pool(std::size_t n, const std::set<std::size_t>& winners) {
  Dataset d;
  d.schema = real_schema(1);
  d.output_names = {"a", "b"};
  d.inputs.resize(static_cast<Eigen::Index>(n), 1);
  d.outputs.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    d.inputs(r, 0) = static_cast<double>(i);
    d.outputs(r, 0) = winners.contains(i) ? 2000.0 + static_cast<double>(i) : static_cast<double>(i);
    d.outputs(r, 1) = -static_cast<double>(i);
  }
  return d;
}

SlConfig random_config(std::size_t n, const std::set<std::size_t>& winners, std::size_t n_initial) {
  SlConfig c;
  c.data = pool(n, winners);
  c.objectives = {{"a", Direction::GreaterThan, 1000.0}};
  c.n_initial = n_initial;
  c.method = AcquisitionMethod::Random;
  c.seed = 17;
  return c;
}

TEST(Objectives, StrictThresholds) {
  const BoundObjective gt{0, Direction::GreaterThan, 22.0};
  const BoundObjective lt{0, Direction::LessThan, 22.0};
  EXPECT_FALSE(gt.satisfied_by(22.0));
  EXPECT_TRUE(gt.satisfied_by(22.5));
  EXPECT_FALSE(lt.satisfied_by(22.0));
  EXPECT_TRUE(lt.satisfied_by(21.0));
}

TEST(Objectives, UnknownOutputThrows) {
  const std::vector<Objective> obj = {{"nope", Direction::GreaterThan, 1.0}};
  const std::vector<std::string> names = {"y0"};
  EXPECT_THROW(bind_objectives(obj, names), DomainError);
}

TEST(AcquisitionScore, PointMassInside) {
  RngStream rng(401);
  Vector m(2);
  m << 1.0, 2.0;
  EXPECT_EQ(acquisition_score(point_mass(m), kBothPositive, 1000, rng), 1.0);
}

TEST(AcquisitionScore, IndependentOrthant) {
  RngStream rng(403);
  EXPECT_NEAR(acquisition_score(standard_bivariate(0.0), kBothPositive, 10000, rng), 0.25, 0.01);
}

TEST(AcquisitionScore, PerfectlyCorrelated) {
  RngStream rng(405);
  EXPECT_NEAR(acquisition_score(standard_bivariate(1.0), kBothPositive, 10000, rng), 0.5, 0.01);
}

TEST(AcquisitionScore, MonteCarloSpread) {
  const std::size_t n_mc = 10000;
  const double bound = 3.0 * std::sqrt(0.25 / static_cast<double>(n_mc));
  const RngStream base(407);
  for (int k = 0; k < 20; ++k) {
    RngStream a = base.derive(2 * k), b = base.derive(2 * k + 1);
    const auto dist = standard_bivariate(0.3);
    const double sa = acquisition_score(dist, kBothPositive, n_mc, a);
    const double sb = acquisition_score(dist, kBothPositive, n_mc, b);
    EXPECT_LT(std::abs(sa - sb), 2.0 * bound);
    EXPECT_LT(std::abs(sa - (0.25 + std::asin(0.3) / (2.0 * std::numbers::pi))), bound);
  }
}

TEST(AcquisitionScore, OracleRanksWinnerFirst) {
  // A model that predicts the truth with zero covariance scores 1 on the
  // satisfying row and 0 elsewhere, so the first round finds it.
  const Dataset d = pool(20, {13});
  const auto obj = bind_objectives(std::vector<Objective>{{"a", Direction::GreaterThan, 1000.0}}, d.output_names);
  RngStream rng(409);
  for (Eigen::Index i = 0; i < d.outputs.rows(); ++i) {
    const double s = acquisition_score(point_mass(d.outputs.row(i).transpose()), obj, 100, rng);
    EXPECT_EQ(s, i == 13 ? 1.0 : 0.0);
  }
}

TEST(RandomExpectation, NegativeHypergeometric) {
  EXPECT_NEAR(random_expected_rounds(112, 2), 113.0 / 3.0, 1e-12);
  EXPECT_NEAR(random_expected_rounds(10, 1), 5.5, 1e-12);
}

TEST(RunTrial, RandomMatchesOracleMean) {
  const SlConfig c = random_config(40, {3, 17, 30}, 8);
  double total = 0.0;
  const int trials = 3000;
  for (int t = 0; t < trials; ++t) total += static_cast<double>(run_trial(c, static_cast<std::size_t>(t)).rounds);
  // pool 32 with 3 winners: 33 / 4 = 8.25; per-trial sd is about 6.9.
  EXPECT_NEAR(total / trials, random_expected_rounds(32, 3), 0.45);
}

TEST(RunTrial, SingleCandidateChosen) {
  const SlConfig c = random_config(10, {4}, 9);
  const SlTrialResult r = run_trial(c, 0);
  EXPECT_EQ(r.rounds, 1u);
  EXPECT_FALSE(r.censored);
  EXPECT_EQ(r.trace.front().candidate, 4u);
}

TEST(RunTrial, InitialRowsAreNonWinners) {
  const SlConfig c = random_config(30, {1, 2, 3}, 20);
  for (std::size_t t = 0; t < 50; ++t) {
    for (std::size_t r : run_trial(c, t).initial_rows) ASSERT_FALSE(r == 1 || r == 2 || r == 3);
  }
}

SlConfig synthetic_config(AcquisitionMethod method) {
  SlConfig c;
  RngStream gen(6, 0x51);
  c.data = gen_sl_synthetic(gen);
  c.objectives = {{"y0", Direction::GreaterThan, 22.0}, {"y1", Direction::GreaterThan, 22.0}};
  c.method = method;
  c.n_bags = 16;
  c.n_mc_samples = 500;
  c.max_rounds = 6;
  c.seed = 23;
  return c;
}

TEST(RunTrial, NoCandidateMeasuredTwice) {
  for (auto m : {AcquisitionMethod::Bootstrap, AcquisitionMethod::Jackknife, AcquisitionMethod::Random}) {
    const SlConfig c = synthetic_config(m);
    const SlTrialResult r = run_trial(c, 1);
    std::set<std::size_t> seen(r.initial_rows.begin(), r.initial_rows.end());
    for (const SlRound& round : r.trace) ASSERT_TRUE(seen.insert(round.candidate).second) << to_string(m);
    EXPECT_EQ(r.trace.size(), r.rounds);
  }
}

TEST(RunTrial, CensoredAtCap) {
  SlConfig c = synthetic_config(AcquisitionMethod::Random);
  c.max_rounds = 1;
  std::size_t censored = 0;
  for (std::size_t t = 0; t < 20; ++t) {
    const SlTrialResult r = run_trial(c, t);
    EXPECT_LE(r.rounds, 1u);
    censored += r.censored ? 1 : 0;
  }
  EXPECT_GT(censored, 0u);
}

TEST(RunStudy, ReproducibleAcrossThreadCounts) {
  SlConfig c = synthetic_config(AcquisitionMethod::Bootstrap);
  c.n_trials = 3;
  const SlStudy a = run_study(c, 1);
  const SlStudy b = run_study(c, 3);
  const SlTrialResult single = run_trial(c, 2);
  ASSERT_EQ(a.trials.size(), 3u);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(a.trials[t].rounds, b.trials[t].rounds);
    EXPECT_EQ(a.trials[t].initial_rows, b.trials[t].initial_rows);
    for (std::size_t k = 0; k < a.trials[t].trace.size(); ++k) {
      EXPECT_EQ(a.trials[t].trace[k].candidate, b.trials[t].trace[k].candidate);
      EXPECT_TRUE(a.trials[t].trace[k].score == b.trials[t].trace[k].score ||
                  (std::isnan(a.trials[t].trace[k].score) && std::isnan(b.trials[t].trace[k].score)));
    }
  }
  EXPECT_EQ(trials_to_csv(a.trials, "bootstrap"), trials_to_csv(b.trials, "bootstrap"));
  EXPECT_EQ(single.rounds, a.trials[2].rounds);
}

TEST(RunStudy, PairedInitialSets) {
  const SlTrialResult a = run_trial(synthetic_config(AcquisitionMethod::Bootstrap), 4);
  const SlTrialResult b = run_trial(synthetic_config(AcquisitionMethod::Trivial), 4);
  EXPECT_EQ(a.initial_rows, b.initial_rows);
}

TEST(Summarize, SingleTrial) {
  SlTrialResult r;
  r.rounds = 7;
  const std::vector<SlTrialResult> v = {r};
  const SlSummary s = summarize(v, "x");
  EXPECT_EQ(s.mean, 7.0);
  EXPECT_EQ(s.median, 7.0);
  EXPECT_EQ(s.p5, 7.0);
  EXPECT_EQ(s.p95, 7.0);
  EXPECT_EQ(s.std_error, 0.0);
}

TEST(Summarize, AllOneRound) {
  std::vector<SlTrialResult> v(5);
  for (auto& r : v) r.rounds = 1;
  const SlSummary s = summarize(v, "x");
  EXPECT_EQ(s.p5, 1.0);
  EXPECT_EQ(s.median, 1.0);
  EXPECT_EQ(s.p95, 1.0);
}

TEST(Summarize, CensoredExcluded) {
  std::vector<SlTrialResult> v(3);
  v[0].rounds = 2;
  v[1].rounds = 4;
  v[2].rounds = 100;
  v[2].censored = true;
  const SlSummary s = summarize(v, "x");
  EXPECT_EQ(s.n_censored, 1u);
  EXPECT_EQ(s.mean, 3.0);
}

TEST(SlConfig, RejectsUnreachableObjective) {
  SlConfig c = random_config(10, {}, 4);
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(AcquisitionMethod, Names) {
  for (auto m : {AcquisitionMethod::Trivial, AcquisitionMethod::TrainingData, AcquisitionMethod::Jackknife,
                 AcquisitionMethod::Bootstrap, AcquisitionMethod::Random}) {
    EXPECT_EQ(parse_acquisition_method(to_string(m)), m);
  }
  EXPECT_THROW(parse_acquisition_method("pareto"), DomainError);
}

}  // namespace
}  // namespace rbpi
