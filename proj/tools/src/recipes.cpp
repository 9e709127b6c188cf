#include "rbpi_tools/recipes.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <sstream>

#include "rbpi/csv.hpp"
#include "rbpi/datasets.hpp"
#include "rbpi/ensemble.hpp"
#include "rbpi/intervals.hpp"
#include "rbpi/metrics.hpp"
#include "rbpi/sequential.hpp"

namespace rbpi::tools {

namespace fs = std::filesystem;

std::string_view code_version() { return "0.1.0"; }

const std::vector<RecipeInfo>& recipes() {
  static const std::vector<RecipeInfo> list = {
      {"recalibration-curves", "OOB standard residuals and recalibration factor vs confidence level p, with the MLE factor"},
      {"univariate-calibration", "standard confidence / standard error / NLPD of single-output intervals"},
      {"covariance-metrics", "NLPD and standard confidence of the four correlation estimators on multi-output problems"},
      {"jackknife-vs-rmse", "jackknife standard deviation vs true RMSE on a 1-D grid (tophat, cubic)"},
      {"imbalanced", "recalibrated bootstrap vs OOB-constant interval on a tension/compression shifted split"},
      {"noise-sweep", "interval size over noise level and NLPD as the noise grows"},
      {"bag-sweep", "NLPD of the correlation estimators as the number of bags varies"},
      {"sl-study", "rounds to reach all objectives in simulated sequential learning, per method"},
  };
  return list;
}

std::string list_recipes() {
  std::ostringstream os;
  for (const auto& r : recipes()) os << r.name << std::string(24 - r.name.size(), ' ') << r.study << "\n";
  return os.str();
}

namespace {

using ojson = nlohmann::ordered_json;

struct Context {
  const RecipeParams& p;
  ResultBundle& bundle;
  ojson sources = ojson::array();
};

std::uint64_t name_stream(const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Streams for one (dataset, trial): derive(0) feeds data, derive(1) forests.
RngStream trial_stream(const RecipeParams& p, const std::string& dataset, std::size_t trial) {
  return RngStream(p.seed, name_stream(dataset)).derive(trial);
}

bool is_real(const std::string& name) { return name == "mechanical-properties" || name == "thermoelectrics"; }

Dataset load_real(Context& ctx, const std::string& name) {
  const fs::path dir(ctx.p.fixture_dir);
  fs::path csv = dir / (name + ".csv");
  const fs::path standin = dir / (name + "-standin.csv");
  if (!fs::exists(csv)) {
    if (!fs::exists(standin)) {
      throw FixtureError("dataset '" + name + "' needs the CSV fixture " + csv.string() + " (or " +
                         standin.string() + "); point --fixture-dir at the directory holding it");
    }
    csv = standin;
  }
  const fs::path schema = fs::path(ctx.p.schema_dir) / (name + ".json");
  if (!fs::exists(schema)) {
    throw FixtureError("dataset '" + name + "' needs the schema file " + schema.string() +
                       "; set schema_dir in the config");
  }
  Dataset data = load_csv(csv, CsvSchema::load(schema));
  ctx.sources.push_back({{"dataset", name}, {"file", csv.filename().string()}, {"rows", data.rows()}});
  return data;
}

Dataset keep_outputs(const Dataset& data, const std::vector<std::string>& names) {
  if (names.empty()) return data;
  std::vector<std::size_t> cols;
  for (const auto& n : names) cols.push_back(data.output_index(n));
  return data.select_outputs(cols);
}

Dataset synthetic(const RecipeParams& p, const std::string& name, std::size_t n, double noise, RngStream& rng) {
  if (name == "friedman-grosse") return gen_friedman_grosse(n, noise, rng);
  if (name == "friedman-silverman") return gen_friedman_silverman(n, noise, rng);
  if (name == "friedman-grosse-multi") return gen_multi_output("friedman-grosse", n, noise, p.rho, p.quadratic_f, rng);
  if (name == "friedman-silverman-multi") {
    return gen_multi_output("friedman-silverman", n, noise, p.rho, p.quadratic_f, rng);
  }
  if (name == "tophat") return gen_tophat(n, noise, rng);
  if (name == "cubic") return gen_cubic(n, noise, rng);
  if (name == "sl-synthetic") return gen_sl_synthetic(rng);
  throw ConfigError("unknown dataset '" + name + "'");
}

std::vector<double> input_row(const Dataset& d, std::size_t i) {
  const auto row = d.inputs.row(static_cast<Eigen::Index>(i));
  return std::vector<double>(row.begin(), row.end());
}

Vector output_row(const Dataset& d, std::size_t i) { return d.outputs.row(static_cast<Eigen::Index>(i)).transpose(); }

/// Uniform train/test draw: fresh synthetic rows, or a split of a real table.
TrainTest draw_split(Context& ctx, const std::string& dataset, const Dataset* real, std::size_t n_train,
                     std::size_t n_test, double noise, RngStream rng) {
  RngStream gen = rng.derive(0);
  RngStream pick = rng.derive(1);
  if (real) return split(*real, n_train, n_test, UniformSplit{}, pick);
  const Dataset all = synthetic(ctx.p, dataset, n_train + n_test, noise, gen);
  return split(all, n_train, n_test, UniformSplit{}, pick);
}

std::vector<EvaluationPoint> evaluate_points(const TrainedForest& forest, const Dataset& test,
                                             const std::string& method) {
  std::vector<EvaluationPoint> points;
  points.reserve(test.rows());
  if (method == "oob-constant") {
    const auto interval = oob_constant_interval(forest, forest.recalibration().p);
    for (std::size_t i = 0; i < test.rows(); ++i) {
      points.push_back({oob_constant_distribution(forest, interval, input_row(test, i)), output_row(test, i)});
    }
    return points;
  }
  const CorrelationMethod cm = parse_correlation_method(method);
  std::optional<Matrix> train_corr;
  if (cm == CorrelationMethod::TrainingData) train_corr = training_correlation(forest);
  std::optional<JackknifeBasis> basis;
  if (cm == CorrelationMethod::Jackknife) basis.emplace(forest.bag_counts());
  for (std::size_t i = 0; i < test.rows(); ++i) {
    points.push_back({prediction_distribution(forest, input_row(test, i), cm, train_corr, basis ? &*basis : nullptr),
                      output_row(test, i)});
  }
  return points;
}

/// Root mean square of the standardized residuals (univariate only).
double standard_rmse(const std::vector<EvaluationPoint>& points) {
  double acc = 0.0;
  for (const auto& p : points) {
    const double z = (p.dist.mean(0) - p.observed(0)) / p.dist.sigma(0);
    acc += z * z;
  }
  return std::sqrt(acc / static_cast<double>(points.size()));
}

void record_metrics(Context& ctx, MetricTable& table, std::size_t trial, const std::vector<std::string>& keys,
                    const std::vector<EvaluationPoint>& points) {
  try {
    const MetricReport r = evaluate(points, ctx.p.p_c);
    table.add(trial, keys, "median_nlpd", r.median_nlpd);
    table.add(trial, keys, "standard_confidence", r.standard_confidence);
    if (r.standard_error) {
      table.add(trial, keys, "standard_error", *r.standard_error);
      table.add(trial, keys, "standard_rmse", standard_rmse(points));
    }
  } catch (const MetricError& e) {
    std::string label;
    for (const auto& k : keys) label += k + " ";
    ctx.bundle.warnings.push_back("trial " + std::to_string(trial) + " " + label + "skipped: " + e.what());
  }
}

ForestOptions forest_options(const RecipeParams& p) { return ForestOptions{p.threads}; }

std::string default_univariate_output(const std::string& dataset) {
  if (dataset == "mechanical-properties") return "youngs_modulus_gpa";
  if (dataset == "thermoelectrics") return "zt";
  return "y0";
}

std::size_t trials_for(const RecipeParams& p, std::size_t fallback) { return p.is_explicit("trials") ? p.trials : fallback; }

std::string key(double v) { return format_number(v); }
std::string key(std::size_t v) { return std::to_string(v); }

// ---------------------------------------------------------------------------

void recalibration_curves(Context& ctx) {
  const auto& p = ctx.p;
  MetricTable table({"dataset", "output", "estimator", "p"});
  std::string residuals = "dataset,trial,row,output,std_residual\n";
  for (const auto& name : p.datasets) {
    std::optional<Dataset> real;
    if (is_real(name)) {
      real = load_real(ctx, name);
      real = keep_outputs(*real, p.outputs.empty() ? std::vector<std::string>{name == "thermoelectrics" ? "zt" : "elongation_pct"}
                                                   : p.outputs);
    }
    for (std::size_t t = 0; t < p.trials; ++t) {
      const RngStream stream = trial_stream(p, name, t);
      Dataset train;
      if (real) {
        RngStream pick = stream.derive(0);
        const std::size_t n = std::min(p.n_train, real->rows());
        train = split(*real, n, 0, UniformSplit{}, pick).train;
      } else {
        RngStream gen = stream.derive(0);
        train = synthetic(p, name, p.n_train, p.noise, gen);
      }
      const TrainedForest forest = fit_forest(train, p.bags, stream.derive(1), forest_options(p));
      const auto records = oob_records(forest).records;
      const Vector mle = mle_recalibration_factor(records);
      for (std::size_t j = 0; j < forest.n_outputs(); ++j) {
        const std::string out = forest.output_names()[j];
        for (double level : p.p_grid) {
          const auto factor = recalibration_factor(records, level);
          table.add(t, {name, out, "percentile", key(level)}, "alpha", factor.alpha(static_cast<Eigen::Index>(j)));
        }
        table.add(t, {name, out, "mle", ""}, "alpha", mle(static_cast<Eigen::Index>(j)));
        for (const auto& r : records) {
          if (r.zero_spread(static_cast<Eigen::Index>(j))) continue;
          residuals += name + "," + std::to_string(t) + "," + std::to_string(r.row) + "," + out + "," +
                       format_number(r.std_residual(static_cast<Eigen::Index>(j))) + "\n";
        }
      }
    }
  }
  ctx.bundle.metrics["recalibration_factors"] = std::move(table);
  ctx.bundle.tables["standard_residuals.csv"] = std::move(residuals);
}

void univariate_calibration(Context& ctx) {
  const auto& p = ctx.p;
  MetricTable table({"dataset", "output", "n_train", "method"});
  for (const auto& name : p.datasets) {
    std::optional<Dataset> real;
    const std::string out = p.outputs.empty() ? default_univariate_output(name) : p.outputs.front();
    std::size_t n_test = p.n_test;
    if (is_real(name)) {
      real = keep_outputs(load_real(ctx, name), {out});
      if (!p.is_explicit("n_test")) n_test = 64;
    }
    for (std::size_t n_train : p.train_sizes) {
      if (real && n_train + n_test > real->rows()) {
        ctx.bundle.warnings.push_back(name + ": n_train " + std::to_string(n_train) + " skipped (only " +
                                      std::to_string(real->rows()) + " rows)");
        continue;
      }
      for (std::size_t t = 0; t < p.trials; ++t) {
        const RngStream stream = trial_stream(p, name, t).derive(n_train);
        TrainTest tt = draw_split(ctx, name, real ? &*real : nullptr, n_train, n_test, p.noise, stream.derive(0));
        if (!real) tt = {keep_outputs(tt.train, {out}), keep_outputs(tt.test, {out})};
        TrainedForest forest = fit_forest(tt.train, p.bags, stream.derive(1), forest_options(p));
        calibrate(forest, p.p);
        record_metrics(ctx, table, t, {name, out, key(n_train), "bootstrap"}, evaluate_points(forest, tt.test, "bootstrap"));
      }
    }
  }
  ctx.bundle.metrics["metrics"] = std::move(table);
}

void covariance_metrics(Context& ctx) {
  const auto& p = ctx.p;
  MetricTable table({"dataset", "n_train", "method"});
  for (const auto& name : p.datasets) {
    std::optional<Dataset> real;
    std::size_t n_test = p.n_test;
    std::size_t trials = p.trials;
    if (is_real(name)) {
      real = keep_outputs(load_real(ctx, name), p.outputs);
      if (!p.is_explicit("n_test")) n_test = name == "mechanical-properties" ? 48 : 64;
      trials = trials_for(p, 32);
    }
    for (std::size_t n_train : p.train_sizes) {
      if (real && n_train + n_test > real->rows()) {
        ctx.bundle.warnings.push_back(name + ": n_train " + std::to_string(n_train) + " skipped (only " +
                                      std::to_string(real->rows()) + " rows)");
        continue;
      }
      for (std::size_t t = 0; t < trials; ++t) {
        const RngStream stream = trial_stream(p, name, t).derive(n_train);
        const TrainTest tt = draw_split(ctx, name, real ? &*real : nullptr, n_train, n_test, p.noise, stream.derive(0));
        TrainedForest forest = fit_forest(tt.train, p.bags, stream.derive(1), forest_options(p));
        calibrate(forest, p.p);
        for (const auto& method : p.methods) {
          record_metrics(ctx, table, t, {name, key(n_train), method}, evaluate_points(forest, tt.test, method));
        }
      }
    }
  }
  ctx.bundle.metrics["metrics"] = std::move(table);
}

void jackknife_vs_rmse(Context& ctx) {
  const auto& p = ctx.p;
  MetricTable table({"dataset", "method"});
  std::string grid_csv = "dataset,x,truth,mean_prediction,rmse,mean_jackknife_sigma\n";
  ojson extras = ojson::object();
  for (const auto& name : p.datasets) {
    if (name != "tophat" && name != "cubic") throw ConfigError("jackknife-vs-rmse supports tophat and cubic only");
    const auto truth = [&](double x) { return name == "tophat" ? tophat(x) : cubic(x); };
    const std::size_t g = p.grid_points;
    if (g < 2) throw ConfigError("grid_points must be at least 2");
    std::vector<double> xs(g), sum_pred(g, 0.0), sum_sq(g, 0.0), sum_sigma(g, 0.0);
    for (std::size_t k = 0; k < g; ++k) xs[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(g - 1);
    for (std::size_t t = 0; t < p.trials; ++t) {
      const RngStream stream = trial_stream(p, name, t);
      RngStream gen = stream.derive(0);
      const Dataset train = synthetic(p, name, p.n_train, p.noise, gen);
      const TrainedForest forest = fit_forest(train, p.bags, stream.derive(1), forest_options(p));
      const JackknifeBasis basis(forest.bag_counts());
      const double scale = forest.standardizer().scale(0);
      double trial_sigma = 0.0, trial_sq = 0.0;
      for (std::size_t k = 0; k < g; ++k) {
        const std::vector<double> x = {xs[k]};
        const Matrix per_tree = forest.per_tree_standardized(x);
        const double pred = forest.standardizer().invert(Vector(per_tree.colwise().mean().transpose()))(0);
        const double sigma = std::sqrt(basis.covariance(per_tree).averaged(0, 0)) * scale;
        const double err = pred - truth(xs[k]);
        sum_pred[k] += pred;
        sum_sq[k] += err * err;
        sum_sigma[k] += sigma;
        trial_sigma += sigma;
        trial_sq += err * err;
      }
      table.add(t, {name, "jackknife"}, "mean_sigma", trial_sigma / static_cast<double>(g));
      table.add(t, {name, "jackknife"}, "rmse", std::sqrt(trial_sq / static_cast<double>(g)));
    }
    std::size_t below = 0;
    const double n = static_cast<double>(p.trials);
    for (std::size_t k = 0; k < g; ++k) {
      const double rmse = std::sqrt(sum_sq[k] / n);
      const double sigma = sum_sigma[k] / n;
      below += sigma < rmse ? 1 : 0;
      grid_csv += name + "," + format_number(xs[k]) + "," + format_number(truth(xs[k])) + "," +
                  format_number(sum_pred[k] / n) + "," + format_number(rmse) + "," + format_number(sigma) + "\n";
    }
    extras[name] = {{"grid_points", g},
                    {"points_sigma_below_rmse", below},
                    {"fraction_sigma_below_rmse", static_cast<double>(below) / static_cast<double>(g)}};
  }
  ctx.bundle.metrics["trial_metrics"] = std::move(table);
  ctx.bundle.tables["grid.csv"] = std::move(grid_csv);
  ctx.bundle.summary["grid"] = extras;
}

void imbalanced(Context& ctx) {
  const auto& p = ctx.p;
  MetricTable table({"dataset", "output", "method"});
  StratifiedSplit strat{p.stratify_column, {}};
  std::size_t n_train = 0, n_test = 0;
  for (const auto& [label, count] : p.train_strata) {
    strat.counts[label].first = count;
    n_train += count;
  }
  for (const auto& [label, count] : p.test_strata) {
    strat.counts[label].second = count;
    n_test += count;
  }
  for (const auto& name : p.datasets) {
    const Dataset data = is_real(name) ? load_real(ctx, name) : [&] {
      RngStream gen = RngStream(p.dataset_seed, name_stream(name));
      return synthetic(p, name, n_train + n_test, p.noise, gen);
    }();
    const std::string out = p.outputs.empty() ? data.output_names.front() : p.outputs.front();
    const Dataset uni = keep_outputs(data, {out});
    for (std::size_t t = 0; t < p.trials; ++t) {
      const RngStream stream = trial_stream(p, name, t);
      RngStream pick = stream.derive(0);
      const TrainTest tt = split(uni, n_train, n_test, strat, pick);
      TrainedForest forest = fit_forest(tt.train, p.bags, stream.derive(1), forest_options(p));
      calibrate(forest, p.p);
      for (const auto& method : p.methods) {
        record_metrics(ctx, table, t, {name, out, method}, evaluate_points(forest, tt.test, method));
      }
    }
  }
  ctx.bundle.metrics["metrics"] = std::move(table);
}

void noise_sweep(Context& ctx) {
  const auto& p = ctx.p;
  MetricTable table({"dataset", "noise", "method"});
  for (const auto& name : p.datasets) {
    if (is_real(name)) throw ConfigError("noise-sweep needs a synthetic dataset");
    for (std::size_t t = 0; t < p.trials; ++t) {
      const RngStream stream = trial_stream(p, name, t);
      for (double noise : p.noise_grid) {
        // Same stream for every noise level: inputs and unit normals are shared.
        const TrainTest tt = draw_split(ctx, name, nullptr, p.n_train, p.n_test, noise, stream.derive(0));
        const std::vector<std::size_t> first = {0};
        const Dataset uni_train = tt.train.select_outputs(first);
        const Dataset uni_test = tt.test.select_outputs(first);
        TrainedForest uni = fit_forest(uni_train, p.bags, stream.derive(1).derive(0), forest_options(p));
        calibrate(uni, p.p);
        double sigma = 0.0;
        for (std::size_t i = 0; i < uni_test.rows(); ++i) sigma += recalibrated_sigma(uni, input_row(uni_test, i))(0);
        sigma /= static_cast<double>(uni_test.rows());
        table.add(t, {name, key(noise), "univariate"}, "sigma_over_noise", noise > 0 ? sigma / noise : NAN);
        record_metrics(ctx, table, t, {name, key(noise), "univariate"}, evaluate_points(uni, uni_test, "bootstrap"));
        if (tt.train.n_outputs() < 2) continue;
        TrainedForest multi = fit_forest(tt.train, p.bags, stream.derive(1).derive(1), forest_options(p));
        calibrate(multi, p.p);
        for (const auto& method : p.methods) {
          record_metrics(ctx, table, t, {name, key(noise), method}, evaluate_points(multi, tt.test, method));
        }
      }
    }
  }
  ctx.bundle.metrics["metrics"] = std::move(table);
}

void bag_sweep(Context& ctx) {
  const auto& p = ctx.p;
  MetricTable table({"dataset", "bags", "method"});
  for (const auto& name : p.datasets) {
    std::optional<Dataset> real;
    if (is_real(name)) real = keep_outputs(load_real(ctx, name), p.outputs);
    for (std::size_t t = 0; t < p.trials; ++t) {
      const RngStream stream = trial_stream(p, name, t);
      const TrainTest tt = draw_split(ctx, name, real ? &*real : nullptr, p.n_train, p.n_test, p.noise, stream.derive(0));
      for (std::size_t bags : p.bag_grid) {
        TrainedForest forest = fit_forest(tt.train, bags, stream.derive(1).derive(bags), forest_options(p));
        calibrate(forest, p.p);
        for (const auto& method : p.methods) {
          record_metrics(ctx, table, t, {name, key(bags), method}, evaluate_points(forest, tt.test, method));
        }
      }
    }
  }
  ctx.bundle.metrics["metrics"] = std::move(table);
}

std::vector<Objective> default_objectives(const std::string& dataset) {
  if (dataset == "sl-synthetic") {
    return {{"y0", Direction::GreaterThan, 22.0}, {"y1", Direction::GreaterThan, 22.0}};
  }
  if (dataset == "thermoelectrics") {
    return {{"zt", Direction::GreaterThan, 1.25},
            {"seebeck_uv_per_k", Direction::GreaterThan, 175.0},
            {"power_factor_w_per_m_k2", Direction::GreaterThan, 5e-3},
            {"thermal_conductivity_w_per_m_k", Direction::GreaterThan, 1.5}};
  }
  throw ConfigError("no default objectives for dataset '" + dataset + "'; set 'objectives' in the config");
}

void sl_study(Context& ctx) {
  const auto& p = ctx.p;
  MetricTable table({"dataset", "method"});
  ojson studies = ojson::array();
  for (const auto& name : p.datasets) {
    SlConfig config;
    if (is_real(name)) {
      config.data = load_real(ctx, name);
    } else {
      RngStream gen(p.dataset_seed, name_stream(name));
      config.data = synthetic(p, name, 128, p.noise, gen);
    }
    config.objectives = p.objectives.empty() ? default_objectives(name) : p.objectives;
    config.n_initial = p.is_explicit("n_initial") ? p.n_initial : (name == "thermoelectrics" ? 32 : 16);
    config.max_rounds = p.max_rounds;
    config.n_mc_samples = p.n_mc_samples;
    config.n_bags = p.bags;
    config.p = p.p;
    config.n_trials = name == "thermoelectrics" ? trials_for(p, p.full ? 64 : 16) : p.trials;
    config.seed = RngStream(p.seed, name_stream(name)).derive(0).engine()();
    try {
      config.validate();
    } catch (const DomainError& e) {
      throw ConfigError(name + ": " + e.what());
    }

    const auto bound = bind_objectives(config.objectives, config.data.output_names);
    std::size_t winners = 0;
    for (std::size_t i = 0; i < config.data.rows(); ++i) winners += satisfies_all(bound, output_row(config.data, i));
    const std::size_t pool = config.data.rows() - config.n_initial;

    std::string csv;
    for (const auto& method : p.methods) {
      config.method = parse_acquisition_method(method);
      const SlStudy study = run_study(config, p.threads);
      const std::string trials_csv = trials_to_csv(study.trials, method);
      csv += csv.empty() ? trials_csv : trials_csv.substr(trials_csv.find('\n') + 1);
      for (const auto& tr : study.trials) {
        if (!tr.censored) table.add(tr.trial, {name, method}, "rounds", static_cast<double>(tr.rounds));
        table.add(tr.trial, {name, method}, "censored", tr.censored ? 1.0 : 0.0);
      }
      const auto& s = study.summary;
      studies.push_back({{"dataset", name},
                         {"method", method},
                         {"trials", s.n_trials},
                         {"censored", s.n_censored},
                         {"mean", s.mean},
                         {"std_error", s.std_error},
                         {"p5", s.p5},
                         {"median", s.median},
                         {"p95", s.p95}});
    }
    ctx.bundle.tables["sl_trials_" + name + ".csv"] = std::move(csv);
    ctx.bundle.summary["pools"][name] = {{"rows", config.data.rows()},
                                         {"n_initial", config.n_initial},
                                         {"candidates", pool},
                                         {"satisfying_rows", winners},
                                         {"random_expected_rounds", random_expected_rounds(pool, winners)}};
  }
  ctx.bundle.metrics["rounds"] = std::move(table);
  ctx.bundle.summary["sl"] = studies;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ResultBundle run_recipe(const RecipeParams& params) {
  (void)recipe_keys(params.recipe);  // rejects unknown recipes
  if (params.bags < 2) throw ConfigError("bags must be at least 2");
  if (!(params.p > 0.0 && params.p < 1.0) || !(params.p_c > 0.0 && params.p_c < 1.0)) {
    throw ConfigError("p and p_c must lie in (0, 1)");
  }
  ResultBundle bundle;
  bundle.summary = ojson::object();
  bundle.summary["format"] = "rbpi-summary/1";
  bundle.summary["recipe"] = params.recipe;
  Context ctx{params, bundle};

  const std::string& r = params.recipe;
  try {
    if (r == "recalibration-curves") recalibration_curves(ctx);
    else if (r == "univariate-calibration") univariate_calibration(ctx);
    else if (r == "covariance-metrics") covariance_metrics(ctx);
    else if (r == "jackknife-vs-rmse") jackknife_vs_rmse(ctx);
    else if (r == "imbalanced") imbalanced(ctx);
    else if (r == "noise-sweep") noise_sweep(ctx);
    else if (r == "bag-sweep") bag_sweep(ctx);
    else if (r == "sl-study") sl_study(ctx);
  } catch (const DomainError& e) {
    // Infeasible sizes, unknown outputs or methods: a usage problem.
    throw ConfigError(e.what());
  }

  for (const auto& [name, table] : bundle.metrics) bundle.summary["metrics"][name] = table.summary();
  bundle.metadata["format"] = "rbpi-bundle/1";
  bundle.metadata["recipe"] = params.recipe;
  bundle.metadata["version"] = std::string(code_version());
  bundle.metadata["seed"] = params.seed;
  bundle.metadata["parameters"] = to_json(params);
  bundle.metadata["data_sources"] = ctx.sources;
  bundle.metadata["warnings"] = bundle.warnings;
  bundle.metadata["created"] = timestamp();
  return bundle;
}

}  // namespace rbpi::tools
