// Acceptance run: one PASS/FAIL line per criterion, values alongside.
// Exit status is non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "rbpi/datasets.hpp"
#include "rbpi/stats.hpp"
#include "rbpi_tools/recipes.hpp"

namespace {

using namespace rbpi;
using namespace rbpi::tools;
using Agg = MetricTable::Aggregate;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::string fmt(const Agg& a) { return fmt(a.mean) + "±" + fmt(a.std_error); }

double combined_se(const Agg& a, const Agg& b) { return std::hypot(a.std_error, b.std_error); }

RecipeParams params(const std::string& recipe) {
  RecipeParams p = default_params(recipe);
  p.fixture_dir = RBPI_DATA_DIR "/fixtures";
  p.schema_dir = RBPI_DATA_DIR "/schemas";
  return p;
}

void mark(RecipeParams& p, std::initializer_list<const char*> keys) {
  for (const char* k : keys) p.explicit_keys.insert(k);
}

Outcome univariate_calibration() {
  RecipeParams p = params("univariate-calibration");
  p.train_sizes = {128};
  p.n_test = 128;
  p.noise = 2.0;
  p.bags = 64;
  p.trials = 64;
  const ResultBundle b = run_recipe(p);
  const auto& m = b.metrics.at("metrics");
  const Agg sc = m.aggregate({"friedman-grosse", "y0", "128", "bootstrap"}, "standard_confidence");
  const Agg se = m.aggregate({"friedman-grosse", "y0", "128", "bootstrap"}, "standard_error");
  const bool ok = sc.mean >= 0.60 && sc.mean <= 0.76 && se.mean >= 0.80 && se.mean <= 1.25;
  return {ok, "trials=" + std::to_string(sc.n) + " SC=" + fmt(sc) + " (want [0.60,0.76]) SE=" + fmt(se) +
                  " (want [0.80,1.25])"};
}

Outcome multivariate_ranking() {
  RecipeParams p = params("covariance-metrics");
  p.datasets = {"friedman-grosse-multi"};
  p.train_sizes = {128};
  p.noise = 2.0;
  p.trials = 16;
  const ResultBundle b = run_recipe(p);
  const auto& m = b.metrics.at("metrics");
  const auto get = [&](const std::string& method, const std::string& metric) {
    return m.aggregate({"friedman-grosse-multi", "128", method}, metric);
  };
  const Agg boot = get("bootstrap", "median_nlpd"), triv = get("trivial", "median_nlpd"),
            jack = get("jackknife", "median_nlpd"), train = get("training-data", "median_nlpd");
  const Agg sc = get("bootstrap", "standard_confidence");
  const bool ok = boot.mean < triv.mean && boot.mean <= jack.mean + combined_se(boot, jack) &&
                  std::abs(sc.mean - 0.683) <= 0.10;
  return {ok, "NLPD bootstrap=" + fmt(boot) + " trivial=" + fmt(triv) + " jackknife=" + fmt(jack) +
                  " training-data=" + fmt(train) + " bootstrap SC=" + fmt(sc)};
}

const nlohmann::ordered_json& sl_entry(const ResultBundle& b, const std::string& dataset, const std::string& method) {
  for (const auto& e : b.summary.at("sl")) {
    if (e.at("dataset") == dataset && e.at("method") == method) return e;
  }
  throw std::out_of_range("no SL summary for " + dataset + "/" + method);
}

Outcome sl_synthetic() {
  RecipeParams p = params("sl-study");
  p.trials = 64;
  p.n_initial = 16;
  mark(p, {"n_initial"});
  const ResultBundle b = run_recipe(p);
  const auto med = [&](const std::string& m) { return sl_entry(b, "sl-synthetic", m).at("median").get<double>(); };
  const double boot = med("bootstrap"), jack = med("jackknife"), triv = med("trivial"), train = med("training-data");
  const double random_mean = sl_entry(b, "sl-synthetic", "random").at("mean").get<double>();
  const double oracle = b.summary.at("pools").at("sl-synthetic").at("random_expected_rounds").get<double>();
  std::size_t censored = 0;
  for (const auto& e : b.summary.at("sl")) censored += e.at("censored").get<std::size_t>();
  const bool ok = boot <= 15 && triv >= 25 && boot < jack && jack < triv && random_mean >= 25 && random_mean <= 50;
  return {ok, "median rounds bootstrap=" + fmt(boot) + " jackknife=" + fmt(jack) + " training-data=" + fmt(train) +
                  " trivial=" + fmt(triv) + "; random mean=" + fmt(random_mean) + " (oracle " + fmt(oracle) +
                  "); censored=" + std::to_string(censored)};
}

Outcome jackknife_overconfidence() {
  RecipeParams p = params("jackknife-vs-rmse");
  p.n_train = 64;
  p.trials = 250;
  p.grid_points = 100;
  const ResultBundle b = run_recipe(p);
  bool ok = true;
  std::string detail;
  for (const std::string name : {"tophat", "cubic"}) {
    const double f = b.summary.at("grid").at(name).at("fraction_sigma_below_rmse").get<double>();
    ok = ok && f >= 0.6;
    detail += name + "=" + fmt(f) + " ";
  }
  return {ok, "fraction of grid with sigma < RMSE: " + detail + "(want >= 0.6)"};
}

Outcome exact_correlation() {
  double worst = 0.0;
  for (double rho : {0.0, 0.5, 0.9, 0.98}) {
    for (std::uint64_t s = 0; s < 8; ++s) {
      RngStream rng(500 + s);
      Dataset d = gen_friedman_grosse(32 + 40 * s, 2.0, rng);
      add_linear_correlated_output(d, rho, rng);
      const Vector y0 = d.outputs.col(0), y1 = d.outputs.col(1);
      const std::span<const double> a(y0.data(), static_cast<std::size_t>(y0.size()));
      const std::span<const double> c(y1.data(), static_cast<std::size_t>(y1.size()));
      const double r = pearson(a, c).value;
      worst = std::max(worst, std::abs(r - rho));
    }
  }
  return {worst <= 1e-10, "max |pearson - rho| = " + fmt(worst)};
}

Outcome high_noise() {
  RecipeParams p = params("noise-sweep");
  p.noise_grid = {4.0, 8.0, 16.0};
  p.n_train = 128;
  p.bags = 64;
  const ResultBundle b = run_recipe(p);
  const auto& m = b.metrics.at("metrics");
  std::string detail;
  for (const std::string noise : {"4", "8", "16"}) {
    detail += "sigma/noise@" + noise + "=" +
              fmt(m.aggregate({"friedman-grosse-multi", noise, "univariate"}, "sigma_over_noise").mean) + " ";
  }
  const Agg ratio = m.aggregate({"friedman-grosse-multi", "16", "univariate"}, "sigma_over_noise");
  const Agg boot = m.aggregate({"friedman-grosse-multi", "16", "bootstrap"}, "median_nlpd");
  const Agg triv = m.aggregate({"friedman-grosse-multi", "16", "trivial"}, "median_nlpd");
  const bool ok = ratio.mean >= 0.9 && ratio.mean <= 1.3 && std::abs(boot.mean - triv.mean) <= combined_se(boot, triv);
  return {ok, detail + "; NLPD@16 bootstrap=" + fmt(boot) + " trivial=" + fmt(triv)};
}

Outcome bag_count() {
  RecipeParams p = params("bag-sweep");
  const ResultBundle b = run_recipe(p);
  const auto& m = b.metrics.at("metrics");
  bool ok = true;
  std::string detail;
  for (const auto& method : p.methods) {
    const Agg a = m.aggregate({"friedman-grosse-multi", "16", method}, "median_nlpd");
    const Agg c = m.aggregate({"friedman-grosse-multi", "128", method}, "median_nlpd");
    const double gap = std::abs(a.mean - c.mean) / combined_se(a, c);
    if (method == "bootstrap") ok = gap < 2.0;
    detail += method + " B16=" + fmt(a) + " B128=" + fmt(c) + " (" + fmt(gap) + " SE) ";
  }
  return {ok, "criterion on bootstrap; " + detail};
}

int run_filtered(const std::string& binary, const std::string& filter) {
  const std::string cmd = binary + " --gtest_brief=1 --gtest_filter='" + filter + "' > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome property_suites() {
  const std::string unit_filter =
      "BootstrapCovariance.*:StandardConfidence.ChiSquaredCoverage:Jackknife.ScalarAndMatrixAgree:Serialize.*";
  const int unit = run_filtered(RBPI_UNIT_TESTS_PATH, unit_filter);
  const int seeds = run_filtered(RBPI_CLI_TESTS_PATH, "AllRecipes/RecipeSeed.*");
  return {unit == 0 && seeds == 0, "identity/coverage/jackknife/serialization exit=" + std::to_string(unit) +
                                       " recipe seed reproducibility exit=" + std::to_string(seeds)};
}

Outcome imbalanced() {
  RecipeParams p = params("imbalanced");
  const ResultBundle b = run_recipe(p);
  const auto& m = b.metrics.at("metrics");
  const std::string out = p.outputs.front();
  const Agg sc_b = m.aggregate({"mechanical-properties", out, "bootstrap"}, "standard_confidence");
  const Agg sc_o = m.aggregate({"mechanical-properties", out, "oob-constant"}, "standard_confidence");
  const Agg se_b = m.aggregate({"mechanical-properties", out, "bootstrap"}, "standard_error");
  const Agg se_o = m.aggregate({"mechanical-properties", out, "oob-constant"}, "standard_error");
  const bool ok = sc_b.mean > sc_o.mean && std::abs(se_b.mean - 1.0) < std::abs(se_o.mean - 1.0);
  return {ok, "SC bootstrap=" + fmt(sc_b) + " oob-constant=" + fmt(sc_o) + "; SE bootstrap=" + fmt(se_b) +
                  " oob-constant=" + fmt(se_o)};
}

Outcome thermoelectrics_rank() {
  RecipeParams p = default_params("sl-study", true);
  p.fixture_dir = RBPI_DATA_DIR "/fixtures";
  p.schema_dir = RBPI_DATA_DIR "/schemas";
  p.datasets = {"thermoelectrics"};
  p.methods = {"bootstrap", "trivial"};
  p.trials = 16;
  mark(p, {"trials"});
  const ResultBundle b = run_recipe(p);
  const double boot = sl_entry(b, "thermoelectrics", "bootstrap").at("median").get<double>();
  const double triv = sl_entry(b, "thermoelectrics", "trivial").at("median").get<double>();
  return {boot < triv, "median rounds bootstrap=" + fmt(boot) + " trivial=" + fmt(triv)};
}

}  // namespace

int main(int argc, char** argv) {
  bool full = false;
  for (int i = 1; i < argc; ++i) full = full || std::string(argv[i]) == "--full";

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 univariate calibration", univariate_calibration},
      {"2 multivariate ranking", multivariate_ranking},
      {"3 SL synthetic study", sl_synthetic},
      {"4 jackknife overconfidence", jackknife_overconfidence},
      {"5 exact correlation", exact_correlation},
      {"6 high-noise limit", high_noise},
      {"7 bag-count insensitivity", bag_count},
      {"8 property suites", property_suites},
      {"9 imbalanced comparison", imbalanced},
  };
  if (full) criteria.emplace_back("thermoelectrics SL rank order", thermoelectrics_rank);

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt(secs) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
