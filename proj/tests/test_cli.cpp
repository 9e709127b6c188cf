#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>

#include "rbpi_tools/params.hpp"
#include "rbpi_tools/recipes.hpp"

namespace rbpi::tools {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int status = 0;
  std::string output;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(RBPI_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int rc = pclose(pipe);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rbpi_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("rbpi_cli_test_" + name);
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every bundle file except metadata.json, which carries the timestamp.
std::map<std::string, std::string> payloads(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() == "metadata.json") continue;
    out[e.path().filename().string()] = slurp(e.path());
  }
  return out;
}

// Small but complete configurations, one per recipe.
RecipeParams quick(const std::string& recipe, std::uint64_t seed) {
  RecipeParams p = default_params(recipe);
  p.seed = seed;
  p.trials = 2;
  p.bags = 8;
  if (recipe == "recalibration-curves") p.n_train = 48;
  if (recipe == "univariate-calibration" || recipe == "covariance-metrics") {
    p.train_sizes = {32};
    p.n_test = 16;
    p.datasets = {p.datasets.front()};
  }
  if (recipe == "jackknife-vs-rmse") p.grid_points = 11;
  if (recipe == "noise-sweep") {
    p.noise_grid = {1.0, 4.0};
    p.n_train = 48;
    p.n_test = 16;
  }
  if (recipe == "bag-sweep") {
    p.bag_grid = {8, 16};
    p.n_train = 48;
    p.n_test = 16;
  }
  if (recipe == "sl-study") {
    p.n_mc_samples = 200;
    p.max_rounds = 3;
    p.methods = {"bootstrap", "random"};
  }
  return p;
}

TEST(Cli, ListsEightRecipes) {
  EXPECT_EQ(recipes().size(), 8u);
  const CliRun r = run_cli("--list");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(std::count(r.output.begin(), r.output.end(), '\n'), 8);
  for (const auto& info : recipes()) EXPECT_NE(r.output.find(info.name), std::string::npos) << info.name;
}

TEST(Cli, EmptyConfigEchoesDefaults) {
  const fs::path cfg = write_file("empty.json", "");
  const Validation v = validate_config(cfg.string(), "bag-sweep");
  EXPECT_TRUE(v.ok) << v.report;
  EXPECT_NE(v.report.find(to_json(default_params("bag-sweep")).dump(2)), std::string::npos) << v.report;

  const CliRun r = run_cli("--validate-config " + cfg.string());
  EXPECT_EQ(r.status, 0);
  for (const auto& info : recipes()) EXPECT_NE(r.output.find("effective parameters: " + info.name), std::string::npos);
}

TEST(Cli, UnknownKeyNamed) {
  const fs::path cfg = write_file("unknown.json", R"({"recipe": "bag-sweep", "bagz": 3})");
  const CliRun r = run_cli("--validate-config " + cfg.string());
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("unknown key 'bagz'"), std::string::npos) << r.output;
}

TEST(Cli, ParseErrorHasLineAndColumn) {
  const fs::path cfg = write_file("broken.json", "{\n  \"seed\": 3,\n  \"trials\": ,\n}\n");
  const ConfigResult c = parse_config(slurp(cfg), "broken.json");
  ASSERT_FALSE(c.ok());
  EXPECT_NE(c.diagnostics.front().message.find("broken.json:3:"), std::string::npos) << c.diagnostics.front().message;
}

TEST(Cli, TypeErrorDiagnosed) {
  const ConfigResult c = parse_config(R"({"trials": "many"})", "t.json");
  EXPECT_FALSE(c.ok());
}

TEST(Cli, ConfigThenFlagPrecedence) {
  const fs::path cfg = write_file("prec.json", R"({"recipe": "jackknife-vs-rmse", "trials": 3, "grid_points": 5, "bags": 4})");
  const fs::path out = scratch("prec");
  const CliRun r = run_cli("--config " + cfg.string() + " --trials 2 --quiet --output-dir " + out.string());
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string meta = slurp(out / "metadata.json");
  EXPECT_NE(meta.find("\"trials\": 2"), std::string::npos) << meta;
  EXPECT_NE(meta.find("\"grid_points\": 5"), std::string::npos) << meta;
  fs::remove_all(out);
}

TEST(Cli, UnknownRecipeIsUsageError) { EXPECT_EQ(run_cli("--recipe nope").status, 1); }

TEST(Cli, MissingFixtureNamesFile) {
  const CliRun r = run_cli("--recipe imbalanced --quiet --fixture-dir /nonexistent-dir --output-dir " + scratch("fx").string());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("/nonexistent-dir/mechanical-properties.csv"), std::string::npos) << r.output;
}

TEST(Cli, WritesOnlyInsideOutputDir) {
  const fs::path out = scratch("inside");
  const CliRun r = run_cli("--recipe jackknife-vs-rmse --trials 1 --bags 4 --quiet --output-dir " + out.string());
  ASSERT_EQ(r.status, 0) << r.output;
  for (const auto& e : fs::recursive_directory_iterator(out)) EXPECT_TRUE(e.is_regular_file());
  EXPECT_TRUE(fs::exists(out / "summary.json"));
  EXPECT_TRUE(fs::exists(out / "metadata.json"));
  fs::remove_all(out);
}

class RecipeSeed : public ::testing::TestWithParam<std::string> {};

TEST_P(RecipeSeed, SameSeedSamePayloads) {
  const std::string recipe = GetParam();
  const fs::path a = scratch(recipe + "_a"), b = scratch(recipe + "_b"), c = scratch(recipe + "_c");
  run_recipe(quick(recipe, 5)).write(a);
  run_recipe(quick(recipe, 5)).write(b);
  run_recipe(quick(recipe, 6)).write(c);
  const auto pa = payloads(a), pb = payloads(b), pc = payloads(c);
  EXPECT_FALSE(pa.empty());
  EXPECT_EQ(pa, pb);
  EXPECT_NE(pa, pc);
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

INSTANTIATE_TEST_SUITE_P(AllRecipes, RecipeSeed,
                         ::testing::Values("recalibration-curves", "univariate-calibration", "covariance-metrics",
                                           "jackknife-vs-rmse", "imbalanced", "noise-sweep", "bag-sweep", "sl-study"),
                         [](const auto& info) {
                           std::string s = info.param;
                           std::replace(s.begin(), s.end(), '-', '_');
                           return s;
                         });

}  // namespace
}  // namespace rbpi::tools
