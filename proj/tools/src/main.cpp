#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rbpi/error.hpp"
#include "rbpi_tools/recipes.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rbpi::tools::ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rbpi::tools;

  CLI::App app{"Recalibrated-bootstrap experiment runner"};
  app.set_version_flag("--version", std::string(code_version()));

  bool list = false;
  std::string validate;
  std::string recipe;
  std::string config_path;
  std::string output_dir;
  std::string fixture_dir;
  std::uint64_t seed = 0;
  std::size_t trials = 0, bags = 0, threads = 0;
  double noise = 0.0, p = 0.0;
  std::vector<std::string> methods;
  bool full = false;
  bool quiet = false;

  app.add_flag("--list", list, "List the available recipes");
  app.add_option("--validate-config", validate, "Check a config file and print the effective parameters");
  app.add_option("--recipe", recipe, "Recipe to run");
  app.add_option("--config", config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", seed, "Base random seed");
  auto* trials_opt = app.add_option("--trials", trials, "Number of trials");
  auto* bags_opt = app.add_option("--bags", bags, "Number of bags (trees) per forest");
  auto* noise_opt = app.add_option("--noise", noise, "Noise magnitude for synthetic data");
  auto* p_opt = app.add_option("--p", p, "Recalibration confidence level");
  auto* methods_opt = app.add_option("--methods,--method", methods, "Methods to compare")->delimiter(',');
  app.add_option("--output-dir", output_dir, "Directory for the result bundle (default results/<recipe>)");
  auto* fixture_opt = app.add_option("--fixture-dir", fixture_dir, "Directory holding real-data CSV fixtures");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_flag("--full", full, "Full trial counts for the long real-data studies");
  app.add_flag("--quiet", quiet, "Do not print the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsageError;
  }

  if (list) {
    std::cout << list_recipes();
    return 0;
  }
  if (!validate.empty()) {
    const auto v = validate_config(validate, recipe.empty() ? std::nullopt : std::optional<std::string>(recipe));
    (v.ok ? std::cout : std::cerr) << v.report;
    return v.ok ? 0 : kUsageError;
  }

  try {
    ConfigResult config;
    if (!config_path.empty()) {
      config = parse_config(read_file(config_path), config_path);
      if (!config.ok()) {
        for (const auto& d : config.diagnostics) std::cerr << "error: " << d.message << "\n";
        return kUsageError;
      }
    }
    if (recipe.empty() && config.recipe) recipe = *config.recipe;
    if (recipe.empty()) {
      std::cerr << "error: no recipe given (use --recipe NAME or --list)\n";
      return kUsageError;
    }
    const bool config_full = config.values.contains("full") && config.values["full"].get<bool>();
    RecipeParams params = default_params(recipe, full || config_full);
    apply_config(params, config.values);
    if (full) params.full = true;
    auto mark = [&](CLI::Option* opt, const char* key, auto apply) {
      if (opt->count() > 0) {
        apply();
        params.explicit_keys.insert(key);
      }
    };
    mark(seed_opt, "seed", [&] { params.seed = seed; });
    mark(trials_opt, "trials", [&] { params.trials = trials; });
    mark(bags_opt, "bags", [&] { params.bags = bags; });
    mark(noise_opt, "noise", [&] { params.noise = noise; });
    mark(p_opt, "p", [&] { params.p = p; });
    mark(methods_opt, "methods", [&] { params.methods = methods; });
    mark(fixture_opt, "fixture_dir", [&] { params.fixture_dir = fixture_dir; });
    mark(threads_opt, "threads", [&] { params.threads = threads; });

    const ResultBundle bundle = run_recipe(params);
    const std::filesystem::path dir =
        output_dir.empty() ? std::filesystem::path("results") / recipe : std::filesystem::path(output_dir);
    bundle.write(dir);
    for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
    if (!quiet) std::cout << bundle.summary.dump(2) << "\n";
    std::cerr << "wrote " << dir.string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const rbpi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
}
