#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rbpi/sequential.hpp"

namespace rbpi::tools {

/// Every tunable of every recipe. Each recipe reads the subset it needs;
/// default_params() fills in that recipe's defaults.
struct RecipeParams {
  std::string recipe;
  std::uint64_t seed = 1;
  std::size_t trials = 0;
  std::size_t bags = 64;
  double noise = 2.0;
  double p = 0.683;    // recalibration confidence level
  double p_c = 0.683;  // coverage level for standard confidence
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  std::vector<std::string> outputs;  // output selection for real datasets
  std::size_t n_train = 128;
  std::size_t n_test = 128;
  std::vector<std::size_t> train_sizes;
  std::vector<double> p_grid;
  std::vector<double> noise_grid;
  std::vector<std::size_t> bag_grid;
  double rho = 0.9;
  double quadratic_f = 0.5;
  std::size_t grid_points = 100;
  std::size_t n_initial = 16;
  std::size_t n_mc_samples = 10000;
  std::size_t max_rounds = 0;
  std::uint64_t dataset_seed = 0;
  std::vector<Objective> objectives;
  std::string stratify_column;
  std::map<std::string, std::size_t> train_strata;
  std::map<std::string, std::size_t> test_strata;
  std::size_t threads = 1;
  std::string fixture_dir;
  std::string schema_dir;
  bool full = false;

  /// Keys set explicitly by a config file or a flag; per-dataset defaults
  /// never override these.
  std::set<std::string> explicit_keys;

  bool is_explicit(const std::string& key) const { return explicit_keys.contains(key); }
};

/// Error in user-supplied configuration (maps to exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Defaults for a recipe; `full` restores the long trial counts for the
/// long real-data studies. Throws ConfigError for an unknown recipe.
RecipeParams default_params(std::string_view recipe, bool full = false);

/// Config keys a recipe reads (plus the common ones).
const std::set<std::string>& recipe_keys(std::string_view recipe);
const std::set<std::string>& all_keys();

nlohmann::ordered_json to_json(const RecipeParams& params);

struct Diagnostic {
  enum class Level { Error, Warning } level = Level::Error;
  std::string message;
};

struct ConfigResult {
  std::optional<std::string> recipe;  // "recipe" key, if present
  nlohmann::json values;              // parsed object (empty for an empty file)
  std::vector<Diagnostic> diagnostics;

  bool ok() const;
};

/// Parse config text: JSON object, blank text counts as {}. Syntax errors
/// carry line and column; unknown keys and type mismatches are reported
/// without aborting the scan.
ConfigResult parse_config(const std::string& text, const std::string& source);

/// Overlay config values onto `params`, marking each key explicit. Throws
/// ConfigError on type mismatch.
void apply_config(RecipeParams& params, const nlohmann::json& values);

/// Check a config file without running anything. The returned text lists
/// diagnostics, then the effective parameters (defaults filled in) for the
/// named recipe, or for every recipe if none is named.
struct Validation {
  bool ok = true;
  std::string report;
};
Validation validate_config(const std::string& path, std::optional<std::string> recipe = std::nullopt);

}  // namespace rbpi::tools
