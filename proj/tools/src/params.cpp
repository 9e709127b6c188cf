#include "rbpi_tools/params.hpp"

#include <fstream>
#include <sstream>

#include "rbpi_tools/recipes.hpp"

#ifndef RBPI_DATA_DIR
#define RBPI_DATA_DIR "data"
#endif

namespace rbpi::tools {

namespace {

using json = nlohmann::json;

const std::set<std::string> kCommonKeys = {"format", "recipe", "seed",     "trials",     "bags",       "threads",
                                           "p",      "p_c",    "datasets", "fixture_dir", "schema_dir", "full"};

const std::map<std::string, std::set<std::string>, std::less<>> kRecipeKeys = {
    {"recalibration-curves", {"noise", "n_train", "p_grid", "outputs"}},
    {"univariate-calibration", {"noise", "n_test", "train_sizes", "outputs"}},
    {"covariance-metrics", {"noise", "n_test", "train_sizes", "methods", "rho", "quadratic_f", "outputs"}},
    {"jackknife-vs-rmse", {"noise", "n_train", "grid_points"}},
    {"imbalanced", {"outputs", "stratify_column", "train_strata", "test_strata", "methods"}},
    {"noise-sweep", {"noise_grid", "n_train", "n_test", "methods", "rho", "quadratic_f"}},
    {"bag-sweep", {"noise", "n_train", "n_test", "bag_grid", "methods", "rho", "quadratic_f"}},
    {"sl-study", {"methods", "n_initial", "n_mc_samples", "max_rounds", "objectives", "dataset_seed"}},
};

std::string direction_symbol(Direction d) { return d == Direction::GreaterThan ? ">" : "<"; }

Direction parse_direction(const std::string& s) {
  if (s == ">" || s == "greater" || s == "greater-than") return Direction::GreaterThan;
  if (s == "<" || s == "less" || s == "less-than") return Direction::LessThan;
  throw ConfigError("objective direction must be '>' or '<', got '" + s + "'");
}

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' has the wrong type (got " + std::string(v.type_name()) + ")");
  }
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError("key '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError("key '" + key + "' must be an array of non-negative integers");
  std::vector<std::size_t> out;
  for (const auto& e : v) out.push_back(get_count(e, key));
  return out;
}

std::map<std::string, std::size_t> get_strata(const json& v, const std::string& key) {
  if (!v.is_object()) throw ConfigError("key '" + key + "' must be an object of label -> count");
  std::map<std::string, std::size_t> out;
  for (const auto& [label, count] : v.items()) out[label] = get_count(count, key);
  return out;
}

std::vector<Objective> get_objectives(const json& v) {
  if (!v.is_array()) throw ConfigError("key 'objectives' must be an array");
  std::vector<Objective> out;
  for (const auto& o : v) {
    if (!o.is_object() || !o.contains("output") || !o.contains("threshold")) {
      throw ConfigError("each objective needs 'output', 'direction' and 'threshold'");
    }
    for (const auto& [k, _] : o.items()) {
      if (k != "output" && k != "direction" && k != "threshold") {
        throw ConfigError("unknown objective key '" + k + "'");
      }
    }
    Objective obj;
    obj.output = get_as<std::string>(o["output"], "objectives.output");
    obj.direction = parse_direction(o.value("direction", std::string(">")));
    obj.threshold = get_as<double>(o["threshold"], "objectives.threshold");
    out.push_back(std::move(obj));
  }
  return out;
}

void apply_key(RecipeParams& p, const std::string& key, const json& v) {
  if (key == "format") {
    if (get_as<std::string>(v, key) != "rbpi-config/1") throw ConfigError("unsupported config format");
  } else if (key == "recipe") {
    get_as<std::string>(v, key);
  } else if (key == "seed") {
    p.seed = get_as<std::uint64_t>(v, key);
  } else if (key == "trials") {
    p.trials = get_count(v, key);
  } else if (key == "bags") {
    p.bags = get_count(v, key);
  } else if (key == "threads") {
    p.threads = get_count(v, key);
  } else if (key == "noise") {
    p.noise = get_as<double>(v, key);
  } else if (key == "p") {
    p.p = get_as<double>(v, key);
  } else if (key == "p_c") {
    p.p_c = get_as<double>(v, key);
  } else if (key == "methods") {
    p.methods = get_as<std::vector<std::string>>(v, key);
  } else if (key == "datasets") {
    p.datasets = get_as<std::vector<std::string>>(v, key);
  } else if (key == "outputs") {
    p.outputs = get_as<std::vector<std::string>>(v, key);
  } else if (key == "n_train") {
    p.n_train = get_count(v, key);
  } else if (key == "n_test") {
    p.n_test = get_count(v, key);
  } else if (key == "train_sizes") {
    p.train_sizes = get_counts(v, key);
  } else if (key == "p_grid") {
    p.p_grid = get_as<std::vector<double>>(v, key);
  } else if (key == "noise_grid") {
    p.noise_grid = get_as<std::vector<double>>(v, key);
  } else if (key == "bag_grid") {
    p.bag_grid = get_counts(v, key);
  } else if (key == "rho") {
    p.rho = get_as<double>(v, key);
  } else if (key == "quadratic_f") {
    p.quadratic_f = get_as<double>(v, key);
  } else if (key == "grid_points") {
    p.grid_points = get_count(v, key);
  } else if (key == "n_initial") {
    p.n_initial = get_count(v, key);
  } else if (key == "n_mc_samples") {
    p.n_mc_samples = get_count(v, key);
  } else if (key == "max_rounds") {
    p.max_rounds = get_count(v, key);
  } else if (key == "dataset_seed") {
    p.dataset_seed = get_as<std::uint64_t>(v, key);
  } else if (key == "objectives") {
    p.objectives = get_objectives(v);
  } else if (key == "stratify_column") {
    p.stratify_column = get_as<std::string>(v, key);
  } else if (key == "train_strata") {
    p.train_strata = get_strata(v, key);
  } else if (key == "test_strata") {
    p.test_strata = get_strata(v, key);
  } else if (key == "fixture_dir") {
    p.fixture_dir = get_as<std::string>(v, key);
  } else if (key == "schema_dir") {
    p.schema_dir = get_as<std::string>(v, key);
  } else if (key == "full") {
    p.full = get_as<bool>(v, key);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
  p.explicit_keys.insert(key);
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

RecipeParams default_params(std::string_view recipe, bool full) {
  RecipeParams p;
  p.recipe = std::string(recipe);
  p.full = full;
  p.fixture_dir = RBPI_DATA_DIR "/fixtures";
  p.schema_dir = RBPI_DATA_DIR "/schemas";
  const std::vector<std::string> all_methods = {"trivial", "training-data", "jackknife", "bootstrap"};
  if (recipe == "recalibration-curves") {
    p.datasets = {"friedman-grosse"};
    p.trials = 100;
    for (int k = 1; k <= 19; ++k) {
      p.p_grid.push_back(k / 20.0);
      if (k == 13) p.p_grid.push_back(0.683);
    }
  } else if (recipe == "univariate-calibration") {
    p.datasets = {"friedman-grosse"};
    p.trials = 64;
    p.train_sizes = {32, 64, 128};
  } else if (recipe == "covariance-metrics") {
    p.datasets = {"friedman-grosse-multi", "friedman-silverman-multi", "mechanical-properties"};
    if (full) p.datasets.push_back("thermoelectrics");
    p.trials = 16;
    p.train_sizes = {32, 64, 128};
    p.methods = all_methods;
  } else if (recipe == "jackknife-vs-rmse") {
    p.datasets = {"tophat", "cubic"};
    p.trials = 250;
    p.n_train = 64;
    p.noise = 0.1;
  } else if (recipe == "imbalanced") {
    p.datasets = {"mechanical-properties"};
    p.outputs = {"youngs_modulus_gpa"};
    p.trials = 50;
    p.methods = {"bootstrap", "oob-constant"};
    p.stratify_column = "test_type";
    p.train_strata = {{"tension", 60}, {"compression", 4}};
    p.test_strata = {{"compression", 32}};
  } else if (recipe == "noise-sweep") {
    p.datasets = {"friedman-grosse-multi"};
    p.trials = 100;
    p.noise_grid = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    p.methods = all_methods;
  } else if (recipe == "bag-sweep") {
    p.datasets = {"friedman-grosse-multi"};
    p.trials = 16;
    p.noise = 1.0;
    p.bag_grid = {16, 32, 64, 128};
    p.methods = all_methods;
  } else if (recipe == "sl-study") {
    p.datasets = {"sl-synthetic"};
    p.trials = 64;
    p.methods = {"trivial", "training-data", "jackknife", "bootstrap", "random"};
    p.dataset_seed = 6;
  } else {
    throw ConfigError("unknown recipe '" + std::string(recipe) + "' (see --list)");
  }
  return p;
}

const std::set<std::string>& all_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = kCommonKeys;
    for (const auto& [_, extra] : kRecipeKeys) k.insert(extra.begin(), extra.end());
    return k;
  }();
  return keys;
}

const std::set<std::string>& recipe_keys(std::string_view recipe) {
  static std::map<std::string, std::set<std::string>, std::less<>> cache = [] {
    std::map<std::string, std::set<std::string>, std::less<>> m;
    for (const auto& [name, extra] : kRecipeKeys) {
      auto k = kCommonKeys;
      k.insert(extra.begin(), extra.end());
      m[name] = std::move(k);
    }
    return m;
  }();
  const auto it = cache.find(recipe);
  if (it == cache.end()) throw ConfigError("unknown recipe '" + std::string(recipe) + "' (see --list)");
  return it->second;
}

nlohmann::ordered_json to_json(const RecipeParams& p) {
  nlohmann::ordered_json j;
  j["recipe"] = p.recipe;
  j["seed"] = p.seed;
  j["trials"] = p.trials;
  j["bags"] = p.bags;
  j["threads"] = p.threads;
  j["p"] = p.p;
  j["p_c"] = p.p_c;
  j["datasets"] = p.datasets;
  j["fixture_dir"] = p.fixture_dir;
  j["schema_dir"] = p.schema_dir;
  j["full"] = p.full;
  const auto& keys = recipe_keys(p.recipe);
  auto put = [&](const char* key, auto value) {
    if (keys.contains(key)) j[key] = value;
  };
  put("noise", p.noise);
  put("methods", p.methods);
  put("outputs", p.outputs);
  put("n_train", p.n_train);
  put("n_test", p.n_test);
  put("train_sizes", p.train_sizes);
  put("p_grid", p.p_grid);
  put("noise_grid", p.noise_grid);
  put("bag_grid", p.bag_grid);
  put("rho", p.rho);
  put("quadratic_f", p.quadratic_f);
  put("grid_points", p.grid_points);
  put("n_initial", p.n_initial);
  put("n_mc_samples", p.n_mc_samples);
  put("max_rounds", p.max_rounds);
  put("dataset_seed", p.dataset_seed);
  put("stratify_column", p.stratify_column);
  put("train_strata", p.train_strata);
  put("test_strata", p.test_strata);
  if (keys.contains("objectives")) {
    auto objs = nlohmann::ordered_json::array();
    for (const auto& o : p.objectives) {
      objs.push_back({{"output", o.output}, {"direction", direction_symbol(o.direction)}, {"threshold", o.threshold}});
    }
    j["objectives"] = objs;
  }
  return j;
}

bool ConfigResult::ok() const {
  for (const auto& d : diagnostics) {
    if (d.level == Diagnostic::Level::Error) return false;
  }
  return true;
}

ConfigResult parse_config(const std::string& text, const std::string& source) {
  ConfigResult result;
  result.values = json::object();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return result;
  try {
    result.values = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    result.diagnostics.push_back({Diagnostic::Level::Error, source + ":" + std::to_string(line) + ":" +
                                                                std::to_string(col) + ": " + e.what()});
    result.values = json::object();
    return result;
  }
  if (!result.values.is_object()) {
    result.diagnostics.push_back({Diagnostic::Level::Error, source + ": top level must be a JSON object"});
    result.values = json::object();
    return result;
  }
  RecipeParams scratch;
  for (const auto& [key, value] : result.values.items()) {
    try {
      apply_key(scratch, key, value);
    } catch (const ConfigError& e) {
      result.diagnostics.push_back({Diagnostic::Level::Error, source + ": " + e.what()});
    }
  }
  if (result.values.contains("recipe") && result.values["recipe"].is_string()) {
    result.recipe = result.values["recipe"].get<std::string>();
  }
  return result;
}

void apply_config(RecipeParams& params, const json& values) {
  for (const auto& [key, value] : values.items()) apply_key(params, key, value);
}

Validation validate_config(const std::string& path, std::optional<std::string> recipe) {
  Validation v;
  std::ostringstream report;
  std::ifstream in(path);
  if (!in) {
    v.ok = false;
    v.report = "error: cannot open config file " + path + "\n";
    return v;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const ConfigResult parsed = parse_config(buf.str(), path);
  for (const auto& d : parsed.diagnostics) report << "error: " << d.message << "\n";
  v.ok = parsed.ok();
  if (!recipe) recipe = parsed.recipe;

  const bool full = parsed.values.contains("full") && parsed.values["full"].is_boolean() && parsed.values["full"].get<bool>();
  std::vector<std::string> names;
  if (recipe) {
    names.push_back(*recipe);
  } else {
    for (const auto& r : recipes()) names.push_back(r.name);
  }
  for (const auto& name : names) {
    RecipeParams params;
    try {
      params = default_params(name, full);
    } catch (const ConfigError& e) {
      report << "error: " << e.what() << "\n";
      v.ok = false;
      continue;
    }
    if (recipe) {
      const auto& keys = recipe_keys(name);
      for (const auto& [key, _] : parsed.values.items()) {
        if (all_keys().contains(key) && !keys.contains(key)) {
          report << "warning: " << path << ": key '" << key << "' is not used by recipe " << name << "\n";
        }
      }
    }
    if (parsed.ok()) apply_config(params, parsed.values);
    report << "# effective parameters: " << name << "\n" << to_json(params).dump(2) << "\n";
  }
  if (v.ok) report << "config OK\n";
  v.report = report.str();
  return v;
}

}  // namespace rbpi::tools
