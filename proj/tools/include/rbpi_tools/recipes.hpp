#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rbpi/error.hpp"
#include "rbpi_tools/bundle.hpp"
#include "rbpi_tools/params.hpp"

namespace rbpi::tools {

struct RecipeInfo {
  std::string name;
  std::string study;  // what the recipe reproduces
};

const std::vector<RecipeInfo>& recipes();
std::string list_recipes();

/// A real-data recipe could not find its CSV or schema (maps to exit code 2).
class FixtureError : public IngestionError {
 public:
  using IngestionError::IngestionError;
};

/// Run one recipe. The bundle is returned; writing it is up to the caller.
ResultBundle run_recipe(const RecipeParams& params);

/// Version string embedded in bundle metadata.
std::string_view code_version();

}  // namespace rbpi::tools
