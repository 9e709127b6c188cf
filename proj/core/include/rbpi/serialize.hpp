#pragma once

#include <filesystem>
#include <string>

#include "rbpi/ensemble.hpp"

namespace rbpi {

/// Self-describing JSON document ("format": "rbpi-forest/1") holding the input
/// schema, trees, bag counts, standardizer, training table and recalibration.
/// Doubles are written with round-trip precision, so a reloaded forest
/// predicts bit-identically.
std::string forest_to_json(const TrainedForest& forest);
TrainedForest forest_from_json(const std::string& text);

void save_forest(const TrainedForest& forest, const std::filesystem::path& path);
TrainedForest load_forest(const std::filesystem::path& path);

}  // namespace rbpi
