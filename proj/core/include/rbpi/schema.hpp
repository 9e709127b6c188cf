#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace rbpi {

enum class FeatureKind { Real, Categorical };

/// One model input column. Categorical values are stored in feature matrices
/// as their integer id (index into `vocabulary`) held in a double.
struct InputColumn {
  std::string name;
  FeatureKind kind = FeatureKind::Real;
  std::vector<std::string> vocabulary;

  bool categorical() const { return kind == FeatureKind::Categorical; }
  bool operator==(const InputColumn&) const = default;
};

struct InputSchema {
  std::vector<InputColumn> columns;

  std::size_t size() const { return columns.size(); }
  bool operator==(const InputSchema&) const = default;
};

}  // namespace rbpi
