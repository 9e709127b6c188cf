#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rbpi/datasets.hpp"

namespace rbpi {

enum class ColumnRole { Input, Output, Filter, Ignore };

/// Declared role and type of one CSV column. `min`/`max` turn the column
/// into a closed-range row filter.
struct CsvColumnSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Real;
  ColumnRole role = ColumnRole::Input;
  std::optional<double> min;
  std::optional<double> max;
};

/// Ingestion schema, read from a JSON file:
///
///   {
///     "format": "rbpi-csv-schema/1",
///     "provenance": "mechanical-properties",
///     "drop_incomplete": true,
///     "average_duplicates": true,
///     "columns": [
///       {"name": "temperature_c", "type": "real", "role": "filter", "min": 20, "max": 25},
///       {"name": "test_type", "type": "categorical", "role": "input"},
///       {"name": "youngs_modulus", "type": "real", "role": "output"}
///     ]
///   }
///
/// CSV columns not named in the schema are ignored, unless "unlisted" is
/// "input": then each of them becomes a real input column, in header order
/// (the shape of a pre-featurized table with many descriptor columns).
struct CsvSchema {
  std::vector<CsvColumnSpec> columns;
  bool unlisted_as_inputs = false;
  bool drop_incomplete = true;
  bool average_duplicates = true;
  std::string provenance;

  static CsvSchema parse(const std::string& json_text);
  static CsvSchema load(const std::filesystem::path& path);
};

/// Split one CSV record (RFC 4180 quoting) into fields.
std::vector<std::string> split_csv_line(const std::string& line);

/// Read a comma-separated file with a header row and apply the schema's
/// preparation rules in order: complete-row filter, range filters,
/// categorical encoding (vocabulary sorted by label), and averaging of
/// outputs over rows with identical inputs (first-appearance order kept).
/// Throws IngestionError with line/column context.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Same as load_csv over in-memory text; `source` labels error messages.
Dataset parse_csv(const std::string& text, const CsvSchema& schema, const std::string& source = "<memory>");

}  // namespace rbpi
