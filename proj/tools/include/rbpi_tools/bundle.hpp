#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace rbpi::tools {

/// Long-format metric table: one row per (trial, keys..., metric).
class MetricTable {
 public:
  struct Aggregate {
    std::size_t n = 0;
    double mean = 0.0;
    double std_error = 0.0;  // sample std / sqrt(n); 0 when n < 2
  };

  MetricTable() = default;
  explicit MetricTable(std::vector<std::string> key_columns);

  void add(std::size_t trial, std::vector<std::string> keys, std::string metric, double value);

  std::vector<double> values(const std::vector<std::string>& keys, const std::string& metric) const;
  /// Throws std::out_of_range when no row matches.
  Aggregate aggregate(const std::vector<std::string>& keys, const std::string& metric) const;

  const std::vector<std::string>& key_columns() const { return key_columns_; }
  std::size_t size() const { return entries_.size(); }

  std::string to_csv() const;
  /// Aggregates in first-appearance order of (keys, metric).
  nlohmann::ordered_json summary() const;

 private:
  struct Entry {
    std::size_t trial;
    std::vector<std::string> keys;
    std::string metric;
    double value;
  };
  std::vector<std::string> key_columns_;
  std::vector<Entry> entries_;
};

MetricTable::Aggregate aggregate(const std::vector<double>& values);

struct ResultBundle {
  nlohmann::ordered_json metadata;              // recipe, parameters, version, timestamp
  std::map<std::string, MetricTable> metrics;   // written as <name>.csv
  std::map<std::string, std::string> tables;    // extra CSV payloads, file name -> text
  nlohmann::ordered_json summary;               // written as summary.json
  std::vector<std::string> warnings;

  /// Writes metadata.json, summary.json and every CSV into `dir` only.
  void write(const std::filesystem::path& dir) const;
};

/// Shortest round-trip decimal form, used for every number in payload files.
std::string format_number(double v);

}  // namespace rbpi::tools
