#include "rbpi_tools/bundle.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace rbpi::tools {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

MetricTable::MetricTable(std::vector<std::string> key_columns) : key_columns_(std::move(key_columns)) {}

void MetricTable::add(std::size_t trial, std::vector<std::string> keys, std::string metric, double value) {
  if (keys.size() != key_columns_.size()) throw std::invalid_argument("MetricTable::add: wrong number of keys");
  entries_.push_back({trial, std::move(keys), std::move(metric), value});
}

std::vector<double> MetricTable::values(const std::vector<std::string>& keys, const std::string& metric) const {
  std::vector<double> out;
  for (const auto& e : entries_) {
    if (e.keys == keys && e.metric == metric) out.push_back(e.value);
  }
  return out;
}

MetricTable::Aggregate aggregate(const std::vector<double>& values) {
  MetricTable::Aggregate a;
  a.n = values.size();
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(a.n);
  if (a.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std_error = std::sqrt(ss / static_cast<double>(a.n - 1) / static_cast<double>(a.n));
  }
  return a;
}

MetricTable::Aggregate MetricTable::aggregate(const std::vector<std::string>& keys, const std::string& metric) const {
  const auto v = values(keys, metric);
  if (v.empty()) {
    std::string label;
    for (const auto& k : keys) label += k + "/";
    throw std::out_of_range("no metric rows for " + label + metric);
  }
  return tools::aggregate(v);
}

std::string MetricTable::to_csv() const {
  std::string out = "trial";
  for (const auto& k : key_columns_) out += "," + k;
  out += ",metric,value\n";
  for (const auto& e : entries_) {
    out += std::to_string(e.trial);
    for (const auto& k : e.keys) out += "," + k;
    out += "," + e.metric + "," + format_number(e.value) + "\n";
  }
  return out;
}

nlohmann::ordered_json MetricTable::summary() const {
  std::vector<std::pair<std::vector<std::string>, std::string>> order;
  std::map<std::pair<std::vector<std::string>, std::string>, std::vector<double>> groups;
  for (const auto& e : entries_) {
    auto key = std::make_pair(e.keys, e.metric);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(e.value);
  }
  auto rows = nlohmann::ordered_json::array();
  for (const auto& key : order) {
    nlohmann::ordered_json row;
    for (std::size_t k = 0; k < key_columns_.size(); ++k) row[key_columns_[k]] = key.first[k];
    const auto a = tools::aggregate(groups[key]);
    row["metric"] = key.second;
    row["n"] = a.n;
    row["mean"] = a.mean;
    row["std_error"] = a.std_error;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

void ResultBundle::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_file(dir / "metadata.json", metadata.dump(2) + "\n");
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  for (const auto& [name, table] : metrics) write_file(dir / (name + ".csv"), table.to_csv());
  for (const auto& [name, text] : tables) write_file(dir / name, text);
}

}  // namespace rbpi::tools
