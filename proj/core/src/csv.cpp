#include "rbpi/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rbpi/error.hpp"

namespace rbpi {

namespace {

using json = nlohmann::json;

FeatureKind parse_kind(const std::string& s) {
  if (s == "real") return FeatureKind::Real;
  if (s == "categorical") return FeatureKind::Categorical;
  throw IngestionError("schema: column type must be 'real' or 'categorical', got '" + s + "'");
}

ColumnRole parse_role(const std::string& s) {
  if (s == "input") return ColumnRole::Input;
  if (s == "output") return ColumnRole::Output;
  if (s == "filter") return ColumnRole::Filter;
  if (s == "ignore") return ColumnRole::Ignore;
  throw IngestionError("schema: column role must be 'input', 'output', 'filter' or 'ignore', got '" + s + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& cell) {
  static const std::set<std::string> kMissing = {"", "NA", "N/A", "na", "nan", "NaN", "NAN", "null", "NULL"};
  return kMissing.contains(cell);
}

std::optional<double> parse_real(const std::string& cell) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::string where(const std::string& source, std::size_t line, const std::string& column) {
  return source + ":" + std::to_string(line) + " column '" + column + "'";
}

}  // namespace

CsvSchema CsvSchema::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IngestionError(std::string("schema: ") + e.what());
  }
  if (!doc.is_object()) throw IngestionError("schema: top level must be an object");
  static const std::set<std::string> kKeys = {"format", "provenance", "drop_incomplete", "average_duplicates",
                                              "columns", "unlisted"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.contains(key)) throw IngestionError("schema: unknown key '" + key + "'");
  }
  CsvSchema schema;
  schema.provenance = doc.value("provenance", std::string{});
  schema.drop_incomplete = doc.value("drop_incomplete", true);
  schema.average_duplicates = doc.value("average_duplicates", true);
  const auto unlisted = doc.value("unlisted", std::string{"ignore"});
  if (unlisted != "ignore" && unlisted != "input") {
    throw IngestionError("schema: 'unlisted' must be 'ignore' or 'input', got '" + unlisted + "'");
  }
  schema.unlisted_as_inputs = unlisted == "input";
  if (!doc.contains("columns") || !doc["columns"].is_array()) throw IngestionError("schema: 'columns' array required");
  std::set<std::string> seen;
  for (const auto& col : doc["columns"]) {
    CsvColumnSpec spec;
    spec.name = col.at("name").get<std::string>();
    spec.kind = parse_kind(col.value("type", std::string{"real"}));
    spec.role = parse_role(col.value("role", std::string{"input"}));
    if (col.contains("min")) spec.min = col["min"].get<double>();
    if (col.contains("max")) spec.max = col["max"].get<double>();
    if ((spec.min || spec.max) && spec.kind != FeatureKind::Real) {
      throw IngestionError("schema: range filter on categorical column '" + spec.name + "'");
    }
    if (spec.role == ColumnRole::Output && spec.kind != FeatureKind::Real) {
      throw IngestionError("schema: output column '" + spec.name + "' must be real");
    }
    if (!seen.insert(spec.name).second) throw IngestionError("schema: duplicate column '" + spec.name + "'");
    schema.columns.push_back(std::move(spec));
  }
  return schema;
}

CsvSchema CsvSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("schema: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

Dataset parse_csv(const std::string& text, const CsvSchema& declared, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw IngestionError(source + ": missing header row");
  for (auto& h : header) h = trim(h);

  CsvSchema schema = declared;
  if (schema.unlisted_as_inputs) {
    for (const auto& h : header) {
      const bool listed = std::any_of(declared.columns.begin(), declared.columns.end(),
                                      [&](const CsvColumnSpec& c) { return c.name == h; });
      if (!listed) schema.columns.push_back({h, FeatureKind::Real, ColumnRole::Input, {}, {}});
    }
  }

  std::vector<std::size_t> position;
  for (const auto& col : schema.columns) {
    const auto it = std::find(header.begin(), header.end(), col.name);
    if (it == header.end()) throw IngestionError(source + ": unknown column '" + col.name + "' (not in header)");
    position.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  struct RawRow {
    std::size_t line;
    std::vector<std::string> cells;  // schema order
  };
  std::vector<RawRow> kept;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw IngestionError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                           " fields, found " + std::to_string(fields.size()));
    }
    RawRow row{line_no, {}};
    bool keep = true;
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const auto& spec = schema.columns[c];
      std::string cell = trim(fields[position[c]]);
      if (spec.role == ColumnRole::Ignore) {
        row.cells.push_back(std::move(cell));
        continue;
      }
      if (is_missing(cell)) {
        if (!schema.drop_incomplete) {
          throw IngestionError(where(source, line_no, spec.name) + ": missing value");
        }
        keep = false;
      } else if (spec.kind == FeatureKind::Real) {
        const auto v = parse_real(cell);
        if (!v) throw IngestionError(where(source, line_no, spec.name) + ": cannot parse '" + cell + "' as a number");
        if ((spec.min && *v < *spec.min) || (spec.max && *v > *spec.max)) keep = false;
      }
      row.cells.push_back(std::move(cell));
    }
    if (keep) kept.push_back(std::move(row));
  }
  if (kept.empty()) throw IngestionError(source + ": no rows left after preparation");

  Dataset data;
  data.provenance = schema.provenance;
  std::vector<std::size_t> input_cols, output_cols;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const auto& spec = schema.columns[c];
    if (spec.role == ColumnRole::Input) {
      InputColumn column{spec.name, spec.kind, {}};
      if (spec.kind == FeatureKind::Categorical) {
        std::set<std::string> labels;
        for (const auto& r : kept) labels.insert(r.cells[c]);
        column.vocabulary.assign(labels.begin(), labels.end());
      }
      data.schema.columns.push_back(std::move(column));
      input_cols.push_back(c);
    } else if (spec.role == ColumnRole::Output) {
      data.output_names.push_back(spec.name);
      output_cols.push_back(c);
    }
  }
  if (input_cols.empty()) throw IngestionError(source + ": schema declares no input columns");
  if (output_cols.empty()) throw IngestionError(source + ": schema declares no output columns");

  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> outputs;
  std::vector<std::size_t> multiplicity;
  std::map<std::vector<double>, std::size_t> first_seen;
  for (const auto& r : kept) {
    std::vector<double> x;
    for (std::size_t k = 0; k < input_cols.size(); ++k) {
      const auto& column = data.schema.columns[k];
      const std::string& cell = r.cells[input_cols[k]];
      if (column.categorical()) {
        const auto it = std::lower_bound(column.vocabulary.begin(), column.vocabulary.end(), cell);
        x.push_back(static_cast<double>(it - column.vocabulary.begin()));
      } else {
        x.push_back(*parse_real(cell));
      }
    }
    std::vector<double> y;
    for (std::size_t c : output_cols) y.push_back(*parse_real(r.cells[c]));

    if (schema.average_duplicates) {
      const auto [it, inserted] = first_seen.emplace(x, inputs.size());
      if (!inserted) {
        auto& acc = outputs[it->second];
        for (std::size_t j = 0; j < y.size(); ++j) acc[j] += y[j];
        ++multiplicity[it->second];
        continue;
      }
    }
    inputs.push_back(std::move(x));
    outputs.push_back(std::move(y));
    multiplicity.push_back(1);
  }

  data.inputs.resize(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(input_cols.size()));
  data.outputs.resize(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(output_cols.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t k = 0; k < input_cols.size(); ++k) {
      data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = inputs[i][k];
    }
    for (std::size_t j = 0; j < output_cols.size(); ++j) {
      data.outputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          outputs[i][j] / static_cast<double>(multiplicity[i]);
    }
  }
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open CSV file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, path.string());
}

}  // namespace rbpi
