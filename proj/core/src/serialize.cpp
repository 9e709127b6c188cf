#include "rbpi/serialize.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rbpi/error.hpp"

namespace rbpi {

namespace {

using json = nlohmann::json;

constexpr const char* kFormat = "rbpi-forest/1";

json vec_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vec_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json mat_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix mat_from_json(const json& j) {
  Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.rows()) throw IngestionError("forest: matrix row count mismatch");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& row = data[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) throw IngestionError("forest: matrix column count mismatch");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json tree_to_json(const TreeModel& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"category", n.category},
                     {"right_categories", n.right_categories},
                     {"unseen_left", n.unseen_left},
                     {"left", n.left},
                     {"right", n.right},
                     {"leaf", n.leaf},
                     {"weight", n.weight}});
  }
  return {{"n_outputs", tree.n_outputs()}, {"nodes", std::move(nodes)}, {"leaf_values", tree.leaf_values()}};
}

TreeModel tree_from_json(const json& j, const InputSchema& schema) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at("feature").get<std::int32_t>();
    node.threshold = n.at("threshold").get<double>();
    node.category = n.at("category").get<std::uint32_t>();
    node.right_categories = n.at("right_categories").get<std::vector<std::uint32_t>>();
    node.unseen_left = n.at("unseen_left").get<bool>();
    node.left = n.at("left").get<std::uint32_t>();
    node.right = n.at("right").get<std::uint32_t>();
    node.leaf = n.at("leaf").get<std::uint32_t>();
    node.weight = n.at("weight").get<double>();
    nodes.push_back(std::move(node));
  }
  return TreeModel(std::move(nodes), j.at("leaf_values").get<std::vector<double>>(),
                   j.at("n_outputs").get<std::size_t>(), schema);
}

}  // namespace

std::string forest_to_json(const TrainedForest& forest) {
  json schema = json::array();
  for (const auto& c : forest.schema().columns) {
    schema.push_back({{"name", c.name},
                      {"kind", c.categorical() ? "categorical" : "real"},
                      {"vocabulary", c.vocabulary}});
  }
  json trees = json::array();
  for (const auto& t : forest.trees()) trees.push_back(tree_to_json(t));
  json recal = nullptr;
  if (forest.calibrated()) {
    const auto& r = forest.recalibration();
    recal = {{"alpha", vec_to_json(r.alpha)},
             {"p", r.p},
             {"usable_rows", r.usable_rows},
             {"usable_per_output", r.usable_per_output},
             {"clamped", r.clamped}};
  }
  const json doc = {
      {"format", kFormat},
      {"schema", std::move(schema)},
      {"output_names", forest.output_names()},
      {"standardizer", {{"mean", vec_to_json(forest.standardizer().mean)}, {"scale", vec_to_json(forest.standardizer().scale)}}},
      {"bag_counts",
       {{"n_bags", forest.bag_counts().n_bags()}, {"n_rows", forest.bag_counts().n_rows()}, {"counts", forest.bag_counts().raw()}}},
      {"training_inputs", mat_to_json(forest.training_inputs())},
      {"training_outputs", mat_to_json(forest.training_outputs())},
      {"recalibration", std::move(recal)},
      {"trees", std::move(trees)},
  };
  return doc.dump();
}

TrainedForest forest_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IngestionError(std::string("forest: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormat) {
      throw IngestionError("forest: unsupported format '" + doc.at("format").get<std::string>() + "'");
    }
    InputSchema schema;
    for (const auto& c : doc.at("schema")) {
      const auto kind = c.at("kind").get<std::string>();
      schema.columns.push_back({c.at("name").get<std::string>(),
                                kind == "categorical" ? FeatureKind::Categorical : FeatureKind::Real,
                                c.at("vocabulary").get<std::vector<std::string>>()});
    }
    std::vector<TreeModel> trees;
    for (const auto& t : doc.at("trees")) trees.push_back(tree_from_json(t, schema));
    const auto& bc = doc.at("bag_counts");
    BagCounts bags(bc.at("n_bags").get<std::size_t>(), bc.at("n_rows").get<std::size_t>(),
                   bc.at("counts").get<std::vector<std::uint32_t>>());
    Standardizer standardizer{vec_from_json(doc.at("standardizer").at("mean")),
                              vec_from_json(doc.at("standardizer").at("scale"))};
    TrainedForest forest(std::move(trees), std::move(bags), std::move(standardizer), std::move(schema),
                         doc.at("output_names").get<std::vector<std::string>>(), mat_from_json(doc.at("training_inputs")),
                         mat_from_json(doc.at("training_outputs")));
    const auto& recal = doc.at("recalibration");
    if (!recal.is_null()) {
      RecalibrationFactor r;
      r.alpha = vec_from_json(recal.at("alpha"));
      r.p = recal.at("p").get<double>();
      r.usable_rows = recal.at("usable_rows").get<std::size_t>();
      r.usable_per_output = recal.at("usable_per_output").get<std::vector<std::size_t>>();
      r.clamped = recal.at("clamped").get<bool>();
      forest.set_recalibration(std::move(r));
    }
    return forest;
  } catch (const json::exception& e) {
    throw IngestionError(std::string("forest: malformed document: ") + e.what());
  }
}

void save_forest(const TrainedForest& forest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write forest file " + path.string());
  out << forest_to_json(forest);
}

TrainedForest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open forest file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return forest_from_json(buf.str());
}

}  // namespace rbpi
