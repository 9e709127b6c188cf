#include <gtest/gtest.h>

#include <filesystem>

#include "generators.hpp"
#include "rbpi/datasets.hpp"
#include "rbpi/error.hpp"
#include "rbpi/intervals.hpp"
#include "rbpi/serialize.hpp"

namespace rbpi {
namespace {

Dataset mixed_dataset(RngStream& rng) {
  Dataset d = gen_multi_output("friedman-grosse", 48, 2.0, 0.9, 0.5, rng);
  d.schema.columns.push_back({"phase", FeatureKind::Categorical, {"A", "B", "C"}});
  d.inputs.conservativeResize(Eigen::NoChange, d.inputs.cols() + 1);
  for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) d.inputs(i, d.inputs.cols() - 1) = static_cast<double>(rng.uniform_index(3));
  return d;
}

void expect_identical(const TrainedForest& a, const TrainedForest& b, RngStream& rng) {
  EXPECT_EQ(a.bag_counts(), b.bag_counts());
  EXPECT_EQ(a.schema(), b.schema());
  EXPECT_EQ(a.output_names(), b.output_names());
  EXPECT_TRUE((a.recalibration().alpha.array() == b.recalibration().alpha.array()).all());
  for (int q = 0; q < 50; ++q) {
    std::vector<double> x(a.n_features());
    for (std::size_t f = 0; f + 1 < x.size(); ++f) x[f] = rng.uniform(-0.2, 1.2);
    x.back() = static_cast<double>(rng.uniform_index(4));  // includes an unseen category
    const Matrix pa = a.predict_per_tree(x), pb = b.predict_per_tree(x);
    ASSERT_TRUE((pa.array() == pb.array()).all());
    const auto da = prediction_distribution(a, x, CorrelationMethod::Bootstrap);
    const auto db = prediction_distribution(b, x, CorrelationMethod::Bootstrap);
    ASSERT_TRUE((da.cov.array() == db.cov.array()).all());
  }
}

TEST(Serialize, RoundTripIsBitExact) {
  RngStream rng(501);
  const Dataset d = mixed_dataset(rng);
  TrainedForest f = fit_forest(d, 16, RngStream(502));
  calibrate(f);
  const std::string text = forest_to_json(f);
  const TrainedForest g = forest_from_json(text);
  expect_identical(f, g, rng);
  EXPECT_EQ(forest_to_json(g), text);
}

TEST(Serialize, FileRoundTrip) {
  RngStream rng(503);
  TrainedForest f = fit_forest(gen_friedman_grosse(40, 1.0, rng), 8, RngStream(504));
  calibrate(f);
  const auto path = std::filesystem::temp_directory_path() / "rbpi_forest_roundtrip.json";
  save_forest(f, path);
  const TrainedForest g = load_forest(path);
  std::filesystem::remove(path);
  expect_identical(f, g, rng);
}

TEST(Serialize, RejectsWrongFormat) {
  EXPECT_THROW(forest_from_json(R"({"format": "something-else/1"})"), Error);
  EXPECT_THROW(forest_from_json("not json"), Error);
}

}  // namespace
}  // namespace rbpi
