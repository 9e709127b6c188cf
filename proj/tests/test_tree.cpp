#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "generators.hpp"
#include "rbpi/datasets.hpp"
#include "rbpi/tree.hpp"

namespace rbpi {
namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

std::uint32_t child(const TreeNode& node, std::span<const double> x, const InputSchema& schema) {
  const double v = x[static_cast<std::size_t>(node.feature)];
  if (!schema.columns[static_cast<std::size_t>(node.feature)].categorical()) return v <= node.threshold ? node.left : node.right;
  const auto cat = static_cast<std::uint32_t>(v);
  if (cat == node.category) return node.left;
  const auto& rc = node.right_categories;
  if (std::find(rc.begin(), rc.end(), cat) != rc.end()) return node.right;
  return node.unseen_left ? node.left : node.right;
}

TEST(FitTree, SingleRowIsLeaf) {
  const Matrix x = column({0.3});
  Matrix y(1, 2);
  y << 4.0, -1.0;
  const TreeModel t = fit_tree(x, y, real_schema(1));
  ASSERT_EQ(t.n_nodes(), 1u);
  EXPECT_TRUE(t.nodes()[0].is_leaf());
  const std::vector<double> in = {0.9};
  EXPECT_EQ(t.predict(in)[0], 4.0);
  EXPECT_EQ(t.predict(in)[1], -1.0);
}

TEST(FitTree, SeparablePair) {
  Matrix x(2, 2);
  x << 0.0, 1.0, 0.0, 2.0;
  const Matrix y = column({10.0, 20.0});
  const TreeModel t = fit_tree(x, y, real_schema(2));
  EXPECT_EQ(t.n_nodes(), 3u);
  EXPECT_EQ(t.n_leaves(), 2u);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const std::vector<double> in = {x(i, 0), x(i, 1)};
    EXPECT_EQ(t.predict(in)[0], y(i, 0));
  }
}

TEST(FitTree, InterpolatesCubic) {
  Matrix x(10, 1), y(10, 1);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = 0.1 * i;
    y(i, 0) = cubic(x(i, 0));
  }
  const TreeModel t = fit_tree(x, y, real_schema(1));
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> in = {x(i, 0)};
    EXPECT_EQ(t.predict(in)[0], y(i, 0));
  }
}

TEST(FitTree, ConstantTargetIsSingleLeaf) {
  const Matrix x = column({0.1, 0.5, 0.9});
  const Matrix y = column({2.0, 2.0, 2.0});
  const TreeModel t = fit_tree(x, y, real_schema(1));
  EXPECT_EQ(t.n_nodes(), 1u);
  const std::vector<double> in = {-3.0};
  EXPECT_EQ(t.predict(in)[0], 2.0);
}

TEST(FitTree, TophatCentre) {
  RngStream rng(31);
  const Dataset d = gen_tophat(64, 0.0, rng);
  const TreeModel t = fit_tree(d.inputs, d.outputs, d.schema);
  const std::vector<double> in = {0.0};
  EXPECT_EQ(t.predict(in)[0], 1.0);
}

TEST(FitTree, CategoricalSplit) {
  InputSchema schema;
  schema.columns.push_back({"c", FeatureKind::Categorical, {"a", "b", "c"}});
  const Matrix x = column({0, 1, 2, 0, 1, 2});
  const Matrix y = column({1, 5, 5, 1, 5, 5});
  const TreeModel t = fit_tree(x, y, schema);
  for (double c : {0.0, 1.0, 2.0}) {
    const std::vector<double> in = {c};
    EXPECT_EQ(t.predict(in)[0], c == 0.0 ? 1.0 : 5.0);
  }
}

TEST(FitTree, ZeroWeightRowsIgnored) {
  const Matrix x = column({0.0, 1.0, 2.0});
  const Matrix y = column({1.0, 100.0, 3.0});
  const std::vector<std::uint32_t> w = {1, 0, 1};
  const TreeModel t = fit_tree(x, y, w, real_schema(1));
  const std::vector<double> in = {1.0};
  const double p = t.predict(in)[0];
  EXPECT_TRUE(p == 1.0 || p == 3.0);
}

TEST(FitTreeProperty, ZeroTrainingErrorOnUniqueInputs) {
  for (int k = 0; k < testing::kPropertyCases; ++k) {
    RngStream rng = testing::case_rng(41, k);
    const Dataset d = testing::random_regression(rng, 5 + rng.uniform_index(60), 1 + rng.uniform_index(4), 1 + rng.uniform_index(3));
    const TreeModel t = fit_tree(d.inputs, d.outputs, d.schema);
    for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
      const Vector row = d.inputs.row(i).transpose();
      const auto p = t.predict(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
      for (Eigen::Index j = 0; j < d.outputs.cols(); ++j) ASSERT_EQ(p[static_cast<std::size_t>(j)], d.outputs(i, j));
    }
  }
}

TEST(FitTreeProperty, SplitsNeverIncreaseVariance) {
  for (int k = 0; k < testing::kPropertyCases; ++k) {
    RngStream rng = testing::case_rng(43, k);
    const Dataset d = testing::random_regression(rng, 10 + rng.uniform_index(50), 3, 2);
    std::vector<std::uint32_t> w(d.rows());
    for (auto& c : w) c = static_cast<std::uint32_t>(rng.uniform_index(3));
    w[0] = 1;
    const TreeModel t = fit_tree(d.inputs, d.outputs, w, d.schema);

    // Route weighted rows and accumulate per-node sums to get each node's SSE.
    const std::size_t n_nodes = t.n_nodes();
    std::vector<double> wsum(n_nodes, 0.0);
    std::vector<Vector> sum(n_nodes, Vector::Zero(2)), sq(n_nodes, Vector::Zero(2));
    for (std::size_t i = 0; i < d.rows(); ++i) {
      if (w[i] == 0) continue;
      const Vector x = d.inputs.row(static_cast<Eigen::Index>(i)).transpose();
      const Vector y = d.outputs.row(static_cast<Eigen::Index>(i)).transpose();
      std::uint32_t node = 0;
      for (;;) {
        wsum[node] += w[i];
        sum[node] += w[i] * y;
        sq[node] += w[i] * y.cwiseProduct(y);
        if (t.nodes()[node].is_leaf()) break;
        node = child(t.nodes()[node], std::span<const double>(x.data(), 3), d.schema);
      }
    }
    const auto sse = [&](std::size_t n) { return wsum[n] > 0 ? (sq[n] - sum[n].cwiseProduct(sum[n]) / wsum[n]).sum() : 0.0; };
    for (std::size_t n = 0; n < n_nodes; ++n) {
      const TreeNode& node = t.nodes()[n];
      EXPECT_DOUBLE_EQ(node.weight, wsum[n]);
      if (node.is_leaf()) continue;
      ASSERT_LE(sse(node.left) + sse(node.right), sse(n) + 1e-9);
    }
  }
}

TEST(FitTreeProperty, RowOrderInvariant) {
  for (int k = 0; k < testing::kPropertyCases; ++k) {
    RngStream rng = testing::case_rng(47, k);
    const Dataset d = testing::random_regression(rng, 5 + rng.uniform_index(40), 2, 2);
    const auto perm = permutation(d.rows(), rng);
    const Dataset shuffled = d.subset(perm);
    const TreeModel a = fit_tree(d.inputs, d.outputs, d.schema);
    const TreeModel b = fit_tree(shuffled.inputs, shuffled.outputs, shuffled.schema);
    for (int q = 0; q < 50; ++q) {
      const std::vector<double> x = {rng.uniform(), rng.uniform()};
      // Leaf means may differ in the last bit from summation order.
      ASSERT_NEAR(a.predict(x)[0], b.predict(x)[0], 1e-12);
      ASSERT_NEAR(a.predict(x)[1], b.predict(x)[1], 1e-12);
    }
  }
}

}  // namespace
}  // namespace rbpi
