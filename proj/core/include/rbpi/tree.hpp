#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rbpi/schema.hpp"
#include "rbpi/stats.hpp"

namespace rbpi {

/// Node of a fitted tree. Leaves have `feature == kLeaf`; their mean vector
/// lives in TreeModel::leaf_values at `leaf * n_outputs`.
struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  double threshold = 0.0;        // real split: x <= threshold goes left
  std::uint32_t category = 0;    // categorical split: x == category goes left
  std::vector<std::uint32_t> right_categories;  // other categories seen at this node
  bool unseen_left = false;      // route for categories never seen at this node
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t leaf = 0;
  double weight = 0.0;           // training rows reaching the node, with multiplicity

  bool is_leaf() const { return feature == kLeaf; }
};

/// Multi-output regression tree grown to full depth.
class TreeModel {
 public:
  TreeModel() = default;
  TreeModel(std::vector<TreeNode> nodes, std::vector<double> leaf_values, std::size_t n_outputs, InputSchema schema);

  std::size_t n_outputs() const { return n_outputs_; }
  std::size_t n_features() const { return schema_.size(); }
  std::size_t n_nodes() const { return nodes_.size(); }
  std::size_t n_leaves() const { return n_outputs_ ? leaf_values_.size() / n_outputs_ : 0; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<double>& leaf_values() const { return leaf_values_; }
  const InputSchema& schema() const { return schema_; }

  /// Index of the leaf reached by `input`.
  std::uint32_t leaf_index(std::span<const double> input) const;

  /// Mean output vector of the reached leaf.
  std::span<const double> predict(std::span<const double> input) const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<double> leaf_values_;
  std::size_t n_outputs_ = 0;
  InputSchema schema_;
};

/// Grow a tree on rows of `inputs`/`outputs` with per-row multiplicities
/// `weights` (bootstrap counts; zero-weight rows are ignored).
///
/// Every feature is a split candidate at every node. Real features split at
/// midpoints between consecutive distinct values, categorical features
/// one-vs-rest. The chosen split maximizes the reduction of the summed
/// within-node variance over all outputs; equal gains resolve to the lowest
/// feature index, then the lowest threshold / category id. A node becomes a
/// leaf when it holds fewer than two distinct rows, all its inputs coincide,
/// or no split reduces the total variance.
TreeModel fit_tree(const Matrix& inputs, const Matrix& outputs, std::span<const std::uint32_t> weights,
                   const InputSchema& schema);

/// Unweighted convenience overload (every row once).
TreeModel fit_tree(const Matrix& inputs, const Matrix& outputs, const InputSchema& schema);

/// Schema of `n` real-valued inputs named x0..x{n-1}.
InputSchema real_schema(std::size_t n);

}  // namespace rbpi
