#include "rbpi/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rbpi/error.hpp"

namespace rbpi {

TreeModel::TreeModel(std::vector<TreeNode> nodes, std::vector<double> leaf_values, std::size_t n_outputs,
                     InputSchema schema)
    : nodes_(std::move(nodes)), leaf_values_(std::move(leaf_values)), n_outputs_(n_outputs),
      schema_(std::move(schema)) {
  if (nodes_.empty()) throw DomainError("TreeModel: empty node list");
}

std::uint32_t TreeModel::leaf_index(std::span<const double> input) const {
  if (input.size() != schema_.size()) throw DomainError("TreeModel::predict: input has wrong number of features");
  std::uint32_t at = 0;
  for (;;) {
    const TreeNode& node = nodes_[at];
    if (node.is_leaf()) return node.leaf;
    const double x = input[static_cast<std::size_t>(node.feature)];
    if (schema_.columns[static_cast<std::size_t>(node.feature)].categorical()) {
      const auto c = static_cast<std::uint32_t>(x);
      if (c == node.category) {
        at = node.left;
      } else if (std::binary_search(node.right_categories.begin(), node.right_categories.end(), c)) {
        at = node.right;
      } else {
        at = node.unseen_left ? node.left : node.right;
      }
    } else {
      at = x <= node.threshold ? node.left : node.right;
    }
  }
}

std::span<const double> TreeModel::predict(std::span<const double> input) const {
  const std::uint32_t leaf = leaf_index(input);
  return {leaf_values_.data() + static_cast<std::size_t>(leaf) * n_outputs_, n_outputs_};
}

namespace {

struct Split {
  bool found = false;
  std::int32_t feature = TreeNode::kLeaf;
  double threshold = 0.0;
  std::uint32_t category = 0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& inputs, const Matrix& outputs, std::span<const std::uint32_t> weights,
              const InputSchema& schema)
      : x_(inputs), y_(outputs), w_(weights), schema_(schema), d_(static_cast<std::size_t>(outputs.cols())) {}

  TreeModel build() {
    std::vector<std::uint32_t> rows;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (w_[i] > 0) rows.push_back(static_cast<std::uint32_t>(i));
    }
    if (rows.empty()) throw DomainError("fit_tree: no rows with positive weight");
    grow(rows);
    return TreeModel(std::move(nodes_), std::move(leaf_values_), d_, schema_);
  }

 private:
  // Sum of S_j^2 / W over outputs; larger child totals mean lower within-node variance.
  double explained(const std::vector<double>& sums, double weight) const {
    double acc = 0.0;
    for (double s : sums) acc += s * s;
    return acc / weight;
  }

  std::uint32_t make_leaf(const std::vector<std::uint32_t>& rows, double weight) {
    TreeNode node;
    node.leaf = static_cast<std::uint32_t>(leaf_values_.size() / d_);
    node.weight = weight;
    std::vector<double> mean(d_, 0.0);
    for (std::uint32_t r : rows) {
      for (std::size_t j = 0; j < d_; ++j) mean[j] += w_[r] * y_(r, static_cast<Eigen::Index>(j));
    }
    for (double& m : mean) leaf_values_.push_back(m / weight);
    nodes_.push_back(std::move(node));
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  void consider(Split& best, double gain, double tol, std::int32_t feature, double threshold,
                std::uint32_t category) const {
    if (gain > tol && (!best.found || gain > best.gain + tol)) {
      best = Split{true, feature, threshold, category, gain};
    }
  }

  Split best_split(std::vector<std::uint32_t>& rows, double weight, const std::vector<double>& sums) const {
    const double parent = explained(sums, weight);
    double sumsq = 0.0;
    for (std::uint32_t r : rows) {
      for (std::size_t j = 0; j < d_; ++j) {
        const double v = y_(r, static_cast<Eigen::Index>(j));
        sumsq += w_[r] * v * v;
      }
    }
    const double sse = sumsq - parent;
    Split best;
    if (!(sse > 0.0)) return best;
    const double tol = 1e-12 * std::max(sse, 1e-300) + 1e-14 * std::abs(parent);

    std::vector<double> left(d_), right(d_);
    for (std::size_t f = 0; f < schema_.size(); ++f) {
      const auto col = static_cast<Eigen::Index>(f);
      const auto feature = static_cast<std::int32_t>(f);
      if (schema_.columns[f].categorical()) {
        std::vector<std::uint32_t> cats;
        for (std::uint32_t r : rows) cats.push_back(static_cast<std::uint32_t>(x_(r, col)));
        std::sort(cats.begin(), cats.end());
        cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
        if (cats.size() < 2) continue;
        for (std::uint32_t c : cats) {
          std::fill(left.begin(), left.end(), 0.0);
          double wl = 0.0;
          for (std::uint32_t r : rows) {
            if (static_cast<std::uint32_t>(x_(r, col)) != c) continue;
            wl += w_[r];
            for (std::size_t j = 0; j < d_; ++j) left[j] += w_[r] * y_(r, static_cast<Eigen::Index>(j));
          }
          const double wr = weight - wl;
          for (std::size_t j = 0; j < d_; ++j) right[j] = sums[j] - left[j];
          consider(best, explained(left, wl) + explained(right, wr) - parent, tol, feature, 0.0, c);
        }
      } else {
        std::sort(rows.begin(), rows.end(), [&](std::uint32_t a, std::uint32_t b) {
          const double xa = x_(a, col), xb = x_(b, col);
          return xa < xb || (xa == xb && a < b);
        });
        std::fill(left.begin(), left.end(), 0.0);
        double wl = 0.0;
        for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
          const std::uint32_t r = rows[k];
          wl += w_[r];
          for (std::size_t j = 0; j < d_; ++j) left[j] += w_[r] * y_(r, static_cast<Eigen::Index>(j));
          const double lo = x_(r, col), hi = x_(rows[k + 1], col);
          if (!(lo < hi)) continue;
          const double wr = weight - wl;
          for (std::size_t j = 0; j < d_; ++j) right[j] = sums[j] - left[j];
          double threshold = 0.5 * (lo + hi);
          if (!(threshold < hi)) threshold = lo;
          consider(best, explained(left, wl) + explained(right, wr) - parent, tol, feature, threshold, 0);
        }
      }
    }
    return best;
  }

  std::uint32_t grow(std::vector<std::uint32_t>& rows) {
    double weight = 0.0;
    std::vector<double> sums(d_, 0.0);
    for (std::uint32_t r : rows) {
      weight += w_[r];
      for (std::size_t j = 0; j < d_; ++j) sums[j] += w_[r] * y_(r, static_cast<Eigen::Index>(j));
    }
    if (rows.size() < 2) return make_leaf(rows, weight);

    const Split split = best_split(rows, weight, sums);
    if (!split.found) return make_leaf(rows, weight);

    const auto col = static_cast<Eigen::Index>(split.feature);
    const bool categorical = schema_.columns[static_cast<std::size_t>(split.feature)].categorical();
    std::vector<std::uint32_t> left_rows, right_rows;
    std::vector<std::uint32_t> right_cats;
    double wl = 0.0, wr = 0.0;
    for (std::uint32_t r : rows) {
      const double x = x_(r, col);
      const bool go_left = categorical ? static_cast<std::uint32_t>(x) == split.category : x <= split.threshold;
      if (go_left) {
        left_rows.push_back(r);
        wl += w_[r];
      } else {
        right_rows.push_back(r);
        wr += w_[r];
        if (categorical) right_cats.push_back(static_cast<std::uint32_t>(x));
      }
    }
    std::sort(right_cats.begin(), right_cats.end());
    right_cats.erase(std::unique(right_cats.begin(), right_cats.end()), right_cats.end());

    const auto self = static_cast<std::uint32_t>(nodes_.size());
    TreeNode node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.category = split.category;
    node.right_categories = std::move(right_cats);
    node.unseen_left = wl > wr;
    node.weight = weight;
    nodes_.push_back(std::move(node));
    rows.clear();
    rows.shrink_to_fit();
    const std::uint32_t l = grow(left_rows);
    const std::uint32_t r = grow(right_rows);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
  }

  const Matrix& x_;
  const Matrix& y_;
  std::span<const std::uint32_t> w_;
  const InputSchema& schema_;
  std::size_t d_;
  std::vector<TreeNode> nodes_;
  std::vector<double> leaf_values_;
};

}  // namespace

TreeModel fit_tree(const Matrix& inputs, const Matrix& outputs, std::span<const std::uint32_t> weights,
                   const InputSchema& schema) {
  if (inputs.rows() != outputs.rows() || static_cast<std::size_t>(inputs.rows()) != weights.size()) {
    throw DomainError("fit_tree: inputs, outputs and weights disagree on row count");
  }
  if (static_cast<std::size_t>(inputs.cols()) != schema.size()) {
    throw DomainError("fit_tree: input matrix does not match schema");
  }
  if (outputs.cols() < 1) throw DomainError("fit_tree: need at least one output");
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (!schema.columns[f].categorical()) continue;
    const auto vocab = schema.columns[f].vocabulary.size();
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
      const double v = inputs(i, static_cast<Eigen::Index>(f));
      if (v < 0.0 || v != std::floor(v) || static_cast<std::size_t>(v) >= vocab) {
        throw DomainError("fit_tree: category id out of range in column '" + schema.columns[f].name + "'");
      }
    }
  }
  return TreeBuilder(inputs, outputs, weights, schema).build();
}

TreeModel fit_tree(const Matrix& inputs, const Matrix& outputs, const InputSchema& schema) {
  const std::vector<std::uint32_t> ones(static_cast<std::size_t>(inputs.rows()), 1);
  return fit_tree(inputs, outputs, ones, schema);
}

InputSchema real_schema(std::size_t n) {
  InputSchema schema;
  for (std::size_t i = 0; i < n; ++i) schema.columns.push_back({"x" + std::to_string(i), FeatureKind::Real, {}});
  return schema;
}

}  // namespace rbpi
