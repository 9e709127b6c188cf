#pragma once

// Small hand-rolled generators for property tests. Each case is a pure
// function of (seed, case index).

#include <cstdint>
#include <vector>

#include "rbpi/datasets.hpp"
#include "rbpi/stats.hpp"

namespace rbpi::testing {

inline constexpr int kPropertyCases = 40;

inline RngStream case_rng(std::uint64_t seed, int k) { return RngStream(seed, 0x7e57).derive(static_cast<std::uint64_t>(k)); }

inline std::vector<double> random_values(RngStream& rng, std::size_t n, double lo = -10.0, double hi = 10.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline Matrix random_matrix(RngStream& rng, std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  }
  return m;
}

// Random symmetric positive-definite matrix A A^T + d I.
inline Matrix random_spd(RngStream& rng, std::size_t d) {
  const Matrix a = random_matrix(rng, d, d);
  return a * a.transpose() + static_cast<double>(d) * Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

// n rows of k real inputs in [0, 1) and d outputs that depend on them.
inline Dataset random_regression(RngStream& rng, std::size_t n, std::size_t k, std::size_t d) {
  Dataset data;
  for (std::size_t j = 0; j < k; ++j) data.schema.columns.push_back({"x" + std::to_string(j), FeatureKind::Real, {}});
  for (std::size_t j = 0; j < d; ++j) data.output_names.push_back("y" + std::to_string(j));
  data.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  data.outputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.inputs.cols(); ++j) data.inputs(i, j) = rng.uniform();
    for (Eigen::Index j = 0; j < data.outputs.cols(); ++j) {
      data.outputs(i, j) = static_cast<double>(j + 1) * data.inputs(i, j % data.inputs.cols()) + 0.3 * rng.normal();
    }
  }
  return data;
}

}  // namespace rbpi::testing
