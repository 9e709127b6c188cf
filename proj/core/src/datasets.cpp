#include "rbpi/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rbpi/error.hpp"

namespace rbpi {

Standardizer Standardizer::fit(const Matrix& outputs) {
  if (outputs.rows() < 1) throw DomainError("Standardizer::fit: no rows");
  Standardizer s;
  s.mean = outputs.colwise().mean().transpose();
  s.scale.resize(outputs.cols());
  for (Eigen::Index j = 0; j < outputs.cols(); ++j) {
    const double var = (outputs.col(j).array() - s.mean(j)).square().mean();
    s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return {Vector::Zero(n), Vector::Ones(n)};
}

Matrix Standardizer::apply(const Matrix& outputs) const {
  if (outputs.cols() != mean.size()) throw DomainError("Standardizer::apply: dimension mismatch");
  Matrix z = outputs.rowwise() - mean.transpose();
  return z.array().rowwise() / scale.transpose().array();
}

Matrix Standardizer::invert(const Matrix& standardized) const {
  if (standardized.cols() != mean.size()) throw DomainError("Standardizer::invert: dimension mismatch");
  Matrix y = standardized.array().rowwise() * scale.transpose().array();
  return y.rowwise() + mean.transpose();
}

Vector Standardizer::invert(const Vector& standardized) const {
  if (standardized.size() != mean.size()) throw DomainError("Standardizer::invert: dimension mismatch");
  return standardized.cwiseProduct(scale) + mean;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.schema = schema;
  out.output_names = output_names;
  out.provenance = provenance;
  out.inputs.resize(static_cast<Eigen::Index>(indices.size()), inputs.cols());
  out.outputs.resize(static_cast<Eigen::Index>(indices.size()), outputs.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= rows()) throw DomainError("Dataset::subset: row index out of range");
    const auto i = static_cast<Eigen::Index>(indices[k]);
    out.inputs.row(static_cast<Eigen::Index>(k)) = inputs.row(i);
    out.outputs.row(static_cast<Eigen::Index>(k)) = outputs.row(i);
  }
  return out;
}

Dataset Dataset::select_outputs(std::span<const std::size_t> columns) const {
  Dataset out;
  out.schema = schema;
  out.provenance = provenance;
  out.inputs = inputs;
  out.outputs.resize(outputs.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] >= n_outputs()) throw DomainError("Dataset::select_outputs: column out of range");
    out.outputs.col(static_cast<Eigen::Index>(k)) = outputs.col(static_cast<Eigen::Index>(columns[k]));
    out.output_names.push_back(output_names[columns[k]]);
  }
  return out;
}

std::size_t Dataset::input_index(const std::string& name) const {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema.columns[i].name == name) return i;
  }
  throw DomainError("Dataset: unknown input column '" + name + "'");
}

std::size_t Dataset::output_index(const std::string& name) const {
  const auto it = std::find(output_names.begin(), output_names.end(), name);
  if (it == output_names.end()) throw DomainError("Dataset: unknown output column '" + name + "'");
  return static_cast<std::size_t>(it - output_names.begin());
}

void Dataset::validate() const {
  if (inputs.rows() != outputs.rows()) throw DomainError("Dataset: input/output row counts differ");
  if (static_cast<std::size_t>(inputs.cols()) != schema.size()) throw DomainError("Dataset: schema width mismatch");
  if (output_names.size() != n_outputs()) throw DomainError("Dataset: output name count mismatch");
  if (!inputs.allFinite() || !outputs.allFinite()) throw DomainError("Dataset: non-finite values");
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (!schema.columns[f].categorical()) continue;
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
      const double v = inputs(i, static_cast<Eigen::Index>(f));
      if (v < 0 || v != std::floor(v) || static_cast<std::size_t>(v) >= schema.columns[f].vocabulary.size()) {
        throw DomainError("Dataset: bad category id in column '" + schema.columns[f].name + "'");
      }
    }
  }
}

double tophat(double x) {
  const double a = std::abs(x);
  if (a < 0.33) return 1.0;
  if (a < 0.67) return 0.5;
  return 0.0;
}

double cubic(double x) { return x * x * x; }

double friedman_grosse(std::span<const double> x) {
  if (x.size() < 5) throw DomainError("friedman_grosse: need at least 5 inputs");
  return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] +
         5.0 * x[4];
}

double friedman_silverman(std::span<const double> x) {
  if (x.size() < 5) throw DomainError("friedman_silverman: need at least 5 inputs");
  return 0.1 * std::exp(4.0 * x[0]) + 4.0 / (1.0 + std::exp(-20.0 * (x[1] - 0.5))) + 3.0 * x[2] + 2.0 * x[3] +
         x[4];
}

namespace {

template <typename F>
Dataset generate(std::size_t n, std::size_t dims, double lo, double hi, double noise, RngStream& rng, F&& f,
                 std::string provenance) {
  if (n < 1) throw DomainError("generator: need n >= 1");
  if (noise < 0.0) throw DomainError("generator: noise must be non-negative");
  Dataset data;
  data.schema = InputSchema{};
  for (std::size_t k = 0; k < dims; ++k) data.schema.columns.push_back({"x" + std::to_string(k), FeatureKind::Real, {}});
  data.output_names = {"y0"};
  data.provenance = std::move(provenance);
  data.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  data.outputs.resize(static_cast<Eigen::Index>(n), 1);
  std::vector<double> x(dims);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dims; ++k) {
      x[k] = rng.uniform(lo, hi);
      data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = x[k];
    }
    data.outputs(static_cast<Eigen::Index>(i), 0) = f(std::span<const double>(x));
  }
  add_noise(data, noise, rng);
  return data;
}

}  // namespace

Dataset gen_tophat(std::size_t n, double noise, RngStream& rng) {
  return generate(n, 1, -1.0, 1.0, noise, rng, [](std::span<const double> x) { return tophat(x[0]); }, "tophat");
}

Dataset gen_cubic(std::size_t n, double noise, RngStream& rng) {
  return generate(n, 1, -1.0, 1.0, noise, rng, [](std::span<const double> x) { return cubic(x[0]); }, "cubic");
}

Dataset gen_friedman_grosse(std::size_t n, double noise, RngStream& rng) {
  return generate(n, 8, 0.0, 1.0, noise, rng, [](std::span<const double> x) { return friedman_grosse(x); },
                  "friedman-grosse");
}

Dataset gen_friedman_silverman(std::size_t n, double noise, RngStream& rng) {
  return generate(n, 12, 0.0, 1.0, noise, rng, [](std::span<const double> x) { return friedman_silverman(x); },
                  "friedman-silverman");
}

void add_noise(Dataset& data, double noise, RngStream& rng) {
  if (noise < 0.0) throw DomainError("add_noise: noise must be non-negative");
  if (noise == 0.0) return;
  for (Eigen::Index i = 0; i < data.outputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.outputs.cols(); ++j) data.outputs(i, j) += noise * rng.normal();
  }
}

namespace {

// Population standard deviation.
double pop_std(const Vector& v) { return std::sqrt((v.array() - v.mean()).square().mean()); }

Vector linear_correlated(const Vector& y0, double rho, RngStream& rng) {
  if (!(std::abs(rho) <= 1.0)) throw DomainError("add_linear_correlated_output: |rho| must be <= 1");
  if (y0.size() < 3) throw DomainError("add_linear_correlated_output: need at least 3 rows");
  const Vector centered = y0.array() - y0.mean();
  const double syy = centered.squaredNorm();
  if (!(syy > 0.0) || pop_std(y0) == 0.0) throw DomainError("add_linear_correlated_output: y0 is constant");
  Vector z(y0.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  // Residual of the least-squares fit of z on y0; orthogonal to y0 in the
  // covariance sense, which is what makes the correlation exact.
  const double slope = centered.dot(z) / syy;
  const Vector residual = z - slope * centered;
  const double s_res = pop_std(residual);
  const double s_y0 = pop_std(y0);
  return rho * s_res * y0 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * s_y0 * residual;
}

void append_output(Dataset& data, const Vector& column, std::string name) {
  const Eigen::Index d = data.outputs.cols();
  data.outputs.conservativeResize(Eigen::NoChange, d + 1);
  data.outputs.col(d) = column;
  if (name.empty()) name = "y" + std::to_string(d);
  data.output_names.push_back(std::move(name));
}

}  // namespace

void add_linear_correlated_output(Dataset& data, double rho, RngStream& rng, const std::string& name) {
  if (data.n_outputs() < 1) throw DomainError("add_linear_correlated_output: dataset has no outputs");
  append_output(data, linear_correlated(data.outputs.col(0), rho, rng), name);
}

void add_quadratic_output(Dataset& data, double f, RngStream& rng, const std::string& name) {
  if (data.n_outputs() < 1) throw DomainError("add_quadratic_output: dataset has no outputs");
  if (data.rows() < 2) throw DomainError("add_quadratic_output: need at least 2 rows");
  const Vector y0 = data.outputs.col(0);
  const double mu = y0.mean();
  Vector y2(y0.size());
  for (Eigen::Index i = 0; i < y0.size(); ++i) y2(i) = (y0(i) - mu) * (y0(i) - mu) + f * rng.normal();
  append_output(data, y2, name);
}

Dataset gen_multi_output(const std::string& base, std::size_t n, double noise, double rho, double f,
                         RngStream& rng) {
  Dataset data;
  if (base == "friedman-grosse") {
    data = gen_friedman_grosse(n, 0.0, rng);
  } else if (base == "friedman-silverman") {
    data = gen_friedman_silverman(n, 0.0, rng);
  } else {
    throw DomainError("gen_multi_output: unknown base function '" + base + "'");
  }
  add_linear_correlated_output(data, rho, rng, "y1");
  add_quadratic_output(data, f, rng, "y2");
  add_noise(data, noise, rng);
  data.provenance = base + "-multi";
  return data;
}

Dataset gen_sl_synthetic(RngStream& rng, std::size_t n) {
  Dataset base = gen_friedman_grosse(n, 0.0, rng);
  Dataset data;
  data.schema = base.schema;
  data.schema.columns.push_back({"phase", FeatureKind::Categorical, {"A", "B"}});
  data.inputs.resize(base.inputs.rows(), base.inputs.cols() + 1);
  data.inputs.leftCols(base.inputs.cols()) = base.inputs;
  data.outputs.resize(base.inputs.rows(), 2);
  data.outputs.col(0) = base.outputs.col(0);
  data.output_names = {"y0", "y1"};
  data.provenance = "sl-synthetic";

  std::vector<Eigen::Index> phase_a;
  const Eigen::Index phase_col = base.inputs.cols();
  for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
    const bool a = rng.bernoulli(0.5);
    data.inputs(i, phase_col) = a ? 0.0 : 1.0;
    if (a) {
      phase_a.push_back(i);
    } else {
      const double y = base.outputs(i, 0);
      data.outputs(i, 1) = std::sqrt(std::max(0.0, 30.0 * 30.0 - y * y));
    }
  }
  Vector y0_a(static_cast<Eigen::Index>(phase_a.size()));
  for (std::size_t k = 0; k < phase_a.size(); ++k) y0_a(static_cast<Eigen::Index>(k)) = base.outputs(phase_a[k], 0);
  const Vector y1_a = linear_correlated(y0_a, 0.98, rng);
  for (std::size_t k = 0; k < phase_a.size(); ++k) data.outputs(phase_a[k], 1) = y1_a(static_cast<Eigen::Index>(k));
  return data;
}

std::vector<std::size_t> permutation(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  return idx;
}

TrainTest split(const Dataset& data, std::size_t n_train, std::size_t n_test, const SplitStrategy& strategy,
                RngStream& rng) {
  std::vector<std::size_t> train_idx, test_idx;
  if (std::holds_alternative<UniformSplit>(strategy)) {
    if (n_train < 1 || n_train + n_test > data.rows()) {
      throw DomainError("split: cannot draw " + std::to_string(n_train) + " + " + std::to_string(n_test) +
                        " rows from " + std::to_string(data.rows()));
    }
    const auto perm = permutation(data.rows(), rng);
    train_idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                    perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  } else {
    const auto& strat = std::get<StratifiedSplit>(strategy);
    const std::size_t col = data.input_index(strat.column);
    const auto& column = data.schema.columns[col];
    if (!column.categorical()) throw DomainError("split: stratification column must be categorical");
    std::size_t sum_train = 0, sum_test = 0;
    for (const auto& [label, counts] : strat.counts) {
      sum_train += counts.first;
      sum_test += counts.second;
    }
    if (sum_train != n_train || sum_test != n_test) {
      throw DomainError("split: stratum counts do not add up to the requested train/test sizes");
    }
    for (std::size_t c = 0; c < column.vocabulary.size(); ++c) {
      const auto it = strat.counts.find(column.vocabulary[c]);
      if (it == strat.counts.end()) continue;
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < data.rows(); ++i) {
        if (static_cast<std::size_t>(data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col))) == c) {
          members.push_back(i);
        }
      }
      const auto [want_train, want_test] = it->second;
      if (want_train + want_test > members.size()) {
        throw DomainError("split: stratum '" + it->first + "' has " + std::to_string(members.size()) +
                          " rows, need " + std::to_string(want_train + want_test));
      }
      const auto perm = permutation(members.size(), rng);
      for (std::size_t k = 0; k < want_train; ++k) train_idx.push_back(members[perm[k]]);
      for (std::size_t k = 0; k < want_test; ++k) test_idx.push_back(members[perm[want_train + k]]);
    }
    for (const auto& [label, counts] : strat.counts) {
      if (std::find(column.vocabulary.begin(), column.vocabulary.end(), label) == column.vocabulary.end() &&
          counts.first + counts.second > 0) {
        throw DomainError("split: unknown stratum '" + label + "'");
      }
    }
    if (train_idx.empty()) throw DomainError("split: empty training set");
  }
  return {data.subset(train_idx), data.subset(test_idx)};
}

}  // namespace rbpi
