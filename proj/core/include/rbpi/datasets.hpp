#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rbpi/schema.hpp"
#include "rbpi/stats.hpp"

namespace rbpi {

/// Per-output affine map to mean 0 / variance 1 (population variance).
struct Standardizer {
  Vector mean;
  Vector scale;  // 1 for constant outputs

  static Standardizer fit(const Matrix& outputs);
  static Standardizer identity(std::size_t d);

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  Matrix apply(const Matrix& outputs) const;
  Matrix invert(const Matrix& standardized) const;
  Vector invert(const Vector& standardized) const;
};

/// Table of typed inputs and real outputs.
struct Dataset {
  InputSchema schema;
  std::vector<std::string> output_names;
  Matrix inputs;   // rows x features; categorical cells hold category ids
  Matrix outputs;  // rows x outputs, original units
  std::string provenance;

  std::size_t rows() const { return static_cast<std::size_t>(inputs.rows()); }
  std::size_t n_features() const { return schema.size(); }
  std::size_t n_outputs() const { return static_cast<std::size_t>(outputs.cols()); }

  Standardizer standardizer() const { return Standardizer::fit(outputs); }

  Dataset subset(std::span<const std::size_t> indices) const;
  /// Keep only the listed output columns, in the given order.
  Dataset select_outputs(std::span<const std::size_t> columns) const;
  std::size_t input_index(const std::string& name) const;
  std::size_t output_index(const std::string& name) const;
  /// Validate shapes, category ids and finiteness; throws DomainError.
  void validate() const;
};

// Ground-truth functions (noiseless).
double tophat(double x);
double cubic(double x);
double friedman_grosse(std::span<const double> x);
double friedman_silverman(std::span<const double> x);

/// 1-D x ~ U[-1, 1], y = tophat(x) + noise * N(0, 1).
Dataset gen_tophat(std::size_t n, double noise, RngStream& rng);
/// 1-D x ~ U[-1, 1], y = x^3 + noise * N(0, 1).
Dataset gen_cubic(std::size_t n, double noise, RngStream& rng);
/// 8-D unit hypercube; dimensions 5..7 are inert.
Dataset gen_friedman_grosse(std::size_t n, double noise, RngStream& rng);
/// 12-D unit hypercube; dimensions 5..11 are inert.
Dataset gen_friedman_silverman(std::size_t n, double noise, RngStream& rng);

/// Add noise * N(0, 1) independently to every output cell.
void add_noise(Dataset& data, double noise, RngStream& rng);

/// Append an output whose sample Pearson correlation with output 0 is
/// exactly `rho`: Y1 = rho s_Z' Y0 + sqrt(1 - rho^2) s_Y0 Z', where Z' is the
/// least-squares residual of unit normals Z regressed on Y0.
void add_linear_correlated_output(Dataset& data, double rho, RngStream& rng, const std::string& name = "");

/// Append y2 = (y0 - mean(y0))^2 + f * N(0, 1).
void add_quadratic_output(Dataset& data, double f, RngStream& rng, const std::string& name = "");

/// Friedman-Grosse with a correlated ("y1", rho) and a quadratic ("y2", f)
/// output. Outputs are built from the noiseless y0 and noise is added to all
/// three afterwards.
Dataset gen_multi_output(const std::string& base, std::size_t n, double noise, double rho, double f,
                         RngStream& rng);

/// 128-row two-output problem with a categorical "phase" input: phase A rows
/// have y1 linearly correlated with y0 (rho = 0.98), phase B rows have
/// y1 = sqrt(30^2 - y0^2).
Dataset gen_sl_synthetic(RngStream& rng, std::size_t n = 128);

struct UniformSplit {};

/// Per-stratum (train, test) counts keyed by the category label of `column`.
struct StratifiedSplit {
  std::string column;
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
};

using SplitStrategy = std::variant<UniformSplit, StratifiedSplit>;

struct TrainTest {
  Dataset train;
  Dataset test;
};

/// Disjoint random train/test draw. Throws DomainError if infeasible.
TrainTest split(const Dataset& data, std::size_t n_train, std::size_t n_test, const SplitStrategy& strategy,
                RngStream& rng);

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, RngStream& rng);

}  // namespace rbpi
