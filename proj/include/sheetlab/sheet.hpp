// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sheetlab/montecarlo.hpp"

namespace sheetlab {

/// Point t = (t^1, ..., t^m) of the positive orthant.
class MultiTime {
public:
  explicit MultiTime(Eigen::VectorXd coords);
  MultiTime(std::initializer_list<double> coords);

  std::size_t dim() const { return static_cast<std::size_t>(coords_.size()); }
  double operator[](std::size_t alpha) const { return coords_[static_cast<Eigen::Index>(alpha)]; }
  const Eigen::VectorXd& coords() const { return coords_; }

  bool operator==(const MultiTime& other) const { return coords_ == other.coords_; }

private:
  Eigen::VectorXd coords_;
};

/// v = t^1 ... t^m
double volume(const MultiTime& t);

/// c_alpha = dv/dt^alpha = prod_{beta != alpha} t^beta (computed without division).
Eigen::VectorXd volume_coefficients(const MultiTime& t);

/// Per-axis node coordinates, strictly increasing from 0.
using Partition = std::vector<double>;

/// n equal cells on [0, length].
Partition uniform_partition(double length, std::size_t cells);

/// Inputs of the sheet sampler, minus the seed.
struct SheetSpec {
  std::vector<Partition> partitions;
  std::size_t d = 1;
  Eigen::VectorXd x;  ///< starting value on the boundary; empty means 0

  std::size_t m() const { return partitions.size(); }
};

/**
 * One discretized path of an m-parameter, R^d-valued Brownian sheet started
 * from x on the boundary of the orthant.
 *
 * Field values live on the tensor grid of partition nodes, stored row-major
 * (last axis fastest) as the columns of a d x nodes matrix. Immutable.
 */
class SheetGrid {
public:
  using NodeIndex = std::vector<std::size_t>;

  std::size_t m() const { return partitions_.size(); }
  std::size_t d() const { return d_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Partition>& partitions() const { return partitions_; }
  const Eigen::VectorXd& start() const { return x_; }
  std::size_t node_count() const { return static_cast<std::size_t>(field_.cols()); }
  const Eigen::MatrixXd& field() const { return field_; }

  /// Field value at a node given per-axis indices. Throws std::out_of_range.
  Eigen::VectorXd value(std::span<const std::size_t> node) const;
  /// Column of the field by linear node index.
  auto value_at(std::size_t linear) const { return field_.col(static_cast<Eigen::Index>(linear)); }

  std::size_t linear_index(std::span<const std::size_t> node) const;
  double coordinate(std::size_t axis, std::size_t i) const { return partitions_[axis][i]; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }

  /// Per-axis node indices of a multitime lying exactly on the grid
  /// (relative tolerance 1e-12), or nullopt.
  std::optional<NodeIndex> locate(const MultiTime& t) const;

  /// Increment over the cell whose upper corner is `upper` (all indices >= 1),
  /// recovered from the field by inclusion-exclusion.
  Eigen::VectorXd cell_increment(std::span<const std::size_t> upper) const;

  /// The same path observed only on a sub-lattice: every coordinate of every
  /// new partition must be a node of the current one.
  SheetGrid restrict_to(const std::vector<Partition>& coarse) const;

  /// Plain-text dump: header with dimensions and partitions, then one row per
  /// node (row-major) with indices, coordinates and field components.
  void write_csv(std::ostream& os) const;

private:
  friend SheetGrid sample_sheet(const SheetSpec&, std::uint64_t);
  SheetGrid(std::vector<Partition> partitions, std::size_t d, Eigen::VectorXd x,
            std::uint64_t seed);

  std::vector<Partition> partitions_;
  std::vector<std::size_t> strides_;
  std::size_t d_;
  Eigen::VectorXd x_;
  std::uint64_t seed_;
  Eigen::MatrixXd field_;
};

/**
 * Samples one sheet path: N(0, cell volume) increments per cell and
 * component, drawn from substreams keyed by (seed, cell, component), then
 * prefix-summed over all m axes and shifted by x.
 */
SheetGrid sample_sheet(const SheetSpec& spec, std::uint64_t seed);

/// Seed of replicate r in a Monte-Carlo study keyed by `seed`.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r);

/// Monte-Carlo estimate of E[(W^a_s - x^a)(W^b_t - x^b)] over independent
/// sheets. Axes a, b are 0-based. Theoretical value delta_ab prod min(s, t).
Estimate estimate_covariance(const SheetSpec& spec, std::span<const std::size_t> s,
                             std::span<const std::size_t> t, std::size_t a, std::size_t b,
                             const McOptions& mc);

}  // namespace sheetlab
