// SPDX-License-Identifier: MIT
#include "sheetlab/sheet.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sheetlab/rng.hpp"

namespace sheetlab {

MultiTime::MultiTime(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  if (coords_.size() < 1) throw std::invalid_argument("MultiTime: need m >= 1");
  for (Eigen::Index i = 0; i < coords_.size(); ++i) {
    if (!(coords_[i] >= 0.0) || !std::isfinite(coords_[i]))
      throw std::invalid_argument("MultiTime: components must be finite and >= 0");
  }
}

MultiTime::MultiTime(std::initializer_list<double> coords)
    : MultiTime(Eigen::Map<const Eigen::VectorXd>(coords.begin(),
                                                 static_cast<Eigen::Index>(coords.size()))) {}

double volume(const MultiTime& t) { return t.coords().prod(); }

Eigen::VectorXd volume_coefficients(const MultiTime& t) {
  const auto m = static_cast<Eigen::Index>(t.dim());
  Eigen::VectorXd c = Eigen::VectorXd::Ones(m);
  for (Eigen::Index alpha = 0; alpha < m; ++alpha)
    for (Eigen::Index beta = 0; beta < m; ++beta)
      if (beta != alpha) c[alpha] *= t.coords()[beta];
  return c;
}

Partition uniform_partition(double length, std::size_t cells) {
  if (cells < 1 || !(length > 0.0)) throw std::invalid_argument("uniform_partition: bad arguments");
  Partition p(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    p[i] = length * static_cast<double>(i) / static_cast<double>(cells);
  p.back() = length;
  return p;
}

namespace {

void validate_partitions(const std::vector<Partition>& parts) {
  if (parts.empty()) throw std::invalid_argument("sheet: need at least one axis");
  for (const auto& p : parts) {
    if (p.size() < 2) throw std::invalid_argument("sheet: each axis needs at least one cell");
    if (p.front() != 0.0) throw std::invalid_argument("sheet: partitions must start at 0");
    for (std::size_t i = 1; i < p.size(); ++i)
      if (!(p[i] > p[i - 1])) throw std::invalid_argument("sheet: partition not strictly increasing");
  }
}

// Advances a row-major multi-index; returns false after the last one.
bool next_index(std::vector<std::size_t>& idx, const std::vector<std::size_t>& extent) {
  for (std::size_t k = idx.size(); k-- > 0;) {
    if (++idx[k] < extent[k]) return true;
    idx[k] = 0;
  }
  return false;
}

}  // namespace

SheetGrid::SheetGrid(std::vector<Partition> partitions, std::size_t d, Eigen::VectorXd x,
                     std::uint64_t seed)
    : partitions_(std::move(partitions)), d_(d), x_(std::move(x)), seed_(seed) {
  strides_.assign(partitions_.size(), 1);
  for (std::size_t k = partitions_.size(); k-- > 1;)
    strides_[k - 1] = strides_[k] * partitions_[k].size();
}

std::size_t SheetGrid::linear_index(std::span<const std::size_t> node) const {
  if (node.size() != m()) throw std::out_of_range("SheetGrid: node has wrong dimension");
  std::size_t lin = 0;
  for (std::size_t k = 0; k < m(); ++k) {
    if (node[k] >= partitions_[k].size()) throw std::out_of_range("SheetGrid: node index out of bounds");
    lin += node[k] * strides_[k];
  }
  return lin;
}

Eigen::VectorXd SheetGrid::value(std::span<const std::size_t> node) const {
  return field_.col(static_cast<Eigen::Index>(linear_index(node)));
}

std::optional<SheetGrid::NodeIndex> SheetGrid::locate(const MultiTime& t) const {
  if (t.dim() != m()) throw std::invalid_argument("SheetGrid::locate: dimension mismatch");
  NodeIndex idx(m());
  for (std::size_t k = 0; k < m(); ++k) {
    const auto& p = partitions_[k];
    const double tol = 1e-12 * std::max(1.0, p.back());
    auto it = std::lower_bound(p.begin(), p.end(), t[k] - tol);
    if (it == p.end() || std::abs(*it - t[k]) > tol) return std::nullopt;
    idx[k] = static_cast<std::size_t>(it - p.begin());
  }
  return idx;
}

Eigen::VectorXd SheetGrid::cell_increment(std::span<const std::size_t> upper) const {
  const std::size_t base = linear_index(upper);
  for (std::size_t k = 0; k < m(); ++k)
    if (upper[k] == 0) throw std::out_of_range("SheetGrid::cell_increment: upper corner on boundary");
  Eigen::VectorXd inc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d_));
  for (std::size_t corner = 0; corner < (std::size_t{1} << m()); ++corner) {
    std::size_t lin = base;
    int parity = 0;
    for (std::size_t k = 0; k < m(); ++k) {
      if (corner & (std::size_t{1} << k)) {
        lin -= strides_[k];
        ++parity;
      }
    }
    inc += (parity % 2 ? -1.0 : 1.0) * field_.col(static_cast<Eigen::Index>(lin));
  }
  return inc;
}

SheetGrid SheetGrid::restrict_to(const std::vector<Partition>& coarse) const {
  validate_partitions(coarse);
  if (coarse.size() != m()) throw std::invalid_argument("restrict_to: dimension mismatch");
  std::vector<std::vector<std::size_t>> map(m());
  for (std::size_t k = 0; k < m(); ++k) {
    for (double c : coarse[k]) {
      const auto& p = partitions_[k];
      const double tol = 1e-12 * std::max(1.0, p.back());
      auto it = std::lower_bound(p.begin(), p.end(), c - tol);
      if (it == p.end() || std::abs(*it - c) > tol)
        throw std::invalid_argument("restrict_to: coordinate is not a node of the fine grid");
      map[k].push_back(static_cast<std::size_t>(it - p.begin()));
    }
  }
  SheetGrid out(coarse, d_, x_, seed_);
  std::vector<std::size_t> extent(m());
  std::size_t nodes = 1;
  for (std::size_t k = 0; k < m(); ++k) nodes *= (extent[k] = coarse[k].size());
  out.field_.resize(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(nodes));
  std::vector<std::size_t> idx(m(), 0), fine(m());
  std::size_t lin = 0;
  do {
    for (std::size_t k = 0; k < m(); ++k) fine[k] = map[k][idx[k]];
    out.field_.col(static_cast<Eigen::Index>(lin++)) = field_.col(static_cast<Eigen::Index>(linear_index(fine)));
  } while (next_index(idx, extent));
  return out;
}

void SheetGrid::write_csv(std::ostream& os) const {
  os << "# sheetlab-sheet v1\n";
  os << "# m=" << m() << " d=" << d_ << " seed=" << seed_ << "\n";
  os.precision(17);
  for (std::size_t k = 0; k < m(); ++k) {
    os << "# axis" << k << "=";
    for (std::size_t i = 0; i < partitions_[k].size(); ++i) os << (i ? "," : "") << partitions_[k][i];
    os << "\n";
  }
  for (std::size_t k = 0; k < m(); ++k) os << "i" << k << ",";
  for (std::size_t k = 0; k < m(); ++k) os << "t" << k << ",";
  for (std::size_t a = 0; a < d_; ++a) os << "W" << a << (a + 1 < d_ ? "," : "\n");
  std::vector<std::size_t> extent(m()), idx(m(), 0);
  for (std::size_t k = 0; k < m(); ++k) extent[k] = partitions_[k].size();
  std::size_t lin = 0;
  do {
    for (std::size_t k = 0; k < m(); ++k) os << idx[k] << ",";
    for (std::size_t k = 0; k < m(); ++k) os << partitions_[k][idx[k]] << ",";
    for (std::size_t a = 0; a < d_; ++a)
      os << field_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(lin)) << (a + 1 < d_ ? "," : "\n");
    ++lin;
  } while (next_index(idx, extent));
}

SheetGrid sample_sheet(const SheetSpec& spec, std::uint64_t seed) {
  validate_partitions(spec.partitions);
  if (spec.d < 1) throw std::invalid_argument("sample_sheet: d must be >= 1");
  Eigen::VectorXd x = spec.x.size() == 0 ? Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.d)) : spec.x;
  if (static_cast<std::size_t>(x.size()) != spec.d)
    throw std::invalid_argument("sample_sheet: start value has wrong dimension");

  SheetGrid grid(spec.partitions, spec.d, x, seed);
  const std::size_t m = grid.m();
  std::vector<std::size_t> extent(m);
  std::size_t nodes = 1;
  for (std::size_t k = 0; k < m; ++k) nodes *= (extent[k] = spec.partitions[k].size());

  const auto d = static_cast<Eigen::Index>(spec.d);
  Eigen::MatrixXd& field = grid.field_;
  field.setZero(d, static_cast<Eigen::Index>(nodes));

  // Cell increments sit at their upper corner; the cell id is the row-major
  // index over cell counts, fixed by geometry alone.
  const CounterRng rng(seed);
  std::vector<std::size_t> idx(m, 0);
  std::size_t lin = 0;
  do {
    bool interior = true;
    double cell_volume = 1.0;
    std::uint64_t cell_id = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (idx[k] == 0) {
        interior = false;
        break;
      }
      cell_volume *= spec.partitions[k][idx[k]] - spec.partitions[k][idx[k] - 1];
      cell_id = cell_id * (extent[k] - 1) + (idx[k] - 1);
    }
    if (interior) {
      const double sd = std::sqrt(cell_volume);
      for (Eigen::Index a = 0; a < d; ++a)
        field(a, static_cast<Eigen::Index>(lin)) = sd * rng.normal(cell_id, static_cast<std::uint32_t>(a));
    }
    ++lin;
  } while (next_index(idx, extent));

  // m-dimensional prefix sum, one axis at a time.
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t s = grid.stride(k);
    for (std::size_t node = 0; node < nodes; ++node) {
      if ((node / s) % extent[k] != 0)
        field.col(static_cast<Eigen::Index>(node)) += field.col(static_cast<Eigen::Index>(node - s));
    }
  }
  field.colwise() += x;
  return grid;
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) { return mix_seed(seed, r); }

Estimate estimate_covariance(const SheetSpec& spec, std::span<const std::size_t> s,
                             std::span<const std::size_t> t, std::size_t a, std::size_t b,
                             const McOptions& mc) {
  if (a >= spec.d || b >= spec.d) throw std::out_of_range("estimate_covariance: component out of range");
  if (s.size() != spec.m() || t.size() != spec.m())
    throw std::invalid_argument("estimate_covariance: node dimension mismatch");
  Estimate result;
  result.theoretical = 0.0;
  if (a == b) {
    result.theoretical = 1.0;
    for (std::size_t k = 0; k < spec.m(); ++k) {
      if (s[k] >= spec.partitions[k].size() || t[k] >= spec.partitions[k].size())
        throw std::out_of_range("estimate_covariance: node out of bounds");
      result.theoretical *= std::min(spec.partitions[k][s[k]], spec.partitions[k][t[k]]);
    }
  }
  const auto moments = reduce_replicates(mc, Moments(1), [&](Moments& acc, std::size_t r) {
    const SheetGrid g = sample_sheet(spec, replicate_seed(mc.seed, r));
    const double ws = g.value(s)[static_cast<Eigen::Index>(a)] - g.start()[static_cast<Eigen::Index>(a)];
    const double wt = g.value(t)[static_cast<Eigen::Index>(b)] - g.start()[static_cast<Eigen::Index>(b)];
    acc.push(ws * wt);
  });
  result.mean = moments.mean()[0];
  result.se = moments.standard_error()[0];
  return result;
}

}  // namespace sheetlab
