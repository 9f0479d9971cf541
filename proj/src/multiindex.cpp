// SPDX-License-Identifier: MIT
#include "sheetlab/multiindex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sheetlab {

namespace {

void validate(const std::vector<int>& c) {
  if (c.empty()) throw std::invalid_argument("MultiIndex: dimension must be >= 1");
  for (int v : c)
    if (v < 0) throw std::invalid_argument("MultiIndex: negative component");
}

// Appends every index of dimension d with |n| == total, lexicographically descending.
void append_order(std::size_t d, int total, std::vector<int>& prefix,
                  std::vector<MultiIndex>& out) {
  if (prefix.size() + 1 == d) {
    prefix.push_back(total);
    out.emplace_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int first = total; first >= 0; --first) {
    prefix.push_back(first);
    append_order(d, total - first, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> components) : components_(std::move(components)) {
  validate(components_);
}

MultiIndex::MultiIndex(std::initializer_list<int> components) : components_(components) {
  validate(components_);
}

MultiIndex MultiIndex::zero(std::size_t d) { return MultiIndex(std::vector<int>(d, 0)); }

MultiIndex MultiIndex::unit(std::size_t d, std::size_t axis, int k) {
  if (axis >= d) throw std::out_of_range("MultiIndex::unit: axis out of range");
  std::vector<int> c(d, 0);
  c[axis] = k;
  return MultiIndex(std::move(c));
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (dim() != other.dim()) throw std::invalid_argument("MultiIndex: dimension mismatch");
  std::vector<int> c(components_);
  for (std::size_t a = 0; a < c.size(); ++a) c[a] += other.components_[a];
  return MultiIndex(std::move(c));
}

std::strong_ordering MultiIndex::operator<=>(const MultiIndex& other) const {
  if (auto c = dim() <=> other.dim(); c != 0) return c;
  if (auto c = order(*this) <=> order(other); c != 0) return c;
  // Descending lexicographic inside one total order.
  for (std::size_t a = 0; a < dim(); ++a) {
    if (components_[a] != other.components_[a])
      return other.components_[a] <=> components_[a];
  }
  return std::strong_ordering::equal;
}

std::string MultiIndex::to_string() const {
  std::string s = "(";
  for (std::size_t a = 0; a < components_.size(); ++a) {
    if (a) s += ",";
    s += std::to_string(components_[a]);
  }
  return s + ")";
}

int order(const MultiIndex& n) {
  auto c = n.components();
  return std::accumulate(c.begin(), c.end(), 0);
}

std::uint64_t factorial(const MultiIndex& n) {
  std::uint64_t result = 1;
  for (int k : n.components()) {
    if (k > kMaxFactorialComponent)
      throw std::range_error("factorial: component " + std::to_string(k) + " exceeds cap");
    for (int j = 2; j <= k; ++j) {
      if (__builtin_mul_overflow(result, static_cast<std::uint64_t>(j), &result))
        throw std::range_error("factorial: " + n.to_string() + "! overflows 64 bits");
    }
  }
  return result;
}

double monomial(const Eigen::Ref<const Eigen::VectorXd>& xi, const MultiIndex& n) {
  if (static_cast<std::size_t>(xi.size()) != n.dim())
    throw std::invalid_argument("monomial: dimension mismatch");
  double p = 1.0;
  for (std::size_t a = 0; a < n.dim(); ++a) {
    // Integer power by repeated multiplication; the empty product gives 0^0 = 1.
    for (int j = 0; j < n[a]; ++j) p *= xi[static_cast<Eigen::Index>(a)];
  }
  return p;
}

std::optional<MultiIndex> lower(const MultiIndex& n, std::size_t axis, int k) {
  if (axis >= n.dim()) throw std::out_of_range("lower: axis out of range");
  if (k < 1) throw std::invalid_argument("lower: amount must be positive");
  if (n[axis] < k) return std::nullopt;
  std::vector<int> c(n.components().begin(), n.components().end());
  c[axis] -= k;
  return MultiIndex(std::move(c));
}

std::vector<MultiIndex> enumerate_up_to(std::size_t d, int max_order) {
  if (d < 1) throw std::invalid_argument("enumerate_up_to: d must be >= 1");
  std::vector<MultiIndex> out;
  std::vector<int> prefix;
  prefix.reserve(d);
  for (int total = 0; total <= max_order; ++total) append_order(d, total, prefix, out);
  return out;
}

}  // namespace sheetlab
