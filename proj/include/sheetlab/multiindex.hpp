// SPDX-License-Identifier: MIT
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sheetlab {

/// Largest single component accepted by factorial(); 20! is the last factorial
/// representable in 64 bits.
inline constexpr int kMaxFactorialComponent = 20;

/**
 * Multi-index n = (n_1, ..., n_d) of non-negative orders.
 *
 * The dimension is fixed at construction. Comparison operators implement the
 * graded ordering used everywhere a deterministic order is needed: first by
 * total order |n|, then lexicographically descending, so that (1,0) precedes
 * (0,1).
 */
class MultiIndex {
public:
  explicit MultiIndex(std::vector<int> components);
  MultiIndex(std::initializer_list<int> components);

  /// Zero index of dimension d.
  static MultiIndex zero(std::size_t d);
  /// k in slot `axis` (0-based), zero elsewhere.
  static MultiIndex unit(std::size_t d, std::size_t axis, int k = 1);

  std::size_t dim() const { return components_.size(); }
  int operator[](std::size_t a) const { return components_[a]; }
  std::span<const int> components() const { return components_; }

  MultiIndex operator+(const MultiIndex& other) const;

  bool operator==(const MultiIndex& other) const = default;
  std::strong_ordering operator<=>(const MultiIndex& other) const;

  std::string to_string() const;

private:
  std::vector<int> components_;
};

/// |n| = n_1 + ... + n_d
int order(const MultiIndex& n);

/// n! = n_1! ... n_d!, exact. Throws std::range_error past kMaxFactorialComponent
/// or when the product leaves 64-bit range.
std::uint64_t factorial(const MultiIndex& n);

/// xi^n with 0^0 = 1. Throws std::invalid_argument on dimension mismatch.
double monomial(const Eigen::Ref<const Eigen::VectorXd>& xi, const MultiIndex& n);

/// n - k e_axis, or nullopt when the component would go negative.
/// `axis` is 0-based; throws std::out_of_range when axis >= dim.
std::optional<MultiIndex> lower(const MultiIndex& n, std::size_t axis, int k = 1);

/// All n with |n| <= max_order in graded order. Size is C(d + max_order, d).
std::vector<MultiIndex> enumerate_up_to(std::size_t d, int max_order);

}  // namespace sheetlab
