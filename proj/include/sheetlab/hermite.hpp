// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "sheetlab/montecarlo.hpp"
#include "sheetlab/multiindex.hpp"

namespace sheetlab {

/**
 * One-dimensional volumetric Hermite polynomial H_k(v, x), the coefficient of
 * xi^k in exp(x xi - v xi^2 / 2).
 *
 * Evaluated by the three-term recurrence (k+1) H_{k+1} = x H_k - v H_{k-1},
 * which reduces to x^k / k! at v = 0. Generic in the scalar so it can be
 * evaluated on automatic-differentiation types.
 */
template <typename Scalar>
Scalar hermite_1d(int k, const Scalar& v, const Scalar& x) {
  if (k < 0) throw std::invalid_argument("hermite_1d: negative order");
  Scalar prev(1.0);
  if (k == 0) return prev;
  Scalar cur = x;
  for (int j = 1; j < k; ++j) {
    Scalar next = (x * cur - v * prev) / static_cast<double>(j + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// H_0(v,x), ..., H_kmax(v,x) in one pass.
template <typename Scalar>
std::vector<Scalar> hermite_1d_table(int kmax, const Scalar& v, const Scalar& x) {
  std::vector<Scalar> h(static_cast<std::size_t>(kmax) + 1, Scalar(1.0));
  if (kmax >= 1) h[1] = x;
  for (int j = 1; j < kmax; ++j)
    h[static_cast<std::size_t>(j) + 1] =
        (x * h[static_cast<std::size_t>(j)] - v * h[static_cast<std::size_t>(j) - 1]) / static_cast<double>(j + 1);
  return h;
}

/// H_n(v, x) = prod_a H_{n_a}(v, x^a). Throws on dimension mismatch.
double hermite(const MultiIndex& n, double v, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Cross-check route through the monic probabilists' polynomials:
/// H_k(v,x) = v^{k/2} / k! He_k(x / sqrt(v)). Requires v > 0.
double hermite_rodrigues_1d(int k, double v, double x);

/// dH_n/dv = -1/2 sum_a H_{n - 2 e_a}.
double hermite_dv(const MultiIndex& n, double v, const Eigen::Ref<const Eigen::VectorXd>& x);

/// dH_n/dx^a = H_{n - e_a}. Axis is 0-based.
double hermite_dx(const MultiIndex& n, std::size_t axis, double v,
                  const Eigen::Ref<const Eigen::VectorXd>& x);

/**
 * dH_n/dv + 1/2 Laplacian H_n.
 *
 * The v-derivative is taken by forward-mode automatic differentiation through
 * the recurrence, the Laplacian by double index shifting, so the two terms
 * come from independent routes.
 */
double backward_heat_residual(const MultiIndex& n, double v,
                              const Eigen::Ref<const Eigen::VectorXd>& x);

/// Monte-Carlo Gram matrix of the Hermite basis under Z ~ N(0, v I_d).
struct GramEstimate {
  std::vector<MultiIndex> basis;  ///< graded order, |n| <= max_order
  Eigen::MatrixXd mean;
  Eigen::MatrixXd se;
  Eigen::MatrixXd theoretical;  ///< diag v^{|n|} / n!, zero elsewhere

  /// Largest |mean - theoretical| / se over entries with se > 0; entries with
  /// se == 0 must match exactly, otherwise the result is +inf.
  double max_z_score() const;
};

GramEstimate orthogonality_matrix(std::size_t d, double v, int max_order, const McOptions& mc);

/**
 * Finite Hermite series Phi = sum_n a_n H_n(v, x).
 *
 * Coefficients are kept in graded order; zero coefficients are dropped.
 */
class HermiteSeries {
public:
  explicit HermiteSeries(std::size_t d);
  HermiteSeries(std::size_t d, std::initializer_list<std::pair<MultiIndex, double>> terms);

  std::size_t dim() const { return d_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const std::map<MultiIndex, double>& terms() const { return terms_; }

  HermiteSeries& set(const MultiIndex& n, double a);
  HermiteSeries& add(const MultiIndex& n, double a);
  double coefficient(const MultiIndex& n) const;
  int max_order() const;

  /// Terms with |n| <= p.
  HermiteSeries truncated(int p) const;
  /// Terms with |n| > p.
  HermiteSeries tail(int p) const;

  /// sum a_n^2 v^{|n|} / n!, the second moment E[Phi^2] under N(0, v I).
  double energy(double v) const;

  bool operator==(const HermiteSeries& other) const = default;

private:
  std::size_t d_;
  std::map<MultiIndex, double> terms_;
};

/// sum_n a_n H_n(v, x).
double series_eval(const HermiteSeries& s, double v, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Coefficient of q in the result is the coefficient of q + e_axis in s.
HermiteSeries series_derivative(const HermiteSeries& s, std::size_t axis);

/// Scalar process phi(v, x).
using VolumetricFunction = std::function<double(double v, const Eigen::VectorXd& x)>;

struct CoefficientEstimate {
  HermiteSeries series;
  std::map<MultiIndex, double> se;
};

/// a_n = n! / v^{|n|} E[phi(v, Z) H_n(v, Z)], Z ~ N(0, v I_d), for every |n| <= max_order.
CoefficientEstimate estimate_coefficients(const VolumetricFunction& phi, std::size_t d, double v,
                                          int max_order, const McOptions& mc);

/// Default truncation order for coefficient recovery.
inline constexpr int kDefaultMaxOrder = 8;

}  // namespace sheetlab
