// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

namespace sheetlab {

/// Gauss-Hermite rule for the standard normal weight: sum_i w_i g(z_i)
/// approximates E[g(Z)], Z ~ N(0, 1). Weights sum to 1.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  std::size_t size() const { return static_cast<std::size_t>(nodes.size()); }
};

/// n-point rule: Golub-Welsch eigen decomposition of the Jacobi matrix,
/// followed by Newton polishing of each node and Christoffel weights.
GaussHermiteRule gauss_hermite_rule(std::size_t n);

/// Default node count per dimension for Gaussian mean values.
inline constexpr std::size_t kDefaultQuadratureNodes = 64;

/// Tensor-product rule for E[f(mean + sd Z)], Z ~ N(0, I_d), d = mean.size().
double gaussian_expectation(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& mean, double sd, const GaussHermiteRule& rule);

}  // namespace sheetlab
