// SPDX-License-Identifier: MIT
#include "sheetlab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

namespace sheetlab {

namespace {

// Orthonormal probabilists' Hermite values p_0..p_{n-1} at z (p_k = He_k / sqrt(k!))
// and the derivative of p_n; returns p_n.
double orthonormal_hermite(std::size_t n, double z, double& dp_n, double& christoffel) {
  double prev = 0.0;
  double cur = 1.0;  // p_0
  christoffel = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double next = (z * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
    if (k + 1 < n) christoffel += cur * cur;
  }
  // p_n' = sqrt(n) p_{n-1}
  dp_n = std::sqrt(static_cast<double>(n)) * prev;
  return cur;
}

}  // namespace

GaussHermiteRule gauss_hermite_rule(std::size_t n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_rule: need at least one node");
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(size, size);
  for (Eigen::Index k = 1; k < size; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);

  GaussHermiteRule rule{eig.eigenvalues(), Eigen::VectorXd(size)};
  for (Eigen::Index i = 0; i < size; ++i) {
    double z = rule.nodes[i];
    double dp = 0.0, ch = 0.0;
    for (int it = 0; it < 8; ++it) {
      const double p = orthonormal_hermite(n, z, dp, ch);
      if (dp == 0.0) break;
      const double step = p / dp;
      z -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    orthonormal_hermite(n, z, dp, ch);
    rule.nodes[i] = z;
    rule.weights[i] = 1.0 / ch;
  }
  if (n % 2 == 1) rule.nodes[size / 2] = 0.0;
  rule.weights /= rule.weights.sum();
  return rule;
}

double gaussian_expectation(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& mean, double sd, const GaussHermiteRule& rule) {
  const auto d = static_cast<std::size_t>(mean.size());
  if (d < 1) throw std::invalid_argument("gaussian_expectation: empty mean");
  const std::size_t n = rule.size();
  std::vector<std::size_t> idx(d, 0);
  Eigen::VectorXd y(mean.size());
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t a = 0; a < d; ++a) {
      y[static_cast<Eigen::Index>(a)] = mean[static_cast<Eigen::Index>(a)] + sd * rule.nodes[static_cast<Eigen::Index>(idx[a])];
      w *= rule.weights[static_cast<Eigen::Index>(idx[a])];
    }
    sum += w * f(y);
    std::size_t k = d;
    while (k-- > 0) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return sum;
}

}  // namespace sheetlab
