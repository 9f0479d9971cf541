// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "sheetlab/montecarlo.hpp"
#include "sheetlab/quadrature.hpp"
#include "sheetlab/sheet.hpp"

namespace sheetlab {

/// Bounded continuous test function f: R^d -> R.
using Field = std::function<double(const Eigen::VectorXd& y)>;

/// Isotropic Gaussian density with per-component variance `variance`.
template <typename Scalar>
Scalar gaussian_density(const Scalar& variance, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y) {
  using std::exp;
  using std::pow;
  const Scalar two_pi_var = Scalar(2.0 * 3.14159265358979323846) * variance;
  return pow(two_pi_var, -Scalar(0.5) * Scalar(static_cast<double>(x.size()))) *
         exp(-(x - y).squaredNorm() / (Scalar(2.0) * variance));
}

/// K(t; x, y): transition density of the sheet from x to y at multitime t.
/// Throws std::domain_error when volume(t) == 0.
double forward_density(const MultiTime& t, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// L(t; x, y) for maturity T: Gaussian with variance V - v. Requires V > v.
double backward_density(const MultiTime& maturity, const MultiTime& t, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& y);

struct MonteCarloMethod {
  McOptions mc;
};
struct QuadratureMethod {
  std::size_t nodes = kDefaultQuadratureNodes;
};
using MeanMethod = std::variant<MonteCarloMethod, QuadratureMethod>;

/// Value with an error estimate: the standard error for Monte-Carlo, the
/// difference to a rule with half the nodes for quadrature, 0 when exact.
struct MeanValue {
  double value = 0.0;
  double error = 0.0;
};

/// E[f(x + sqrt(variance) Z)], Z ~ N(0, I_d); returns f(x) exactly at zero variance.
MeanValue gaussian_mean_value(const Field& f, double variance, const Eigen::VectorXd& x,
                              const MeanMethod& method);

/// u(t, x) = E[f(W^x_t)].
MeanValue forward_mean_value(const Field& f, const MultiTime& t, const Eigen::VectorXd& x,
                             const MeanMethod& method);

/// w(t, x) = E_{t,x}[f(W^x_T)]. Requires volume(T) >= volume(t).
MeanValue backward_mean_value(const Field& f, const MultiTime& maturity, const MultiTime& t,
                              const Eigen::VectorXd& x, const MeanMethod& method);

/**
 * Function g(v, x) of the volume and the space variable. The optional exact
 * derivative suppliers replace finite differences where present.
 */
struct HeatFunction {
  std::function<double(double v, const Eigen::VectorXd& x)> g;
  std::function<double(double v, const Eigen::VectorXd& x)> dv;         ///< optional
  std::function<double(double v, const Eigen::VectorXd& x)> laplacian;  ///< optional
};

/// Function u(t, x) of the multitime, with optional exact x-Laplacian.
struct SpaceTimeFunction {
  std::function<double(const MultiTime& t, const Eigen::VectorXd& x)> u;
  std::function<double(const MultiTime& t, const Eigen::VectorXd& x)> laplacian;  ///< optional

  /// u(t, x) = g(t^1 ... t^m, x).
  static SpaceTimeFunction lift(const HeatFunction& g);
};

/// Default finite-difference step.
inline constexpr double kDefaultStep = 1e-3;

/// Central-difference estimate of d_alpha u - 1/2 c_alpha(t) Laplacian u for
/// each alpha. Requires volume(t) > 0 and h < min_alpha t^alpha / 10.
Eigen::VectorXd forward_pde_residual(const SpaceTimeFunction& u, const MultiTime& t,
                                     const Eigen::VectorXd& x, double h = kDefaultStep);

/// Same with the sign of the diffusion term flipped: d_alpha w + 1/2 c_alpha Laplacian w.
Eigen::VectorXd backward_pde_residual(const SpaceTimeFunction& w, const MultiTime& t,
                                      const Eigen::VectorXd& x, double h = kDefaultStep);

enum class HeatSign { forward, backward };

/// dg/dv -+ 1/2 Laplacian g in the single volume variable. Requires v > h.
double volumetric_heat_residual(const HeatFunction& g, HeatSign sign, double v,
                                const Eigen::VectorXd& x, double h = kDefaultStep);

/// max |u(t) - u(t')| over pairs of equal volume (relative tolerance 1e-12);
/// throws std::invalid_argument on a volume mismatch.
double volumetric_invariance_check(const Field& f,
                                   const std::vector<std::pair<MultiTime, MultiTime>>& pairs,
                                   const Eigen::VectorXd& x, const MeanMethod& method);

/// Central-difference x-Laplacian.
double fd_laplacian(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                    double h);

}  // namespace sheetlab
