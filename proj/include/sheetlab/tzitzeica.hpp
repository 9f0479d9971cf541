// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sheetlab {

using Point3 = Eigen::Vector3d;

struct ChartError : std::domain_error {
  using std::domain_error::domain_error;
};
struct SingularPointError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Level set F(t^1, t^2, t^3) = level. Missing derivative suppliers fall back
/// to central differences with step `fd_step`.
struct ImplicitSurface3D {
  std::function<double(const Point3&)> F;
  std::function<Eigen::Vector3d(const Point3&)> gradient;
  std::function<Eigen::Matrix3d(const Point3&)> hessian;
  double level = 0.0;
  double fd_step = 1e-5;

  Eigen::Vector3d grad(const Point3& p) const;
  Eigen::Matrix3d hess(const Point3& p) const;
};

/// t^1 t^2 t^3 = k, closed-form partials.
ImplicitSurface3D volume_surface(double k);
/// The same surface with finite-difference partials.
ImplicitSurface3D volume_surface_fd(double k, double h = 1e-5);
/// |t|^2 = radius^2.
ImplicitSurface3D sphere_surface(double radius = 1.0);

/**
 * Gauss curvature of an implicit surface from first and second partials in
 * the chart solved for the third coordinate:
 *
 *   K = [A B - C^2] / [F_3^2 |grad F|^4],
 *   A = F_3 (F_3 F_11 - 2 F_1 F_13) + F_1^2 F_33,
 *   B = F_3 (F_3 F_22 - 2 F_2 F_23) + F_2^2 F_33,
 *   C = F_3 (F_3 F_12 - F_1 F_23 - F_2 F_13) + F_1 F_2 F_33.
 */
template <typename Scalar>
Scalar implicit_gauss_curvature(const Eigen::Matrix<Scalar, 3, 1>& g, const Eigen::Matrix<Scalar, 3, 3>& H) {
  const Scalar &F1 = g[0], &F2 = g[1], &F3 = g[2];
  const Scalar A = F3 * (F3 * H(0, 0) - Scalar(2) * F1 * H(0, 2)) + F1 * F1 * H(2, 2);
  const Scalar B = F3 * (F3 * H(1, 1) - Scalar(2) * F2 * H(1, 2)) + F2 * F2 * H(2, 2);
  const Scalar C = F3 * (-F1 * H(1, 2) + F3 * H(0, 1) - F2 * H(0, 2)) + F1 * F2 * H(2, 2);
  const Scalar n2 = g.squaredNorm();
  return (A * B - C * C) / (F3 * F3 * n2 * n2);
}

/// `chart[i]` is the original axis playing the role of coordinate i; the
/// default solves for t^3. Throws ChartError when the chart partial vanishes
/// and SingularPointError when the gradient does.
double gauss_curvature(const ImplicitSurface3D& s, const Point3& p, std::array<int, 3> chart = {0, 1, 2});

/// |<grad F(p), p>| / |grad F(p)|.
double tangent_plane_distance(const ImplicitSurface3D& s, const Point3& p);

struct TzitzeicaPoint {
  Point3 p;
  double curvature = 0.0;
  double distance = 0.0;
  double ratio = 0.0;  ///< K / d^4
  std::string error;   ///< empty when the point was evaluated
};

struct TzitzeicaReport {
  std::vector<TzitzeicaPoint> points;
  double ratio_mean = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double relative_spread = 0.0;  ///< (max - min) / |mean| over evaluated points
  std::size_t failures = 0;
};

/// Exponent m + 1 for surfaces in R^3.
inline constexpr int kTzitzeicaExponent = 4;

/// Points must satisfy |F(p) - level| <= 1e-10 (scaled by max(1, |level|)).
TzitzeicaReport tzitzeica_report(const ImplicitSurface3D& s, const std::vector<Point3>& points);

/// Points on t^1 t^2 t^3 = k with (t^1, t^2) log-uniform in [lo, hi]^2 and
/// t^3 = k / (t^1 t^2).
std::vector<Point3> sample_volume_level_set(double k, std::size_t count, std::uint64_t seed, double lo = 0.5,
                                            double hi = 2.0);

enum class CurvatureClass { elliptic, hyperbolic, parabolic };

CurvatureClass classify_point(double curvature, double zero_band = 1e-12);
std::string to_string(CurvatureClass c);

struct LevelRoot {
  double v = 0.0;
  double derivative = 0.0;
  bool critical = false;  ///< |phi'(v)| below the threshold: not a hypersurface component
};

struct LevelSetOptions {
  double root_tol = 1e-12;
  double critical_threshold = 1e-8;
  double tangency_tol = 1e-10;
};

/**
 * Roots A_c of phi(v) = c on [lo, hi]: sign changes on a uniform grid are
 * refined by bisection, and touching roots (no sign change) are found by
 * bisecting phi' between neighbouring grid points around a local minimum of
 * |phi - c|. Derivatives use a five-point stencil.
 */
std::vector<LevelRoot> level_set_decomposition(const std::function<double(double)>& phi, double c, double lo,
                                               double hi, std::size_t grid_n, const LevelSetOptions& opt = {});

}  // namespace sheetlab
