// SPDX-License-Identifier: MIT
#include "sheetlab/tzitzeica.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sheetlab/rng.hpp"

namespace sheetlab {

Eigen::Vector3d ImplicitSurface3D::grad(const Point3& p) const {
  if (gradient) return gradient(p);
  Eigen::Vector3d g;
  for (int i = 0; i < 3; ++i) {
    Point3 a = p, b = p;
    a[i] += fd_step;
    b[i] -= fd_step;
    g[i] = (F(a) - F(b)) / (2.0 * fd_step);
  }
  return g;
}

Eigen::Matrix3d ImplicitSurface3D::hess(const Point3& p) const {
  if (hessian) return hessian(p);
  const double h = fd_step;
  Eigen::Matrix3d H;
  const double f0 = F(p);
  for (int i = 0; i < 3; ++i) {
    Point3 a = p, b = p;
    a[i] += h;
    b[i] -= h;
    H(i, i) = (F(a) - 2.0 * f0 + F(b)) / (h * h);
    for (int j = i + 1; j < 3; ++j) {
      Point3 pp = p, pm = p, mp = p, mm = p;
      pp[i] += h, pp[j] += h;
      pm[i] += h, pm[j] -= h;
      mp[i] -= h, mp[j] += h;
      mm[i] -= h, mm[j] -= h;
      H(i, j) = H(j, i) = (F(pp) - F(pm) - F(mp) + F(mm)) / (4.0 * h * h);
    }
  }
  return H;
}

ImplicitSurface3D volume_surface(double k) {
  ImplicitSurface3D s = volume_surface_fd(k);
  s.gradient = [](const Point3& p) { return Eigen::Vector3d(p[1] * p[2], p[0] * p[2], p[0] * p[1]); };
  s.hessian = [](const Point3& p) {
    Eigen::Matrix3d H;
    H << 0.0, p[2], p[1], p[2], 0.0, p[0], p[1], p[0], 0.0;
    return H;
  };
  return s;
}

ImplicitSurface3D volume_surface_fd(double k, double h) {
  ImplicitSurface3D s;
  s.F = [](const Point3& p) { return p[0] * p[1] * p[2]; };
  s.level = k;
  s.fd_step = h;
  return s;
}

ImplicitSurface3D sphere_surface(double radius) {
  ImplicitSurface3D s;
  s.F = [](const Point3& p) { return p.squaredNorm(); };
  s.gradient = [](const Point3& p) { return Eigen::Vector3d(2.0 * p); };
  s.hessian = [](const Point3&) { return Eigen::Matrix3d(2.0 * Eigen::Matrix3d::Identity()); };
  s.level = radius * radius;
  return s;
}

double gauss_curvature(const ImplicitSurface3D& s, const Point3& p, std::array<int, 3> chart) {
  std::array<int, 3> sorted = chart;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != std::array<int, 3>{0, 1, 2}) throw std::invalid_argument("gauss_curvature: chart is not a permutation");
  Eigen::Matrix3d P = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) P(i, chart[static_cast<std::size_t>(i)]) = 1.0;
  const Eigen::Vector3d g = P * s.grad(p);
  const Eigen::Matrix3d H = P * s.hess(p) * P.transpose();
  const double norm = g.norm();
  if (!(norm > 0.0)) throw SingularPointError("gauss_curvature: gradient vanishes");
  if (std::abs(g[2]) <= 1e-14 * norm) throw ChartError("gauss_curvature: chart partial vanishes; permute axes");
  return implicit_gauss_curvature<double>(g, H);
}

double tangent_plane_distance(const ImplicitSurface3D& s, const Point3& p) {
  const Eigen::Vector3d g = s.grad(p);
  const double norm = g.norm();
  if (!(norm > 0.0)) throw SingularPointError("tangent_plane_distance: gradient vanishes");
  return std::abs(g.dot(p)) / norm;
}

TzitzeicaReport tzitzeica_report(const ImplicitSurface3D& s, const std::vector<Point3>& points) {
  TzitzeicaReport report;
  double sum = 0.0;
  std::size_t evaluated = 0;
  report.ratio_min = std::numeric_limits<double>::infinity();
  report.ratio_max = -std::numeric_limits<double>::infinity();
  const double surface_tol = 1e-10 * std::max(1.0, std::abs(s.level));
  for (const Point3& p : points) {
    TzitzeicaPoint rec;
    rec.p = p;
    try {
      if (std::abs(s.F(p) - s.level) > surface_tol) throw std::domain_error("point is not on the level set");
      rec.curvature = gauss_curvature(s, p);
      rec.distance = tangent_plane_distance(s, p);
      rec.ratio = rec.curvature / std::pow(rec.distance, kTzitzeicaExponent);
      sum += rec.ratio;
      ++evaluated;
      report.ratio_min = std::min(report.ratio_min, rec.ratio);
      report.ratio_max = std::max(report.ratio_max, rec.ratio);
    } catch (const std::domain_error& e) {
      rec.error = e.what();
      ++report.failures;
    }
    report.points.push_back(std::move(rec));
  }
  if (evaluated > 0) {
    report.ratio_mean = sum / static_cast<double>(evaluated);
    report.relative_spread = (report.ratio_max - report.ratio_min) / std::abs(report.ratio_mean);
  } else {
    report.ratio_min = report.ratio_max = 0.0;
  }
  return report;
}

std::vector<Point3> sample_volume_level_set(double k, std::size_t count, std::uint64_t seed, double lo, double hi) {
  if (!(k > 0.0) || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("sample_volume_level_set: bad box");
  const CounterRng rng(seed);
  std::vector<Point3> pts;
  pts.reserve(count);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const auto [u1, u2] = rng.uniforms(CounterRng::make_counter(i, 0, 0x54u));
    const double t1 = std::exp(llo + (lhi - llo) * u1);
    const double t2 = std::exp(llo + (lhi - llo) * u2);
    pts.emplace_back(t1, t2, k / (t1 * t2));
  }
  return pts;
}

CurvatureClass classify_point(double curvature, double zero_band) {
  if (curvature > zero_band) return CurvatureClass::elliptic;
  if (curvature < -zero_band) return CurvatureClass::hyperbolic;
  return CurvatureClass::parabolic;
}

std::string to_string(CurvatureClass c) {
  switch (c) {
    case CurvatureClass::elliptic: return "elliptic";
    case CurvatureClass::hyperbolic: return "hyperbolic";
    case CurvatureClass::parabolic: return "parabolic";
  }
  return "unknown";
}

namespace {

double five_point_derivative(const std::function<double(double)>& f, double v) {
  const double h = 1e-3 * std::max(1.0, std::abs(v));
  return (f(v - 2 * h) - 8 * f(v - h) + 8 * f(v + h) - f(v + 2 * h)) / (12 * h);
}

// Root of g in [lo, hi] given a sign change.
double bisect(const std::function<double(double)>& g, double lo, double hi, double tol) {
  double glo = g(lo);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<LevelRoot> level_set_decomposition(const std::function<double(double)>& phi, double c, double lo,
                                               double hi, std::size_t grid_n, const LevelSetOptions& opt) {
  if (grid_n < 2) throw std::invalid_argument("level_set_decomposition: grid_n must be >= 2");
  if (!(hi > lo)) throw std::invalid_argument("level_set_decomposition: empty interval");
  const auto g = [&](double v) { return phi(v) - c; };
  const auto dg = [&](double v) { return five_point_derivative(phi, v); };

  std::vector<double> grid(grid_n), val(grid_n);
  for (std::size_t i = 0; i < grid_n; ++i) {
    grid[i] = i + 1 == grid_n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_n - 1);
    val[i] = g(grid[i]);
  }

  std::vector<double> found;
  const double touch_tol = opt.tangency_tol * std::max(1.0, std::abs(c));
  for (std::size_t i = 0; i < grid_n; ++i) {
    if (val[i] == 0.0) {
      found.push_back(grid[i]);
      continue;
    }
    if (i + 1 < grid_n && val[i + 1] != 0.0 && (val[i] < 0.0) != (val[i + 1] < 0.0))
      found.push_back(bisect(g, grid[i], grid[i + 1], opt.root_tol));
    // Touching root between neighbours: |g| has a local minimum without a sign change.
    if (i > 0 && i + 1 < grid_n && val[i - 1] != 0.0 && val[i + 1] != 0.0 &&
        (val[i - 1] < 0.0) == (val[i] < 0.0) && (val[i + 1] < 0.0) == (val[i] < 0.0) &&
        std::abs(val[i]) <= std::abs(val[i - 1]) && std::abs(val[i]) <= std::abs(val[i + 1])) {
      double a = grid[i - 1], b = grid[i + 1];
      if ((dg(a) < 0.0) != (dg(b) < 0.0)) {
        const double v = bisect(dg, a, b, opt.root_tol);
        if (std::abs(g(v)) <= touch_tol) found.push_back(v);
      }
    }
  }

  std::sort(found.begin(), found.end());
  std::vector<LevelRoot> roots;
  for (double v : found) {
    if (!roots.empty() && std::abs(v - roots.back().v) <= 1e-9 * std::max(1.0, std::abs(v))) continue;
    LevelRoot r;
    r.v = v;
    r.derivative = dg(v);
    r.critical = std::abs(r.derivative) < opt.critical_threshold;
    roots.push_back(r);
  }
  return roots;
}

}  // namespace sheetlab
