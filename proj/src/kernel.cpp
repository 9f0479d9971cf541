// SPDX-License-Identifier: MIT
#include "sheetlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sheetlab/rng.hpp"

namespace sheetlab {

namespace {

constexpr std::uint32_t kMeanValuePurpose = 0x4Du;

void require_same_dim(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 1) throw std::invalid_argument("density: dimension mismatch");
}

Eigen::VectorXd residual(const SpaceTimeFunction& u, const MultiTime& t, const Eigen::VectorXd& x, double h,
                         double diffusion_sign) {
  if (!(volume(t) > 0.0)) throw std::domain_error("pde residual: volume(t) must be positive");
  if (!(h > 0.0) || !(h < t.coords().minCoeff() / 10.0))
    throw std::invalid_argument("pde residual: step must satisfy 0 < h < min t / 10");
  const auto m = static_cast<Eigen::Index>(t.dim());
  const Eigen::VectorXd c = volume_coefficients(t);
  const auto at = [&](const MultiTime& s) {
    return std::function<double(const Eigen::VectorXd&)>([&u, s](const Eigen::VectorXd& y) { return u.u(s, y); });
  };
  const double lap = u.laplacian ? u.laplacian(t, x) : fd_laplacian(at(t), x, h);
  Eigen::VectorXd r(m);
  for (Eigen::Index alpha = 0; alpha < m; ++alpha) {
    Eigen::VectorXd up = t.coords(), down = t.coords();
    up[alpha] += h;
    down[alpha] -= h;
    const double dt = (u.u(MultiTime(up), x) - u.u(MultiTime(down), x)) / (2.0 * h);
    r[alpha] = dt - diffusion_sign * 0.5 * c[alpha] * lap;
  }
  return r;
}

}  // namespace

double fd_laplacian(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                    double h) {
  const double center = f(x);
  double lap = 0.0;
  Eigen::VectorXd y = x;
  for (Eigen::Index a = 0; a < x.size(); ++a) {
    y[a] = x[a] + h;
    const double plus = f(y);
    y[a] = x[a] - h;
    const double minus = f(y);
    y[a] = x[a];
    lap += (plus - 2.0 * center + minus) / (h * h);
  }
  return lap;
}

double forward_density(const MultiTime& t, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  require_same_dim(x, y);
  const double v = volume(t);
  if (!(v > 0.0)) throw std::domain_error("forward_density: zero volume degenerates to a point mass");
  return gaussian_density(v, x, y);
}

double backward_density(const MultiTime& maturity, const MultiTime& t, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& y) {
  require_same_dim(x, y);
  const double gap = volume(maturity) - volume(t);
  if (!(gap > 0.0)) throw std::domain_error("backward_density: requires volume(T) > volume(t)");
  return gaussian_density(gap, x, y);
}

MeanValue gaussian_mean_value(const Field& f, double variance, const Eigen::VectorXd& x,
                              const MeanMethod& method) {
  if (x.size() < 1) throw std::invalid_argument("mean value: empty start point");
  if (variance < 0.0) throw std::domain_error("mean value: negative variance");
  if (variance == 0.0) return {f(x), 0.0};
  const double sd = std::sqrt(variance);
  return std::visit(
      [&](const auto& m) -> MeanValue {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, QuadratureMethod>) {
          const double full = gaussian_expectation(f, x, sd, gauss_hermite_rule(m.nodes));
          const double half = gaussian_expectation(f, x, sd, gauss_hermite_rule(std::max<std::size_t>(1, m.nodes / 2)));
          return {full, std::abs(full - half)};
        } else {
          const CounterRng rng(m.mc.seed);
          const auto d = x.size();
          const Moments mom = reduce_replicates(m.mc, Moments(1), [&](Moments& acc, std::size_t r) {
            Eigen::VectorXd y(d);
            for (Eigen::Index a = 0; a < d; ++a)
              y[a] = x[a] + sd * rng.normal(r, static_cast<std::uint32_t>(a), kMeanValuePurpose);
            acc.push(f(y));
          });
          return {mom.mean()[0], mom.standard_error()[0]};
        }
      },
      method);
}

MeanValue forward_mean_value(const Field& f, const MultiTime& t, const Eigen::VectorXd& x,
                             const MeanMethod& method) {
  return gaussian_mean_value(f, volume(t), x, method);
}

MeanValue backward_mean_value(const Field& f, const MultiTime& maturity, const MultiTime& t,
                              const Eigen::VectorXd& x, const MeanMethod& method) {
  const double gap = volume(maturity) - volume(t);
  if (gap < 0.0) throw std::domain_error("backward_mean_value: requires volume(T) >= volume(t)");
  return gaussian_mean_value(f, gap, x, method);
}

SpaceTimeFunction SpaceTimeFunction::lift(const HeatFunction& g) {
  SpaceTimeFunction u;
  u.u = [g](const MultiTime& t, const Eigen::VectorXd& x) { return g.g(volume(t), x); };
  if (g.laplacian)
    u.laplacian = [g](const MultiTime& t, const Eigen::VectorXd& x) { return g.laplacian(volume(t), x); };
  return u;
}

Eigen::VectorXd forward_pde_residual(const SpaceTimeFunction& u, const MultiTime& t,
                                     const Eigen::VectorXd& x, double h) {
  return residual(u, t, x, h, +1.0);
}

Eigen::VectorXd backward_pde_residual(const SpaceTimeFunction& w, const MultiTime& t,
                                      const Eigen::VectorXd& x, double h) {
  return residual(w, t, x, h, -1.0);
}

double volumetric_heat_residual(const HeatFunction& g, HeatSign sign, double v, const Eigen::VectorXd& x,
                                double h) {
  if (!(v > h) || !(h > 0.0)) throw std::invalid_argument("volumetric_heat_residual: requires v > h > 0");
  const double dv = g.dv ? g.dv(v, x) : (g.g(v + h, x) - g.g(v - h, x)) / (2.0 * h);
  const double lap =
      g.laplacian ? g.laplacian(v, x) : fd_laplacian([&](const Eigen::VectorXd& y) { return g.g(v, y); }, x, h);
  return sign == HeatSign::forward ? dv - 0.5 * lap : dv + 0.5 * lap;
}

double volumetric_invariance_check(const Field& f,
                                   const std::vector<std::pair<MultiTime, MultiTime>>& pairs,
                                   const Eigen::VectorXd& x, const MeanMethod& method) {
  double worst = 0.0;
  for (const auto& [s, t] : pairs) {
    const double vs = volume(s), vt = volume(t);
    if (std::abs(vs - vt) > 1e-12 * std::max(1.0, std::max(vs, vt)))
      throw std::invalid_argument("volumetric_invariance_check: pair members differ in volume");
    const double us = forward_mean_value(f, s, x, method).value;
    const double ut = forward_mean_value(f, t, x, method).value;
    worst = std::max(worst, std::abs(us - ut));
  }
  return worst;
}

}  // namespace sheetlab
