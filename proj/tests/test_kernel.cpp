// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sheetlab/hermite.hpp"
#include "sheetlab/kernel.hpp"
#include "sheetlab/test_functions.hpp"

using namespace sheetlab;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.begin(), static_cast<Eigen::Index>(v.size()));
}

// Trapezoid rule on a tensor box of +-10 sd around x.
double trapezoid_mass(const MultiTime& t, const Eigen::VectorXd& x, int points) {
  const auto d = x.size();
  const double sd = std::sqrt(volume(t));
  const double h = 20.0 * sd / (points - 1);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  double sum = 0.0;
  Eigen::VectorXd y(d);
  while (true) {
    for (Eigen::Index a = 0; a < d; ++a) y[a] = x[a] - 10.0 * sd + h * idx[static_cast<std::size_t>(a)];
    double w = 1.0;
    for (int i : idx) w *= (i == 0 || i == points - 1) ? 0.5 * h : h;
    sum += w * forward_density(t, x, y);
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == points) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return sum;
}

SpaceTimeFunction forward_kernel_field(const Eigen::VectorXd& y) {
  return {[y](const MultiTime& t, const Eigen::VectorXd& x) { return forward_density(t, x, y); }, {}};
}

SpaceTimeFunction backward_kernel_field(const MultiTime& maturity, const Eigen::VectorXd& y) {
  return {[maturity, y](const MultiTime& t, const Eigen::VectorXd& x) { return backward_density(maturity, t, x, y); }, {}};
}

}  // namespace

TEST_CASE("forward density values") {
  CHECK(forward_density(MultiTime{1}, vec({0}), vec({0})) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)));
  CHECK(forward_density(MultiTime{2, 3}, vec({0}), vec({0})) == doctest::Approx(1.0 / std::sqrt(12 * std::numbers::pi)));
  CHECK_THROWS_AS(forward_density(MultiTime{0, 3}, vec({0}), vec({0})), std::domain_error);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector2d x(n(gen), n(gen)), y(n(gen), n(gen));
    const MultiTime t{0.5 + std::abs(n(gen)), 0.5 + std::abs(n(gen))};
    CHECK(forward_density(t, x, y) == forward_density(t, y, x));
  }
}

TEST_CASE("backward density values") {
  const Eigen::Vector2d o = Eigen::Vector2d::Zero();
  CHECK(backward_density(MultiTime{2, 1}, MultiTime{1, 1}, o, o) == doctest::Approx(1.0 / (2 * std::numbers::pi)));
  const Eigen::Vector2d x(0.3, -0.4), y(1.0, 0.2);
  CHECK(backward_density(MultiTime{2, 3}, MultiTime{1, 2}, x, y) == doctest::Approx(forward_density(MultiTime{4}, x, y)));
  CHECK_THROWS_AS(backward_density(MultiTime{1, 1}, MultiTime{1, 1}, x, y), std::domain_error);
  // Tail limit: as V - v shrinks to 0 with x != y the density decreases to 0.
  double last = backward_density(MultiTime{1.1}, MultiTime{1.0}, vec({0}), vec({1}));
  for (double gap : {0.05, 0.02, 0.01, 0.005, 0.001}) {
    const double cur = backward_density(MultiTime{1.0 + gap}, MultiTime{1.0}, vec({0}), vec({1}));
    CHECK(cur < last);
    last = cur;
  }
  CHECK(last < 1e-200);
}

TEST_CASE("density integrates to one") {
  for (double v : {0.5, 1.0, 6.0})
    for (int d = 1; d <= 3; ++d) {
      const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(d, -0.5, 0.7);
      CHECK(std::abs(trapezoid_mass(MultiTime{v}, x, d == 3 ? 121 : 401) - 1.0) <= 1e-8);
    }
}

TEST_CASE("Chapman-Kolmogorov in the volume") {
  const double v1 = 0.7, v2 = 1.6;
  for (double x : {-1.0, 0.0, 0.4})
    for (double y : {-0.5, 0.9, 2.0}) {
      const int points = 4001;
      const double lo = -15.0, hi = 15.0, h = (hi - lo) / (points - 1);
      double sum = 0.0;
      for (int i = 0; i < points; ++i) {
        const double z = lo + h * i;
        const double w = (i == 0 || i == points - 1) ? 0.5 * h : h;
        sum += w * forward_density(MultiTime{v1}, vec({x}), vec({z})) * forward_density(MultiTime{v2}, vec({z}), vec({y}));
      }
      CHECK(std::abs(sum - forward_density(MultiTime{v1 + v2}, vec({x}), vec({y}))) <= 1e-6);
    }
}

TEST_CASE("forward mean values") {
  const TestFunction cosf = make_test_function("cos");
  const MeanValue q = forward_mean_value(cosf.f, MultiTime{1, 1}, vec({0}), QuadratureMethod{});
  CHECK(std::abs(q.value - std::exp(-0.5)) <= 1e-6);
  const MeanValue mc = forward_mean_value(cosf.f, MultiTime{1, 1}, vec({0}), MonteCarloMethod{{100000, 3, 0}});
  CHECK(std::abs(mc.value - std::exp(-0.5)) <= 4 * mc.error);

  const Eigen::Vector2d x(0.3, -1.1);
  for (const auto& name : test_function_names()) {
    const TestFunction tf = make_test_function(name);
    CHECK(forward_mean_value(tf.f, MultiTime{0.0, 2.0}, x, QuadratureMethod{}).value == tf.f(x));
    CHECK(forward_mean_value(tf.f, MultiTime{3.0, 0.0}, x, MonteCarloMethod{{10, 1, 0}}).value == tf.f(x));
  }
  const Field one = [](const Eigen::VectorXd&) { return 1.0; };
  CHECK(forward_mean_value(one, MultiTime{1.3, 2.0}, x, MonteCarloMethod{{1000, 1, 0}}).value == 1.0);
  CHECK(forward_mean_value(one, MultiTime{1.3, 2.0}, x, QuadratureMethod{}).value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("test functions match their closed-form means") {
  for (const auto& name : test_function_names())
    for (int d = 1; d <= 2; ++d)
      for (double var : {0.3, 1.0, 2.5}) {
        const TestFunction tf = make_test_function(name);
        const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(d, 0.4, -0.3);
        const MeanValue quad = gaussian_mean_value(tf.f, var, x, QuadratureMethod{});
        const double err = std::abs(quad.value - tf.mean(var, x));
        CAPTURE(name);
        CAPTURE(var);
        // The steep erf profile converges slowly in the node count; there the
        // reported node-halving error has to cover the true error instead.
        if (name == "indicator_smooth") {
          CHECK(err <= quad.error);
          CHECK(err <= 1e-4);
        } else {
          CHECK(err <= 1e-9 * std::max(1.0, std::abs(tf.mean(var, x))));
        }
      }
  CHECK_THROWS_AS(make_test_function("sinc"), std::invalid_argument);
}

TEST_CASE("backward mean values") {
  const TestFunction cosf = make_test_function("cos");
  const MultiTime T{2, 1}, t{1, 1};
  CHECK(std::abs(backward_mean_value(cosf.f, T, t, vec({0}), QuadratureMethod{}).value - std::exp(-0.5)) <= 1e-6);
  CHECK(backward_mean_value(cosf.f, T, T, vec({0.7}), QuadratureMethod{}).value == std::cos(0.7));
  CHECK(backward_mean_value(cosf.f, MultiTime{3, 2}, MultiTime{2, 2}, vec({0.2}), QuadratureMethod{}).value ==
        forward_mean_value(cosf.f, MultiTime{2}, vec({0.2}), QuadratureMethod{}).value);
  CHECK_THROWS_AS(backward_mean_value(cosf.f, t, T, vec({0}), QuadratureMethod{}), std::domain_error);
}

TEST_CASE("maximum principle") {
  for (const auto& name : {"cos", "gauss_bump", "indicator_smooth"}) {
    const TestFunction tf = make_test_function(name);
    for (double v : {0.1, 1.0, 5.0})
      for (double x0 : {-2.0, 0.0, 1.5}) {
        const Eigen::Vector2d x(x0, 0.5);
        CHECK(std::abs(gaussian_mean_value(tf.f, v, x, QuadratureMethod{}).value) <= tf.sup_norm + 1e-12);
        CHECK(std::abs(gaussian_mean_value(tf.f, v, x, MonteCarloMethod{{2000, 1, 0}}).value) <= tf.sup_norm);
      }
  }
}

TEST_CASE("kernel PDE residuals") {
  const SpaceTimeFunction K = forward_kernel_field(vec({0}));
  CHECK(forward_pde_residual(K, MultiTime{1, 1}, vec({0.3}), 1e-3).cwiseAbs().maxCoeff() <= 1e-5);
  const SpaceTimeFunction constant{[](const MultiTime&, const Eigen::VectorXd&) { return 2.0; }, {}};
  CHECK(forward_pde_residual(constant, MultiTime{1, 2}, vec({0.1, 0.2})).cwiseAbs().maxCoeff() == 0.0);
  CHECK(backward_pde_residual(constant, MultiTime{1, 2}, vec({0.1, 0.2})).cwiseAbs().maxCoeff() == 0.0);
  const SpaceTimeFunction harmonic{[](const MultiTime&, const Eigen::VectorXd& x) { return x[0]; }, {}};
  CHECK(forward_pde_residual(harmonic, MultiTime{1, 2}, vec({0.1, 0.2})).cwiseAbs().maxCoeff() <= 1e-9);

  const MultiTime T{2, 2};
  const SpaceTimeFunction L = backward_kernel_field(T, vec({0}));
  CHECK(backward_pde_residual(L, MultiTime{1, 1}, vec({0.3}), 1e-3).cwiseAbs().maxCoeff() <= 1e-5);

  CHECK_THROWS_AS(forward_pde_residual(K, MultiTime{0.005, 1}, vec({0.3}), 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(forward_pde_residual(K, MultiTime{0, 1}, vec({0.3}), 1e-3), std::domain_error);
}

TEST_CASE("kernel residuals decay as h^2") {
  const auto ratio = [](const SpaceTimeFunction& u, bool forward, const Eigen::VectorXd& x) {
    const MultiTime t{1, 1};
    const auto r = [&](double h) {
      return (forward ? forward_pde_residual(u, t, x, h) : backward_pde_residual(u, t, x, h)).cwiseAbs().maxCoeff();
    };
    return r(2e-3) / r(1e-3);
  };
  for (int d = 1; d <= 2; ++d) {
    const Eigen::VectorXd x = d == 1 ? vec({0.3}) : vec({0.3, -0.2});
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
    const double fr = ratio(forward_kernel_field(y), true, x);
    const double br = ratio(backward_kernel_field(MultiTime{2, 2}, y), false, x);
    CAPTURE(d);
    CHECK(fr >= 3.5);
    CHECK(fr <= 4.5);
    CHECK(br >= 3.5);
    CHECK(br <= 4.5);
  }
}

TEST_CASE("Hermite lift solves the backward system") {
  for (const auto& n : enumerate_up_to(1, 4)) {
    HeatFunction g{[n](double v, const Eigen::VectorXd& x) { return hermite(n, v, x); }, {},
                   [n](double v, const Eigen::VectorXd& x) {
                     auto once = lower(n, 0, 1);
                     auto twice = once ? lower(*once, 0, 1) : std::nullopt;
                     return twice ? hermite(*twice, v, x) : 0.0;
                   }};
    const Eigen::VectorXd r = backward_pde_residual(SpaceTimeFunction::lift(g), MultiTime{0.8, 1.7}, vec({0.6}));
    CHECK(r.cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("volumetric heat residuals") {
  const MultiIndex n{2, 1};
  HeatFunction exact{[n](double v, const Eigen::VectorXd& x) { return hermite(n, v, x); },
                     [n](double v, const Eigen::VectorXd& x) { return hermite_dv(n, v, x); },
                     [n](double v, const Eigen::VectorXd& x) {
                       double s = 0.0;
                       for (std::size_t a = 0; a < 2; ++a)
                         if (auto l = lower(n, a, 2)) s += hermite(*l, v, x);
                       return s;
                     }};
  CHECK(std::abs(volumetric_heat_residual(exact, HeatSign::backward, 1.4, vec({0.3, -0.8}))) <= 1e-12);

  HeatFunction kernel{[](double v, const Eigen::VectorXd& x) { return gaussian_density(v, x, Eigen::VectorXd(Eigen::VectorXd::Zero(x.size()))); }, {}, {}};
  CHECK(std::abs(volumetric_heat_residual(kernel, HeatSign::forward, 1.0, vec({0.4}), 1e-4)) <= 1e-6);

  HeatFunction linear{[](double, const Eigen::VectorXd& x) { return 2.0 * x[0] - x[1]; }, {}, {}};
  CHECK(std::abs(volumetric_heat_residual(linear, HeatSign::forward, 1.0, vec({0.4, 1.0}))) <= 1e-9);
  CHECK(std::abs(volumetric_heat_residual(linear, HeatSign::backward, 1.0, vec({0.4, 1.0}))) <= 1e-9);
  CHECK_THROWS_AS(volumetric_heat_residual(linear, HeatSign::forward, 1e-4, vec({0.4, 1.0}), 1e-3), std::invalid_argument);
}

TEST_CASE("volumetric invariance") {
  const TestFunction cosf = make_test_function("cos");
  CHECK(volumetric_invariance_check(cosf.f, {{MultiTime{2, 3}, MultiTime{6, 1}}}, vec({0}), QuadratureMethod{}) <= 1e-12);
  CHECK(volumetric_invariance_check(cosf.f, {{MultiTime{1, 1, 1}, MultiTime{1, 1, 1}}}, vec({0}), QuadratureMethod{}) == 0.0);
  CHECK(volumetric_invariance_check(cosf.f, {{MultiTime{0.5, 4}, MultiTime{1, 2}}}, vec({0.3}),
                                    MonteCarloMethod{{5000, 8, 0}}) == 0.0);
  CHECK_THROWS_AS(volumetric_invariance_check(cosf.f, {{MultiTime{2, 3}, MultiTime{6, 2}}}, vec({0}), QuadratureMethod{}),
                  std::invalid_argument);
}

TEST_CASE("exchange symmetry of the mean value in the multitime") {
  const TestFunction bump = make_test_function("gauss_bump");
  const Eigen::Vector2d x(0.4, -0.2);
  const MultiTime t{1.0, 2.0, 0.5};
  const auto u = [&](const Eigen::VectorXd& s) { return forward_mean_value(bump.f, MultiTime(s), x, QuadratureMethod{}).value; };
  const double h = 1e-4;
  Eigen::Vector3d grad;
  for (int a = 0; a < 3; ++a) {
    Eigen::VectorXd up = t.coords(), dn = t.coords();
    up[a] += h;
    dn[a] -= h;
    grad[a] = (u(up) - u(dn)) / (2 * h);
  }
  const Eigen::VectorXd c = volume_coefficients(t);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) CHECK(std::abs(c[b] * grad[a] - c[a] * grad[b]) <= 1e-7);
}
