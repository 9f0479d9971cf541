// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <random>
#include <sstream>

#include "sheetlab/rng.hpp"
#include "sheetlab/sheet.hpp"

using namespace sheetlab;

namespace {

SheetSpec square(std::size_t cells, std::size_t d = 1, double side = 1.0) {
  return {{uniform_partition(side, cells), uniform_partition(side, cells)}, d, {}};
}

}  // namespace

TEST_CASE("volume and its coefficients") {
  CHECK(volume(MultiTime{2, 3}) == 6.0);
  CHECK(volume(MultiTime{1, 1, 1, 1}) == 1.0);
  CHECK(volume(MultiTime{0, 7}) == 0.0);
  CHECK(volume_coefficients(MultiTime{2, 3, 4}) == Eigen::Vector3d(12, 8, 6));
  CHECK(volume_coefficients(MultiTime{5}) == Eigen::VectorXd::Ones(1));
  CHECK(volume_coefficients(MultiTime{0, 3}) == Eigen::Vector2d(3, 0));
  CHECK_THROWS_AS(MultiTime({-1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("Euler identity sum c_alpha t^alpha = m v") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + trial % 5;
    Eigen::VectorXd t(m);
    for (int k = 0; k < m; ++k) t[k] = u(gen);
    const MultiTime mt(t);
    CHECK(volume_coefficients(mt).dot(t) == doctest::Approx(m * volume(mt)).epsilon(1e-13));
  }
}

TEST_CASE("single cell in one dimension is one N(0, length) draw") {
  const SheetSpec spec{{{0.0, 1.0}}, 1, {}};
  const SheetGrid g = sample_sheet(spec, 99);
  const std::size_t node[] = {1};
  CHECK(g.value(node)[0] == CounterRng(99).normal(0, 0));
  const std::size_t origin[] = {0};
  CHECK(g.value(origin)[0] == 0.0);
}

TEST_CASE("boundary pinning and prefix-sum structure") {
  Eigen::Vector2d x(0.5, -1.25);
  const SheetSpec spec{{{0.0, 0.3, 1.0, 1.2}, {0.0, 0.5, 2.0}}, 2, x};
  const SheetGrid g = sample_sheet(spec, 17);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const std::size_t node[] = {i, j};
      if (i == 0 || j == 0) CHECK(g.value(node) == x);
    }
  // Inclusion-exclusion recovers a cell increment with variance equal to its area.
  const std::size_t a[] = {2, 2}, b[] = {1, 2}, c[] = {2, 1}, e[] = {1, 1};
  const Eigen::VectorXd inc = g.value(a) - g.value(b) - g.value(c) + g.value(e);
  CHECK((inc - g.cell_increment(a)).norm() <= 1e-14);

  const SheetSpec line{{{0.0, 0.25, 0.5, 1.0}}, 1, {}};
  const SheetGrid h = sample_sheet(line, 4);
  double running = 0.0;
  for (std::size_t k = 1; k < 4; ++k) {
    const std::size_t up[] = {k};
    running += h.cell_increment(up)[0];
    CHECK(h.value(up)[0] == doctest::Approx(running).epsilon(1e-14));
  }
}

TEST_CASE("sampling is reproducible and seed-sensitive") {
  const SheetSpec spec = square(6, 2);
  CHECK(sample_sheet(spec, 3).field() == sample_sheet(spec, 3).field());
  CHECK(sample_sheet(spec, 3).field() != sample_sheet(spec, 4).field());
}

TEST_CASE("invalid sampler inputs") {
  CHECK_THROWS_AS(sample_sheet({{{0.0, 0.5, 0.4}}, 1, {}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_sheet({{{0.1, 0.5}}, 1, {}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_sheet({{{0.0}}, 1, {}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_sheet({{{0.0, 1.0}}, 0, {}}, 1), std::invalid_argument);
  const SheetGrid g = sample_sheet(square(2), 1);
  const std::size_t bad[] = {3, 0};
  CHECK_THROWS_AS(g.value(bad), std::out_of_range);
}

TEST_CASE("variance of the sheet equals the volume") {
  const SheetSpec spec = square(50);
  const McOptions mc{10000, 2024, 0};
  const std::size_t full[] = {50, 50}, half[] = {25, 25};
  const Estimate at_one = estimate_covariance(spec, full, full, 0, 0, mc);
  CHECK(at_one.theoretical == doctest::Approx(1.0));
  CHECK(at_one.within(4.0));
  const Estimate at_half = estimate_covariance(spec, half, half, 0, 0, mc);
  CHECK(at_half.theoretical == doctest::Approx(0.25));
  CHECK(at_half.within(4.0));
}

TEST_CASE("cross-component covariance vanishes") {
  const SheetSpec spec = square(8, 2);
  const std::size_t node[] = {8, 8};
  const Estimate e = estimate_covariance(spec, node, node, 0, 1, {10000, 5, 0});
  CHECK(e.theoretical == 0.0);
  CHECK(e.within(4.0));
}

TEST_CASE("min-product covariance between distinct multitimes") {
  const SheetSpec spec = square(4, 1, 2.0);
  const std::size_t s[] = {2, 4}, t[] = {4, 2};  // (1,2) and (2,1)
  // Brute force over the discrete construction: shared cells below both nodes.
  double shared = 0.0;
  for (std::size_t i = 1; i <= 4; ++i)
    for (std::size_t j = 1; j <= 4; ++j)
      if (i <= std::min(s[0], t[0]) && j <= std::min(s[1], t[1])) shared += 0.25;
  CHECK(shared == doctest::Approx(1.0));
  const Estimate e = estimate_covariance(spec, s, t, 0, 0, {10000, 6, 0});
  CHECK(e.theoretical == doctest::Approx(shared));
  CHECK(e.within(4.0));
}

TEST_CASE("increments over disjoint cells are uncorrelated") {
  const SheetSpec spec = square(4);
  Moments m(1);
  for (std::size_t r = 0; r < 10000; ++r) {
    const SheetGrid g = sample_sheet(spec, replicate_seed(77, r));
    const std::size_t c1[] = {1, 1}, c2[] = {3, 2};
    m.push(g.cell_increment(c1)[0] * g.cell_increment(c2)[0]);
  }
  CHECK(std::abs(m.mean()[0]) <= 4 * m.standard_error()[0]);
}

TEST_CASE("estimators do not depend on the thread count") {
  const SheetSpec spec = square(5);
  const std::size_t node[] = {5, 5};
  const Estimate a = estimate_covariance(spec, node, node, 0, 0, {5000, 1, 1});
  const Estimate b = estimate_covariance(spec, node, node, 0, 0, {5000, 1, 4});
  CHECK(a.mean == b.mean);
  CHECK(a.se == b.se);
}

TEST_CASE("restriction to a sub-lattice keeps the path") {
  const SheetGrid fine = sample_sheet(square(8, 2), 12);
  const SheetGrid coarse = fine.restrict_to({uniform_partition(1.0, 2), uniform_partition(1.0, 4)});
  const std::size_t cn[] = {1, 3}, fn[] = {4, 6};
  CHECK(coarse.value(cn) == fine.value(fn));
  CHECK_THROWS_AS(fine.restrict_to({{0.0, 0.3, 1.0}, uniform_partition(1.0, 4)}), std::invalid_argument);
  CHECK(fine.locate(MultiTime{0.5, 0.25}).value() == SheetGrid::NodeIndex{4, 2});
  CHECK_FALSE(fine.locate(MultiTime{0.3, 0.25}).has_value());
}

TEST_CASE("csv dump") {
  const SheetGrid g = sample_sheet({{{0.0, 1.0}, {0.0, 0.5, 1.0}}, 1, {}}, 2);
  std::ostringstream os;
  g.write_csv(os);
  const std::string s = os.str();
  CHECK(s.rfind("# sheetlab-sheet v1\n# m=2 d=1 seed=2\n# axis0=0,1\n# axis1=0,0.5,1\ni0,i1,t0,t1,W0\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 5 + 6);
}
