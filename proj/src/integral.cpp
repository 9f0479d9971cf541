// SPDX-License-Identifier: MIT
#include "sheetlab/integral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sheetlab/rng.hpp"

namespace sheetlab {

namespace {

constexpr std::uint32_t kCurvePurpose = 0x43u;

// Active axis of an increasing axis-parallel step, or throws.
std::size_t step_axis(const MultiTime& from, const MultiTime& to) {
  if (from.dim() != to.dim()) throw std::invalid_argument("curve: breakpoint dimension mismatch");
  std::size_t axis = from.dim();
  for (std::size_t k = 0; k < from.dim(); ++k) {
    if (from[k] == to[k]) continue;
    if (axis != from.dim()) throw std::invalid_argument("curve: segment is not axis-parallel");
    if (!(to[k] > from[k])) throw std::invalid_argument("curve: coordinates must increase");
    axis = k;
  }
  if (axis == from.dim()) throw std::invalid_argument("curve: repeated breakpoint");
  return axis;
}

SheetGrid::NodeIndex locate_or_throw(const SheetGrid& grid, const MultiTime& p) {
  auto idx = grid.locate(p);
  if (!idx) throw AlignmentError("curve breakpoint is not a grid node");
  return *idx;
}

// Walks every grid step of the chain, calling step(node_before, node_after, axis).
template <typename Step>
void walk(const SheetGrid& grid, const std::vector<MultiTime>& chain, Step&& step) {
  if (chain.empty()) return;
  if (chain.front().dim() != grid.m()) throw std::invalid_argument("curve and grid differ in m");
  SheetGrid::NodeIndex cur = locate_or_throw(grid, chain.front());
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const std::size_t axis = step_axis(chain[i - 1], chain[i]);
    const SheetGrid::NodeIndex next = locate_or_throw(grid, chain[i]);
    SheetGrid::NodeIndex node = cur;
    for (std::size_t j = cur[axis]; j < next[axis]; ++j) {
      SheetGrid::NodeIndex after = node;
      after[axis] = j + 1;
      step(node, after, axis);
      node = std::move(after);
    }
    cur = next;
  }
}

MultiTime node_time(const SheetGrid& grid, const SheetGrid::NodeIndex& node) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(node.size()));
  for (std::size_t k = 0; k < node.size(); ++k) s[static_cast<Eigen::Index>(k)] = grid.coordinate(k, node[k]);
  return MultiTime(std::move(s));
}

SheetSpec uniform_spec(const MultiTime& t, std::size_t mesh, std::size_t d) {
  SheetSpec spec;
  for (std::size_t k = 0; k < t.dim(); ++k) spec.partitions.push_back(uniform_partition(t[k], mesh));
  spec.d = d;
  return spec;
}

// Integral of a polynomial energy sum c_n u^{|n|} from 0 to v.
double integrated_energy(const HermiteSeries& s, double v) {
  double total = 0.0;
  for (const auto& [n, a] : s.terms()) {
    const int k = order(n);
    total += a * a / static_cast<double>(factorial(n)) * std::pow(v, k + 1) / (k + 1);
  }
  return total;
}

}  // namespace

IncreasingCurve::IncreasingCurve(std::vector<MultiTime> breakpoints) : breakpoints_(std::move(breakpoints)) {
  if (breakpoints_.size() < 2) throw std::invalid_argument("IncreasingCurve: need at least two breakpoints");
  if (!breakpoints_.front().coords().isZero(0.0)) throw std::invalid_argument("IncreasingCurve: must start at the origin");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) axes_.push_back(step_axis(breakpoints_[i - 1], breakpoints_[i]));
}

std::pair<std::vector<MultiTime>, std::vector<MultiTime>> IncreasingCurve::split(std::size_t k) const {
  if (k == 0 || k + 1 >= breakpoints_.size()) throw std::out_of_range("IncreasingCurve::split: not an interior breakpoint");
  return {{breakpoints_.begin(), breakpoints_.begin() + static_cast<std::ptrdiff_t>(k) + 1},
          {breakpoints_.begin() + static_cast<std::ptrdiff_t>(k), breakpoints_.end()}};
}

IncreasingCurve make_staircase(const MultiTime& t, const std::vector<std::size_t>& axis_order,
                               std::size_t steps_per_axis) {
  const std::size_t m = t.dim();
  std::vector<std::size_t> sorted = axis_order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> identity(m);
  std::iota(identity.begin(), identity.end(), 0);
  if (sorted != identity) throw std::invalid_argument("make_staircase: axis order is not a permutation");
  if (steps_per_axis < 1) throw std::invalid_argument("make_staircase: need at least one step");
  if (!(t.coords().minCoeff() > 0.0)) throw std::invalid_argument("make_staircase: t must be positive");

  std::vector<MultiTime> pts{MultiTime(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)))};
  Eigen::VectorXd cur = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t axis : axis_order) {
    const auto a = static_cast<Eigen::Index>(axis);
    for (std::size_t s = 1; s <= steps_per_axis; ++s) {
      cur[a] = s == steps_per_axis ? t[axis] : t[axis] * static_cast<double>(s) / static_cast<double>(steps_per_axis);
      pts.emplace_back(cur);
    }
  }
  return IncreasingCurve(std::move(pts));
}

IncreasingCurve random_staircase(const MultiTime& t, std::size_t n_corners, std::uint64_t seed, std::size_t lattice) {
  const std::size_t m = t.dim();
  if (n_corners < m) throw std::invalid_argument("random_staircase: need n_corners >= m");
  if (n_corners > m * lattice) throw std::invalid_argument("random_staircase: lattice too coarse for n_corners");
  if (!(t.coords().minCoeff() > 0.0)) throw std::invalid_argument("random_staircase: t must be positive");

  const CounterRng rng(seed);
  std::uint32_t draw = 0;
  const auto uniform_below = [&](std::size_t n) {
    const double u = rng.uniforms(CounterRng::make_counter(draw++, 0, kCurvePurpose))[0];
    return std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
  };

  // Segments per axis: one each, extras spread at random without exceeding the lattice.
  std::vector<std::size_t> count(m, 1);
  for (std::size_t extra = m; extra < n_corners;) {
    const std::size_t a = uniform_below(m);
    if (count[a] < lattice) {
      ++count[a];
      ++extra;
    }
  }

  // Interior lattice stops per axis: partial Fisher-Yates over {1..lattice-1}.
  std::vector<std::vector<std::size_t>> stops(m);
  for (std::size_t a = 0; a < m; ++a) {
    std::vector<std::size_t> pool(lattice - 1);
    std::iota(pool.begin(), pool.end(), 1);
    for (std::size_t i = 0; i + 1 < count[a]; ++i) std::swap(pool[i], pool[i + uniform_below(pool.size() - i)]);
    stops[a].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count[a] - 1));
    std::sort(stops[a].begin(), stops[a].end());
    stops[a].push_back(lattice);
  }

  // Random interleaving of the per-axis segment sequences.
  std::vector<std::size_t> labels;
  for (std::size_t a = 0; a < m; ++a) labels.insert(labels.end(), count[a], a);
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[uniform_below(i)]);

  std::vector<MultiTime> pts{MultiTime(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)))};
  Eigen::VectorXd cur = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  std::vector<std::size_t> used(m, 0);
  for (std::size_t a : labels) {
    const std::size_t stop = stops[a][used[a]++];
    cur[static_cast<Eigen::Index>(a)] =
        stop == lattice ? t[a] : t[a] * static_cast<double>(stop) / static_cast<double>(lattice);
    pts.emplace_back(cur);
  }
  return IncreasingCurve(std::move(pts));
}

double curvilinear_integral(const SheetGrid& grid, const std::vector<MultiTime>& chain, const Integrand& phi) {
  double sum = 0.0;
  walk(grid, chain, [&](const SheetGrid::NodeIndex& before, const SheetGrid::NodeIndex& after, std::size_t) {
    const Eigen::VectorXd w = grid.value(before);
    const Eigen::VectorXd dw = grid.value(after) - w;
    const Eigen::VectorXd f = phi(node_time(grid, before), w);
    if (f.size() != dw.size()) throw std::invalid_argument("curvilinear_integral: integrand has wrong length");
    sum += f.dot(dw);
  });
  return sum;
}

double curvilinear_integral(const SheetGrid& grid, const IncreasingCurve& curve, const Integrand& phi) {
  return curvilinear_integral(grid, curve.breakpoints(), phi);
}

Eigen::MatrixXd curve_covariation(const SheetGrid& grid, const IncreasingCurve& curve) {
  const auto d = static_cast<Eigen::Index>(grid.d());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d, d);
  walk(grid, curve.breakpoints(), [&](const SheetGrid::NodeIndex& before, const SheetGrid::NodeIndex& after, std::size_t) {
    const Eigen::VectorXd dw = grid.value(after) - grid.value(before);
    q.noalias() += dw * dw.transpose();
  });
  return q;
}

Estimate covariation_rule_check(const SheetSpec& spec, const IncreasingCurve& curve, std::size_t a, std::size_t b,
                           const McOptions& mc) {
  if (a >= spec.d || b >= spec.d) throw std::out_of_range("covariation_rule_check: component out of range");
  const Moments mom = reduce_replicates(mc, Moments(1), [&](Moments& acc, std::size_t r) {
    const SheetGrid g = sample_sheet(spec, replicate_seed(mc.seed, r));
    acc.push(curve_covariation(g, curve)(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
  });
  return {mom.mean()[0], mom.standard_error()[0], a == b ? volume(curve.end()) : 0.0};
}

ProcessSpec::ProcessSpec(HermiteSeries phi) : phi_(std::move(phi)) {
  for (std::size_t a = 0; a < phi_.dim(); ++a) derivatives_.push_back(series_derivative(phi_, a));
}

ProcessSpec::ProcessSpec(HermiteSeries phi, std::vector<HermiteSeries> derivatives) : ProcessSpec(std::move(phi)) {
  if (derivatives != derivatives_) throw std::invalid_argument("ProcessSpec: derivatives are not the index shifts of phi");
}

Integrand ProcessSpec::integrand() const {
  return [derivs = derivatives_](const MultiTime& s, const Eigen::VectorXd& w) {
    const double v = volume(s);
    Eigen::VectorXd out(static_cast<Eigen::Index>(derivs.size()));
    for (std::size_t a = 0; a < derivs.size(); ++a) out[static_cast<Eigen::Index>(a)] = series_eval(derivs[a], v, w);
    return out;
  };
}

namespace {
// Mean squares this small are rounding residue of exactly telescoping sums.
constexpr double kRoundoffFloor = 1e-24;

bool shrinks(double coarse, double fine) { return fine < coarse || fine <= kRoundoffFloor; }
}  // namespace

bool PathIndependenceReport::monotone() const {
  for (std::size_t i = 1; i < meshes.size(); ++i) {
    if (!shrinks(meshes[i - 1].pair_ms, meshes[i].pair_ms)) return false;
    if (!shrinks(meshes[i - 1].recon_ms, meshes[i].recon_ms)) return false;
  }
  return true;
}

PathIndependenceReport path_independence_test(const ProcessSpec& process, const MultiTime& t,
                                              const std::vector<IncreasingCurve>& curves,
                                              const std::vector<std::size_t>& meshes, const McOptions& mc) {
  if (curves.size() < 2) throw std::invalid_argument("path_independence_test: need at least two curves");
  if (meshes.empty()) throw std::invalid_argument("path_independence_test: empty mesh ladder");
  for (const auto& c : curves) {
    if (c.m() != t.dim() || !(c.end() == t))
      throw std::invalid_argument("path_independence_test: curves must end at t");
  }
  const std::size_t finest = *std::max_element(meshes.begin(), meshes.end());
  for (std::size_t mesh : meshes)
    if (finest % mesh != 0) throw std::invalid_argument("path_independence_test: meshes must divide the finest mesh");

  const SheetSpec fine_spec = uniform_spec(t, finest, process.d());
  std::vector<std::vector<Partition>> coarse;
  for (std::size_t mesh : meshes) coarse.push_back(uniform_spec(t, mesh, process.d()).partitions);

  const std::size_t nc = curves.size();
  const std::size_t pairs = nc * (nc - 1) / 2;
  const std::size_t per_mesh = pairs + 2 * nc;  // pair diffs, reconstructions, vs-finest
  const std::size_t nm = meshes.size();
  const Integrand phi = process.integrand();

  const Moments mom = reduce_replicates(mc, Moments(static_cast<Eigen::Index>(nm * per_mesh)), [&](Moments& acc, std::size_t r) {
    const SheetGrid fine = sample_sheet(fine_spec, replicate_seed(mc.seed, r));
    std::vector<double> fine_integrals(nc);
    for (std::size_t c = 0; c < nc; ++c) fine_integrals[c] = curvilinear_integral(fine, curves[c], phi);

    const double phi0 = process.value(0.0, fine.value_at(0));
    const auto end = fine.locate(t);
    const double phit = process.value(volume(t), fine.value(*end));

    Eigen::ArrayXd obs(static_cast<Eigen::Index>(nm * per_mesh));
    for (std::size_t k = 0; k < nm; ++k) {
      const bool is_finest = meshes[k] == finest;
      const SheetGrid grid = is_finest ? fine : fine.restrict_to(coarse[k]);
      std::vector<double> integrals(nc);
      for (std::size_t c = 0; c < nc; ++c)
        integrals[c] = is_finest ? fine_integrals[c] : curvilinear_integral(grid, curves[c], phi);
      std::size_t slot = k * per_mesh;
      for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = i + 1; j < nc; ++j) obs[static_cast<Eigen::Index>(slot++)] = std::pow(integrals[i] - integrals[j], 2);
      for (std::size_t c = 0; c < nc; ++c) obs[static_cast<Eigen::Index>(slot++)] = std::pow(phit - phi0 - integrals[c], 2);
      for (std::size_t c = 0; c < nc; ++c) obs[static_cast<Eigen::Index>(slot++)] = std::pow(integrals[c] - fine_integrals[c], 2);
    }
    acc.push(obs);
  });

  PathIndependenceReport report;
  report.replicates = mc.replicates;
  const Eigen::ArrayXd se = mom.standard_error();
  for (std::size_t k = 0; k < nm; ++k) {
    MeshDiagnostics diag;
    diag.mesh = meshes[k];
    std::size_t slot = k * per_mesh;
    for (std::size_t p = 0; p < pairs; ++p, ++slot) {
      if (mom.mean()[static_cast<Eigen::Index>(slot)] >= diag.pair_ms) {
        diag.pair_ms = mom.mean()[static_cast<Eigen::Index>(slot)];
        diag.pair_ms_se = se[static_cast<Eigen::Index>(slot)];
      }
    }
    for (std::size_t c = 0; c < nc; ++c, ++slot) {
      if (mom.mean()[static_cast<Eigen::Index>(slot)] >= diag.recon_ms) {
        diag.recon_ms = mom.mean()[static_cast<Eigen::Index>(slot)];
        diag.recon_ms_se = se[static_cast<Eigen::Index>(slot)];
      }
    }
    for (std::size_t c = 0; c < nc; ++c, ++slot)
      diag.vs_finest_ms = std::max(diag.vs_finest_ms, mom.mean()[static_cast<Eigen::Index>(slot)]);
    report.meshes.push_back(diag);
  }
  return report;
}

Estimate martingale_check(const ProcessSpec& process, const MultiTime& t, const McOptions& mc, std::size_t mesh) {
  const SheetSpec spec = uniform_spec(t, mesh, process.d());
  const Moments mom = reduce_replicates(mc, Moments(1), [&](Moments& acc, std::size_t r) {
    const SheetGrid g = sample_sheet(spec, replicate_seed(mc.seed, r));
    acc.push(process.value(volume(t), g.value_at(g.node_count() - 1)));
  });
  return {mom.mean()[0], mom.standard_error()[0], process.series().coefficient(MultiIndex::zero(process.d()))};
}

Estimate ito_isometry_check(const ProcessSpec& process, const SheetSpec& spec, const IncreasingCurve& curve,
                            const McOptions& mc) {
  if (spec.d != process.d()) throw std::invalid_argument("ito_isometry_check: dimension mismatch");
  const Integrand phi = process.integrand();
  const Moments mom = reduce_replicates(mc, Moments(1), [&](Moments& acc, std::size_t r) {
    const SheetGrid g = sample_sheet(spec, replicate_seed(mc.seed, r));
    acc.push(std::pow(curvilinear_integral(g, curve, phi), 2));
  });
  double theory = 0.0;
  for (const auto& deriv : process.derivatives()) theory += integrated_energy(deriv, volume(curve.end()));
  return {mom.mean()[0], mom.standard_error()[0], theory};
}

Estimate truncation_tail_check(const HermiteSeries& phi, int p, const SheetSpec& spec, const IncreasingCurve& curve,
                               const McOptions& mc) {
  const HermiteSeries tail = phi.tail(p);
  Estimate e = ito_isometry_check(ProcessSpec(tail), spec, curve, mc);
  e.theoretical = tail.energy(volume(curve.end()));
  return e;
}

}  // namespace sheetlab
