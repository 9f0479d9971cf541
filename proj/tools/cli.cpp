// SPDX-License-Identifier: MIT
#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "sheetlab/hermite.hpp"
#include "sheetlab/integral.hpp"
#include "sheetlab/kernel.hpp"
#include "sheetlab/rng.hpp"
#include "sheetlab/serialize.hpp"
#include "sheetlab/sheet.hpp"
#include "sheetlab/test_functions.hpp"
#include "sheetlab/tzitzeica.hpp"

namespace sheetlab::cli {

using nlohmann::json;

nlohmann::json to_json(const ExperimentConfig& c) {
  // Keys are the long flag names, so the object doubles as a --config file.
  return json{{"m", c.m},
              {"d", c.d},
              {"t", c.t},
              {"T", c.T},
              {"s", c.s},
              {"x", c.x},
              {"v", c.v},
              {"max-order", c.max_order},
              {"replicates", c.replicates},
              {"seed", c.seed},
              {"threads", c.threads},
              {"mesh", c.mesh},
              {"a", c.a},
              {"b", c.b},
              {"se-mult", c.se_mult},
              {"tol", c.tol},
              {"step", c.h},
              {"f", c.f},
              {"f-param", c.f_param},
              {"method", c.method},
              {"kernel", c.kernel},
              {"surface", c.surface},
              {"k", c.k},
              {"radius", c.radius},
              {"points", c.points},
              {"series", c.series},
              {"tail-p", c.tail_p},
              {"phi", c.phi},
              {"c", c.c},
              {"lo", c.lo},
              {"hi", c.hi},
              {"grid", c.grid_n},
              {"curves", c.curves},
              {"corners", c.corners},
              {"out", c.out},
              {"format", c.format}};
}

namespace {

// ---------------------------------------------------------------- helpers

std::string fmt(double value) {
  std::ostringstream os;
  os << std::setprecision(17) << value;
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw UsageError("cannot parse '" + s + "' in " + what);
  return value;
}

MultiTime multitime(const std::vector<double>& given, std::vector<double> fallback, const char* flag) {
  const std::vector<double>& src = given.empty() ? fallback : given;
  if (src.empty()) throw UsageError(std::string("missing --") + flag);
  return MultiTime(Eigen::Map<const Eigen::VectorXd>(src.data(), static_cast<Eigen::Index>(src.size())));
}

std::vector<double> ones(std::size_t m) { return std::vector<double>(m, 1.0); }

Eigen::VectorXd point(const std::vector<double>& x, std::size_t d) {
  if (x.empty()) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  if (x.size() == 1) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), x[0]);
  if (x.size() != d) throw UsageError("--x must have 1 or d components");
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

McOptions monte_carlo(const ExperimentConfig& cfg) {
  if (cfg.replicates < 2) throw UsageError("--replicates must be at least 2");
  return {cfg.replicates, cfg.seed, cfg.threads};
}

double bound(const ExperimentConfig& cfg, double fallback) { return cfg.tol >= 0.0 ? cfg.tol : fallback; }

// "n1:n2=a,..." with multi-index components separated by ':'.
HermiteSeries parse_series(const std::string& text) {
  if (text.empty()) throw UsageError("empty --series");
  std::vector<std::pair<MultiIndex, double>> terms;
  for (const auto& term : split(text, ',')) {
    const auto eq = term.find('=');
    if (eq == std::string::npos) throw UsageError("--series term '" + term + "' lacks '='");
    std::vector<int> comps;
    for (const auto& c : split(term.substr(0, eq), ':')) comps.push_back(static_cast<int>(to_double(c, "--series")));
    terms.emplace_back(MultiIndex(comps), to_double(term.substr(eq + 1), "--series"));
  }
  HermiteSeries s(terms.front().first.dim());
  for (const auto& [n, a] : terms) {
    if (n.dim() != s.dim()) throw UsageError("--series mixes multi-index dimensions");
    s.add(n, a);
  }
  return s;
}

std::string index_name(const MultiIndex& n) { return n.to_string(); }

// -------------------------------------------------------------- outcomes

struct Outcome {
  json results = json::array();
  json summary = json::object();
  std::string csv;
  bool pass = true;

  void add(const std::string& name, const Estimate& e, bool ok, json extra = json::object()) {
    json row{{"name", name}, {"estimate", e.mean}, {"se", e.se}, {"theoretical", e.theoretical}, {"pass", ok}};
    for (auto& [key, value] : extra.items()) row[key] = value;
    results.push_back(std::move(row));
    pass = pass && ok;
  }

  void add_stat(const std::string& name, const Estimate& e, double se_mult, json extra = json::object()) {
    add(name, e, e.within(se_mult), std::move(extra));
  }
};

std::string results_csv(const json& results) {
  std::ostringstream os;
  os << "name,estimate,se,theoretical,pass\n";
  for (const auto& r : results)
    os << '"' << r.at("name").get<std::string>() << "\"," << fmt(r.at("estimate").get<double>()) << ','
       << fmt(r.at("se").get<double>()) << ',' << fmt(r.at("theoretical").get<double>()) << ','
       << (r.at("pass").get<bool>() ? "true" : "false") << '\n';
  return os.str();
}

// -------------------------------------------------------------- commands

Outcome cmd_sample_sheet(const ExperimentConfig& cfg) {
  const MultiTime t = multitime(cfg.t, ones(cfg.m), "t");
  const std::size_t cells = cfg.mesh.empty() ? 8 : cfg.mesh.front();
  SheetSpec spec;
  for (std::size_t a = 0; a < t.dim(); ++a) spec.partitions.push_back(uniform_partition(t[a], cells));
  spec.d = cfg.d;
  spec.x = point(cfg.x, cfg.d);
  const SheetGrid grid = sample_sheet(spec, cfg.seed);
  std::vector<std::size_t> last(t.dim(), cells);
  Outcome o;
  o.summary = {{"m", grid.m()}, {"d", grid.d()}, {"cells_per_axis", cells}, {"nodes", grid.node_count()},
               {"terminal", as_vector(grid.value(last))}};
  std::ostringstream os;
  grid.write_csv(os);
  o.csv = os.str();
  return o;
}

Outcome cmd_covariance(const ExperimentConfig& cfg) {
  const MultiTime t = multitime(cfg.t, ones(cfg.m), "t");
  const MultiTime s = multitime(cfg.s, as_vector(t.coords()), "s");
  if (s.dim() != t.dim()) throw UsageError("--s and --t differ in dimension");
  if (cfg.a < 1 || cfg.a > cfg.d || cfg.b < 1 || cfg.b > cfg.d) throw UsageError("--a/--b must lie in 1..d");
  SheetSpec spec;
  spec.d = cfg.d;
  for (std::size_t a = 0; a < t.dim(); ++a) {
    Partition p{0.0, s[a], t[a]};
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() == 1) p.push_back(1.0);
    spec.partitions.push_back(p);
  }
  const SheetGrid probe = sample_sheet(SheetSpec{spec.partitions, 1, {}}, 0);
  const auto ls = probe.locate(s), lt = probe.locate(t);
  const Estimate e = estimate_covariance(spec, *ls, *lt, cfg.a - 1, cfg.b - 1, monte_carlo(cfg));
  Outcome o;
  o.add_stat("cov(W" + std::to_string(cfg.a) + "_s, W" + std::to_string(cfg.b) + "_t)", e, cfg.se_mult);
  return o;
}

// Breakpoints that matter for an Ito sum: segments on the boundary of the
// orthant carry no increments, and collinear neighbours merge.
std::vector<MultiTime> effective_path(const IncreasingCurve& c) {
  std::vector<MultiTime> path;
  for (std::size_t i = 0; i < c.segments(); ++i) {
    const MultiTime& from = c.breakpoints()[i];
    bool on_boundary = false;
    for (std::size_t a = 0; a < c.m(); ++a) on_boundary = on_boundary || (a != c.axis(i) && from[a] == 0.0);
    if (on_boundary) continue;
    if (path.empty()) path.push_back(from);
    if (path.size() >= 2 && c.axis(i) == c.axis(i - 1)) path.pop_back();
    path.push_back(c.breakpoints()[i + 1]);
  }
  return path;
}

std::vector<IncreasingCurve> staircases(const ExperimentConfig& cfg, const MultiTime& t, std::size_t count,
                                        std::size_t lattice) {
  std::vector<IncreasingCurve> curves;
  std::vector<std::vector<MultiTime>> seen;
  const std::size_t corners = cfg.corners == 0 ? 2 * t.dim() : cfg.corners;
  for (std::size_t i = 0, salt = 0; curves.size() < count; ++salt) {
    if (salt > 1000 * count) throw UsageError("cannot draw distinct random staircases; raise --corners or --mesh");
    IncreasingCurve c = random_staircase(t, corners, mix_seed(cfg.seed, 0x5ca1e000 + salt), lattice);
    const std::vector<MultiTime> key = effective_path(c);
    if (std::find(seen.begin(), seen.end(), key) != seen.end() && t.dim() > 1) continue;
    seen.push_back(key);
    curves.push_back(std::move(c));
    ++i;
  }
  return curves;
}

Outcome cmd_ito_rules(const ExperimentConfig& cfg) {
  const MultiTime t = multitime(cfg.t, ones(cfg.m), "t");
  const std::size_t cells = cfg.mesh.empty() ? 8 : cfg.mesh.front();
  SheetSpec spec;
  for (std::size_t a = 0; a < t.dim(); ++a) spec.partitions.push_back(uniform_partition(t[a], cells));
  spec.d = cfg.d;
  std::vector<std::size_t> order(t.dim());
  std::iota(order.begin(), order.end(), 0);
  std::vector<IncreasingCurve> curves{make_staircase(t, order)};
  if (cfg.curves > 1)
    for (auto& c : staircases(cfg, t, cfg.curves - 1, cells)) curves.push_back(std::move(c));
  const McOptions mc = monte_carlo(cfg);
  Outcome o;
  o.summary["curves"] = json::array();
  for (std::size_t i = 0; i < curves.size(); ++i) {
    o.summary["curves"].push_back(sheetlab::to_json(curves[i]));
    for (std::size_t a = 0; a < cfg.d; ++a)
      for (std::size_t b = 0; b < cfg.d; ++b)
        o.add_stat("curve" + std::to_string(i) + " dW" + std::to_string(a + 1) + " dW" + std::to_string(b + 1),
                   covariation_rule_check(spec, curves[i], a, b, mc), cfg.se_mult);
  }
  return o;
}

Outcome cmd_kernel_residual(const ExperimentConfig& cfg) {
  const MultiTime t = multitime(cfg.t, ones(cfg.m), "t");
  const Eigen::VectorXd x = point(cfg.x.empty() ? std::vector<double>{0.3} : cfg.x, cfg.d);
  const Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.d));
  SpaceTimeFunction u;
  bool forward = cfg.kernel == "forward";
  std::vector<double> maturity;
  if (forward) {
    u.u = [y](const MultiTime& s, const Eigen::VectorXd& z) { return forward_density(s, z, y); };
  } else {
    const MultiTime T = multitime(cfg.T, as_vector(2.0 * t.coords()), "T");
    maturity = as_vector(T.coords());
    u.u = [T, y](const MultiTime& s, const Eigen::VectorXd& z) { return backward_density(T, s, z, y); };
  }
  const auto residual = [&](double h) {
    return (forward ? forward_pde_residual(u, t, x, h) : backward_pde_residual(u, t, x, h)).cwiseAbs().maxCoeff();
  };
  const double r1 = residual(cfg.h), r2 = residual(0.5 * cfg.h);
  const double ratio = r1 / r2;
  Outcome o;
  o.add("residual(h)", {r1, 0.0, 0.0}, r1 <= bound(cfg, 1e-5), {{"h", cfg.h}});
  o.add("residual(h/2)", {r2, 0.0, 0.0}, true, {{"h", 0.5 * cfg.h}});
  o.add("h-halving ratio", {ratio, 0.0, 4.0}, ratio >= 3.5 && ratio <= 4.5);
  o.summary = {{"kernel", cfg.kernel}, {"x", as_vector(x)}, {"T", maturity}};
  return o;
}

MeanMethod mean_method(const ExperimentConfig& cfg) {
  if (cfg.method == "mc") return MonteCarloMethod{monte_carlo(cfg)};
  return QuadratureMethod{};
}

Outcome cmd_mean_value(const ExperimentConfig& cfg) {
  const TestFunction tf = make_test_function(cfg.f, cfg.f_param);
  const MultiTime t = multitime(cfg.t, ones(cfg.m), "t");
  const Eigen::VectorXd x = point(cfg.x, cfg.d);
  const MeanMethod method = mean_method(cfg);
  MeanValue mv;
  double variance = volume(t);
  if (!cfg.T.empty()) {
    const MultiTime T = multitime(cfg.T, {}, "T");
    mv = backward_mean_value(tf.f, T, t, x, method);
    variance = volume(T) - volume(t);
  } else {
    mv = forward_mean_value(tf.f, t, x, method);
  }
  const double theory = tf.mean(variance, x);
  Outcome o;
  if (cfg.method == "mc") {
    o.add_stat("u", {mv.value, mv.error, theory}, cfg.se_mult);
  } else {
    o.add("u", {mv.value, 0.0, theory}, std::abs(mv.value - theory) <= bound(cfg, 1e-6),
          {{"quadrature_error", mv.error}});
  }
  o.summary = {{"f", tf.name}, {"variance", variance}, {"direction", cfg.T.empty() ? "forward" : "backward"}};
  return o;
}

Outcome cmd_volumetric_invariance(const ExperimentConfig& cfg) {
  const TestFunction tf = make_test_function(cfg.f, cfg.f_param);
  const MultiTime t = multitime(cfg.t, {2.0, 3.0}, "t");
  std::vector<double> other(t.dim(), 1.0);
  other[0] = volume(t);
  const MultiTime s = multitime(cfg.s, other, "s");
  const Eigen::VectorXd x = point(cfg.x, cfg.d);
  const MeanMethod method = mean_method(cfg);
  const double gap = volumetric_invariance_check(tf.f, {{t, s}}, x, method);
  Outcome o;
  o.add("|u(t) - u(s)|", {gap, 0.0, 0.0}, gap <= bound(cfg, 1e-12));
  o.summary = {{"t", as_vector(t.coords())}, {"s", as_vector(s.coords())}, {"volume", volume(t)},
               {"u_t", forward_mean_value(tf.f, t, x, method).value}};
  return o;
}

Outcome cmd_hermite_ortho(const ExperimentConfig& cfg) {
  const GramEstimate g = orthogonality_matrix(cfg.d, cfg.v, cfg.max_order, monte_carlo(cfg));
  Outcome o;
  for (Eigen::Index i = 0; i < g.mean.rows(); ++i)
    for (Eigen::Index j = i; j < g.mean.cols(); ++j) {
      const Estimate e{g.mean(i, j), g.se(i, j), g.theoretical(i, j)};
      const std::string name = "<" + index_name(g.basis[static_cast<std::size_t>(i)]) + "," +
                               index_name(g.basis[static_cast<std::size_t>(j)]) + ">";
      if (i == 0 && j == 0)
        o.add(name, e, e.mean == 1.0, {{"deterministic", true}});
      else
        o.add_stat(name, e, cfg.se_mult);
    }
  o.summary = {{"basis_size", g.basis.size()}, {"max_z_score", g.max_z_score()}};
  return o;
}

Outcome cmd_hermite_pde(const ExperimentConfig& cfg) {
  const CounterRng rng(cfg.seed);
  std::vector<std::pair<double, Eigen::VectorXd>> samples;
  for (std::size_t i = 0; i < cfg.points; ++i) {
    const double v = 0.1 + 2.9 * rng.uniforms(CounterRng::make_counter(i, 0, 0x50))[0];
    Eigen::VectorXd x(static_cast<Eigen::Index>(cfg.d));
    for (std::size_t a = 0; a < cfg.d; ++a) x[static_cast<Eigen::Index>(a)] = rng.normal(i, static_cast<std::uint32_t>(a + 1), 0x50);
    samples.emplace_back(v, x);
  }
  Outcome o;
  double worst = 0.0;
  for (const auto& n : enumerate_up_to(cfg.d, cfg.max_order)) {
    double r = 0.0;
    for (const auto& [v, x] : samples) r = std::max(r, std::abs(backward_heat_residual(n, v, x)));
    worst = std::max(worst, r);
    o.add("H" + index_name(n), {r, 0.0, 0.0}, r <= bound(cfg, 1e-12));
  }
  o.summary = {{"points", cfg.points}, {"max_residual", worst}};
  return o;
}

Outcome cmd_expand(const ExperimentConfig& cfg) {
  const HermiteSeries truth = parse_series(cfg.series.empty() ? "1=3,3=5" : cfg.series);
  const McOptions mc = monte_carlo(cfg);
  const VolumetricFunction phi = [&truth](double v, const Eigen::VectorXd& x) { return series_eval(truth, v, x); };
  const CoefficientEstimate ce = estimate_coefficients(phi, truth.dim(), cfg.v, cfg.max_order, mc);
  Outcome o;
  for (const auto& n : enumerate_up_to(truth.dim(), cfg.max_order)) {
    const auto it = ce.se.find(n);
    o.add_stat("a" + index_name(n), {ce.series.coefficient(n), it == ce.se.end() ? 0.0 : it->second, truth.coefficient(n)},
               cfg.se_mult);
  }
  if (cfg.tail_p >= 0) {
    const std::size_t m = cfg.t.empty() ? 2 : cfg.t.size();
    std::vector<double> fallback(m, 1.0);
    fallback[0] = cfg.v;
    const MultiTime t = multitime(cfg.t, fallback, "t");
    SheetSpec spec;
    spec.d = truth.dim();
    for (std::size_t a = 0; a + 1 < t.dim(); ++a) spec.partitions.push_back({0.0, t[a]});
    spec.partitions.push_back(uniform_partition(t[t.dim() - 1], cfg.mesh.empty() ? 128 : cfg.mesh.front()));
    std::vector<std::size_t> order(t.dim());
    std::iota(order.begin(), order.end(), 0);
    const IncreasingCurve curve = make_staircase(t, order);
    for (int p = 0; p <= cfg.tail_p; ++p)
      o.add_stat("tail variance p=" + std::to_string(p), truncation_tail_check(truth, p, spec, curve, mc), cfg.se_mult);
  }
  o.summary = {{"series", sheetlab::to_json(truth)}, {"estimated", sheetlab::to_json(ce.series)}};
  return o;
}

void add_mesh_rows(Outcome& o, const PathIndependenceReport& rep, bool pairs) {
  std::ostringstream os;
  os << "mesh,pair_ms,pair_ms_se,recon_ms,recon_ms_se,vs_finest_ms,pair_rms,recon_rms\n";
  json meshes = json::array();
  for (const auto& m : rep.meshes) {
    const std::string tag = "mesh " + std::to_string(m.mesh);
    if (pairs)
      o.add(tag + " pair mean-square", {m.pair_ms, m.pair_ms_se, 0.0}, true, {{"rms", std::sqrt(m.pair_ms)}});
    o.add(tag + " reconstruction mean-square", {m.recon_ms, m.recon_ms_se, 0.0}, true,
          {{"rms", std::sqrt(m.recon_ms)}});
    os << m.mesh << ',' << fmt(m.pair_ms) << ',' << fmt(m.pair_ms_se) << ',' << fmt(m.recon_ms) << ','
       << fmt(m.recon_ms_se) << ',' << fmt(m.vs_finest_ms) << ',' << fmt(std::sqrt(m.pair_ms)) << ','
       << fmt(std::sqrt(m.recon_ms)) << '\n';
    meshes.push_back({{"mesh", m.mesh}, {"pair_ms", m.pair_ms}, {"recon_ms", m.recon_ms},
                      {"vs_finest_ms", m.vs_finest_ms}});
  }
  o.summary["meshes"] = meshes;
  o.csv = os.str();
}

std::vector<std::size_t> mesh_ladder(const ExperimentConfig& cfg, std::vector<std::size_t> fallback) {
  std::vector<std::size_t> meshes = cfg.mesh.empty() ? fallback : cfg.mesh;
  if (!std::is_sorted(meshes.begin(), meshes.end())) throw UsageError("--mesh must be increasing");
  return meshes;
}

Outcome cmd_path_independence(const ExperimentConfig& cfg) {
  const ProcessSpec process(parse_series(cfg.series.empty() ? "2=1" : cfg.series));
  const MultiTime t = multitime(cfg.t, ones(cfg.m), "t");
  const std::vector<std::size_t> meshes = mesh_ladder(cfg, {16, 32, 64});
  if (cfg.curves < 2) throw UsageError("--curves must be at least 2");
  const std::vector<IncreasingCurve> curves = staircases(cfg, t, cfg.curves, meshes.front());
  const PathIndependenceReport rep = path_independence_test(process, t, curves, meshes, monte_carlo(cfg));
  Outcome o;
  add_mesh_rows(o, rep, true);
  const double limit = bound(cfg, 0.05);
  const auto& last = rep.meshes.back();
  o.add("monotone refinement", {rep.monotone() ? 1.0 : 0.0, 0.0, 1.0}, rep.monotone());
  o.add("final pair mean-square <= tol", {last.pair_ms, last.pair_ms_se, 0.0}, last.pair_ms <= limit);
  o.add("final reconstruction mean-square <= tol", {last.recon_ms, last.recon_ms_se, 0.0}, last.recon_ms <= limit);
  o.summary["curves"] = json::array();
  for (const auto& c : curves) o.summary["curves"].push_back(sheetlab::to_json(c));
  o.summary["metric"] = "mean-square";
  return o;
}

Outcome cmd_derivative_check(const ExperimentConfig& cfg) {
  const HermiteSeries phi = parse_series(cfg.series.empty() ? "3=1" : cfg.series);
  const ProcessSpec process(phi);
  const MultiTime t = multitime(cfg.t, ones(cfg.m), "t");
  const std::vector<std::size_t> meshes = mesh_ladder(cfg, {8, 16, 32});
  std::vector<std::size_t> order(t.dim());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> reversed(order.rbegin(), order.rend());
  const std::vector<IncreasingCurve> curves{make_staircase(t, order), make_staircase(t, reversed)};
  const PathIndependenceReport rep = path_independence_test(process, t, curves, meshes, monte_carlo(cfg));
  Outcome o;
  add_mesh_rows(o, rep, false);
  bool decreasing = true;
  for (std::size_t i = 1; i < rep.meshes.size(); ++i)
    decreasing = decreasing && (rep.meshes[i].recon_ms < rep.meshes[i - 1].recon_ms || rep.meshes[i].recon_ms <= 1e-24);
  const auto& last = rep.meshes.back();
  o.add("reconstruction decreases", {decreasing ? 1.0 : 0.0, 0.0, 1.0}, decreasing);
  o.add("final reconstruction mean-square <= tol", {last.recon_ms, last.recon_ms_se, 0.0},
        last.recon_ms <= bound(cfg, 0.05));
  o.summary["derivatives"] = json::array();
  for (const auto& dphi : process.derivatives()) o.summary["derivatives"].push_back(sheetlab::to_json(dphi));
  return o;
}

Outcome cmd_martingale(const ExperimentConfig& cfg) {
  const MultiTime t = multitime(cfg.t, {1.0, 2.0}, "t");
  const std::size_t cells = cfg.mesh.empty() ? 8 : cfg.mesh.front();
  const McOptions mc = monte_carlo(cfg);
  Outcome o;
  if (!cfg.series.empty()) {
    o.add_stat("E[Phi_t]", martingale_check(ProcessSpec(parse_series(cfg.series)), t, mc, cells), cfg.se_mult);
  } else {
    for (const auto& n : enumerate_up_to(cfg.d, cfg.max_order)) {
      if (order(n) == 0) continue;
      HermiteSeries single(cfg.d);
      single.set(n, 1.0);
      o.add_stat("E[H" + index_name(n) + "]", martingale_check(ProcessSpec(single), t, mc, cells), cfg.se_mult);
    }
  }
  o.summary = {{"t", as_vector(t.coords())}, {"volume", volume(t)}, {"cells_per_axis", cells}};
  return o;
}

double monge(double zx, double zy, double zxx, double zyy, double zxy) {
  const double w = 1.0 + zx * zx + zy * zy;
  return (zxx * zyy - zxy * zxy) / (w * w);
}

Outcome cmd_tzitzeica(const ExperimentConfig& cfg) {
  ImplicitSurface3D surface;
  std::vector<Point3> pts;
  Point3 spot;
  double spot_k = 0.0, spot_d = 0.0, ratio_theory = 0.0;
  if (cfg.surface == "volume") {
    if (!(cfg.k > 0.0)) throw UsageError("--k must be positive");
    surface = volume_surface(cfg.k);
    pts = sample_volume_level_set(cfg.k, cfg.points, cfg.seed);
    const double r = std::cbrt(cfg.k), z = cfg.k / (r * r);
    spot = Point3(r, r, z);
    // Graph z = k / (x y) at x = y = r.
    spot_k = monge(-cfg.k / (r * r * r), -cfg.k / (r * r * r), 2 * cfg.k / (r * r * r * r), 2 * cfg.k / (r * r * r * r),
                   cfg.k / (r * r * r * r));
    spot_d = std::sqrt(3.0) * r;
    ratio_theory = 1.0 / (27.0 * cfg.k * cfg.k);
  } else {
    if (!(cfg.radius > 0.0)) throw UsageError("--radius must be positive");
    const double R = cfg.radius;
    surface = sphere_surface(R);
    const CounterRng rng(cfg.seed);
    for (std::size_t i = 0; i < cfg.points; ++i) {
      Point3 g(rng.normal(i, 0, 0x53), rng.normal(i, 1, 0x53), rng.normal(i, 2, 0x53));
      pts.push_back(R * g.normalized());
    }
    spot = R * Point3(0.3, 0.4, std::sqrt(0.75));
    const double x = spot[0], y = spot[1], z = spot[2], z3 = z * z * z;
    spot_k = monge(-x / z, -y / z, -(R * R - y * y) / z3, -(R * R - x * x) / z3, -x * y / z3);
    spot_d = R;
    ratio_theory = 1.0 / (R * R * R * R * R * R);
  }
  const TzitzeicaReport rep = tzitzeica_report(surface, pts);
  const double k_spot = gauss_curvature(surface, spot), d_spot = tangent_plane_distance(surface, spot);
  const double limit = bound(cfg, 1e-8);
  Outcome o;
  o.add("spot curvature", {k_spot, 0.0, spot_k}, std::abs(k_spot - spot_k) <= limit * std::abs(spot_k),
        {{"point", as_vector(spot)}});
  o.add("spot distance", {d_spot, 0.0, spot_d}, std::abs(d_spot - spot_d) <= limit * spot_d);
  o.add("ratio mean", {rep.ratio_mean, 0.0, ratio_theory}, std::abs(rep.ratio_mean - ratio_theory) <= limit * ratio_theory);
  o.add("ratio relative spread", {rep.relative_spread, 0.0, 0.0}, rep.relative_spread <= limit);
  o.add("failed points", {static_cast<double>(rep.failures), 0.0, 0.0}, rep.failures == 0);
  o.summary = {{"surface", cfg.surface},   {"points", rep.points.size()}, {"ratio_min", rep.ratio_min},
               {"ratio_max", rep.ratio_max}, {"exponent", kTzitzeicaExponent}};
  std::ostringstream os;
  os << "x,y,z,K,d,ratio,class,error\n";
  for (const auto& p : rep.points)
    os << fmt(p.p[0]) << ',' << fmt(p.p[1]) << ',' << fmt(p.p[2]) << ',' << fmt(p.curvature) << ',' << fmt(p.distance)
       << ',' << fmt(p.ratio) << ',' << (p.error.empty() ? to_string(classify_point(p.curvature)) : "") << ",\""
       << p.error << "\"\n";
  o.csv = os.str();
  return o;
}

struct LevelProblem {
  std::function<double(double)> phi;
  std::optional<std::vector<LevelRoot>> expected;  ///< known root set, when constructible
};

LevelProblem parse_level_problem(const ExperimentConfig& cfg) {
  const auto colon = cfg.phi.find(':');
  if (colon == std::string::npos) throw UsageError("--phi must look like kind:arguments");
  const std::string kind = cfg.phi.substr(0, colon), args = cfg.phi.substr(colon + 1);
  LevelProblem lp;
  if (kind == "poly") {
    std::vector<double> roots;
    for (const auto& r : split(args, ',')) roots.push_back(to_double(r, "--phi"));
    if (roots.empty()) throw UsageError("--phi poly needs roots");
    lp.phi = [roots](double v) {
      double p = 1.0;
      for (double r : roots) p *= v - r;
      return p;
    };
    if (cfg.c == 0.0) {
      std::map<double, int> mult;
      for (double r : roots)
        if (r >= cfg.lo && r <= cfg.hi) ++mult[r];
      std::vector<LevelRoot> want;
      for (const auto& [r, k] : mult) want.push_back({r, 0.0, k > 1});
      lp.expected = want;
    }
  } else if (kind == "hermite") {
    const auto at = args.find('@');
    if (at == std::string::npos) throw UsageError("--phi hermite needs n@x");
    const int n = static_cast<int>(to_double(args.substr(0, at), "--phi"));
    const double x0 = to_double(args.substr(at + 1), "--phi");
    lp.phi = [n, x0](double v) { return hermite(MultiIndex{n}, v, Eigen::VectorXd::Constant(1, x0)); };
    if (n == 2) {
      const double root = x0 * x0 - 2.0 * cfg.c;
      std::vector<LevelRoot> want;
      if (root >= cfg.lo && root <= cfg.hi) want.push_back({root, 0.0, false});
      lp.expected = want;
    }
  } else if (kind == "moment") {
    std::vector<int> comps;
    for (const auto& c : split(args, ':')) comps.push_back(static_cast<int>(to_double(c, "--phi")));
    const MultiIndex n(comps);
    const double nf = static_cast<double>(factorial(n));
    const int k = order(n);
    lp.phi = [nf, k](double v) { return std::pow(v, k) / nf; };
    if (k > 0 && cfg.c > 0.0) {
      const double root = std::pow(cfg.c * nf, 1.0 / k);
      std::vector<LevelRoot> want;
      if (root >= cfg.lo && root <= cfg.hi) want.push_back({root, 0.0, false});
      lp.expected = want;
    }
  } else {
    throw UsageError("unknown --phi kind '" + kind + "'");
  }
  return lp;
}

Outcome cmd_level_set(const ExperimentConfig& cfg) {
  const LevelProblem lp = parse_level_problem(cfg);
  const std::vector<LevelRoot> roots = level_set_decomposition(lp.phi, cfg.c, cfg.lo, cfg.hi, cfg.grid_n);
  const double limit = bound(cfg, 1e-12);
  Outcome o;
  json found = json::array();
  for (const auto& r : roots) found.push_back({{"v", r.v}, {"derivative", r.derivative}, {"critical", r.critical}});
  if (lp.expected) {
    const auto& want = *lp.expected;
    o.add("root count", {static_cast<double>(roots.size()), 0.0, static_cast<double>(want.size())},
          roots.size() == want.size());
    for (std::size_t i = 0; i < std::min(roots.size(), want.size()); ++i) {
      o.add("root " + std::to_string(i), {roots[i].v, 0.0, want[i].v}, std::abs(roots[i].v - want[i].v) <= limit,
            {{"critical", roots[i].critical}, {"expected_critical", want[i].critical}});
      o.add("root " + std::to_string(i) + " critical flag", {roots[i].critical ? 1.0 : 0.0, 0.0, want[i].critical ? 1.0 : 0.0},
            roots[i].critical == want[i].critical);
    }
  } else {
    for (std::size_t i = 0; i < roots.size(); ++i)
      o.add("root " + std::to_string(i), {roots[i].v, 0.0, roots[i].v}, true, {{"critical", roots[i].critical}});
  }
  o.summary = {{"phi", cfg.phi}, {"level", cfg.c}, {"roots", found}, {"validated", lp.expected.has_value()}};
  return o;
}

using Command = Outcome (*)(const ExperimentConfig&);

const std::vector<std::pair<std::string, Command>>& command_table() {
  static const std::vector<std::pair<std::string, Command>> table{
      {"sample-sheet", cmd_sample_sheet},
      {"covariance", cmd_covariance},
      {"ito-rules", cmd_ito_rules},
      {"kernel-residual", cmd_kernel_residual},
      {"mean-value", cmd_mean_value},
      {"volumetric-invariance", cmd_volumetric_invariance},
      {"hermite-ortho", cmd_hermite_ortho},
      {"hermite-pde", cmd_hermite_pde},
      {"expand", cmd_expand},
      {"path-independence", cmd_path_independence},
      {"derivative-check", cmd_derivative_check},
      {"martingale", cmd_martingale},
      {"tzitzeica", cmd_tzitzeica},
      {"level-set", cmd_level_set},
  };
  return table;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Config files: a JSON object, or flat key=value lines (TOML subset).
class FlatConfig : public CLI::ConfigBase {
public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    const std::string text{std::istreambuf_iterator<char>(input), std::istreambuf_iterator<char>()};
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream is(text);
      return CLI::ConfigBase::from_config(is);
    }
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError(std::string("malformed JSON config: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_array() && value.empty()) continue;
      CLI::ConfigItem item;
      item.name = key;
      const auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
      if (value.is_array())
        for (const auto& e : value) item.inputs.push_back(scalar(e));
      else
        item.inputs.push_back(scalar(value));
      items.push_back(std::move(item));
    }
    return items;
  }
};

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& entry : command_table()) n.push_back(entry.first);
    return n;
  }();
  return names;
}

Report run(const ExperimentConfig& cfg) {
  const auto& table = command_table();
  const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == cfg.command; });
  if (it == table.end()) throw UsageError("unknown subcommand '" + cfg.command + "'");
  if (cfg.format != "json" && cfg.format != "csv") throw UsageError("--format must be json or csv");
  if (cfg.d < 1) throw UsageError("--d must be at least 1");
  Outcome o = it->second(cfg);
  if (o.csv.empty()) o.csv = results_csv(o.results);
  Report rep;
  rep.pass = o.pass;
  rep.csv = std::move(o.csv);
  rep.json = json{{"schema", kReportSchema}, {"command", cfg.command}, {"config", to_json(cfg)},
                  {"seed", cfg.seed},        {"replicates", cfg.replicates}, {"results", std::move(o.results)},
                  {"summary", std::move(o.summary)}, {"pass", o.pass}, {"timestamp", utc_timestamp()}};
  return rep;
}

std::string canonical_dump(const nlohmann::json& report) {
  json copy = report;
  copy.erase("timestamp");
  return copy.dump(2);
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      err << "error: " << kSeedEnv << " is not an unsigned integer\n";
      return kUsageError;
    }
  }

  CLI::App app{"Brownian-sheet stochastic calculus verification harness", "sheetlab-cli"};
  app.config_formatter(std::make_shared<FlatConfig>());
  app.set_config("--config", "", "JSON object or key=value file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  app.add_option("--m", cfg.m, "number of time parameters when --t is omitted")->capture_default_str();
  app.add_option("--d", cfg.d, "number of sheet components")->capture_default_str();
  app.add_option("--t", cfg.t, "multitime, comma separated")->delimiter(',');
  app.add_option("--T", cfg.T, "terminal multitime for backward problems")->delimiter(',');
  app.add_option("--s", cfg.s, "second multitime (covariance, invariance)")->delimiter(',');
  app.add_option("--x", cfg.x, "starting / evaluation point")->delimiter(',');
  app.add_option("--v", cfg.v, "volume for Hermite work")->capture_default_str();
  app.add_option("--max-order", cfg.max_order, "largest |n|")->capture_default_str();
  app.add_option("--replicates", cfg.replicates, "Monte-Carlo replicates")->capture_default_str();
  app.add_option("--seed", cfg.seed, std::string("master seed (default from ") + kSeedEnv + ")")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads, 0 = hardware")->capture_default_str();
  app.add_option("--mesh", cfg.mesh, "cells per axis; a ladder for refinement studies")->delimiter(',');
  app.add_option("--a", cfg.a, "first component, 1-based")->capture_default_str();
  app.add_option("--b", cfg.b, "second component, 1-based")->capture_default_str();
  app.add_option("--se-mult", cfg.se_mult, "standard-error multiple for statistical checks")->capture_default_str();
  app.add_option("--tol", cfg.tol, "absolute bound for deterministic checks (command default if omitted)");
  app.add_option("--step", cfg.h, "finite-difference step")->capture_default_str();
  app.add_option("--f", cfg.f, "test function")->check(CLI::IsMember(test_function_names()))->capture_default_str();
  app.add_option("--f-param", cfg.f_param, "test function parameter (0 = its default)");
  app.add_option("--method", cfg.method, "mean-value method")->check(CLI::IsMember({"quadrature", "mc"}))->capture_default_str();
  app.add_option("--kernel", cfg.kernel, "kernel direction")->check(CLI::IsMember({"forward", "backward"}))->capture_default_str();
  app.add_option("--surface", cfg.surface, "implicit surface")->check(CLI::IsMember({"volume", "sphere"}))->capture_default_str();
  app.add_option("--k", cfg.k, "volume level t1 t2 t3 = k")->capture_default_str();
  app.add_option("--radius", cfg.radius, "sphere radius")->capture_default_str();
  app.add_option("--points", cfg.points, "sample points")->capture_default_str();
  app.add_option("--series", cfg.series, "Hermite series, e.g. 1=3,3=5 or 2:1=1.5,0:0=1");
  app.add_option("--tail-p", cfg.tail_p, "expand: also check tail variances for p = 0..tail-p");
  app.add_option("--phi", cfg.phi, "level-set function: poly:r1,r2,.. | hermite:n@x | moment:n1:n2..")->capture_default_str();
  app.add_option("--c", cfg.c, "level-set value")->capture_default_str();
  app.add_option("--lo", cfg.lo, "level-set interval start")->capture_default_str();
  app.add_option("--hi", cfg.hi, "level-set interval end")->capture_default_str();
  app.add_option("--grid", cfg.grid_n, "level-set scan points")->capture_default_str();
  app.add_option("--curves", cfg.curves, "number of staircases")->capture_default_str();
  app.add_option("--corners", cfg.corners, "segments per random staircase (0 = 2m)")->capture_default_str();
  app.add_option("--out", cfg.out, "report path (default stdout)");
  app.add_option("--format", cfg.format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->fallthrough();
    sub->callback([&cfg, name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsageError;
  }

  Report rep;
  try {
    rep = run(cfg);
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  const std::string text = cfg.format == "csv" ? rep.csv : rep.json.dump(2) + "\n";
  if (cfg.out.empty()) {
    out << text;
  } else {
    std::ofstream file(cfg.out);
    if (!file) {
      err << "error: cannot write " << cfg.out << '\n';
      return kUsageError;
    }
    file << text;
  }
  err << (rep.pass ? "PASS " : "FAIL ") << cfg.command << '\n';
  return rep.pass ? kPass : kToleranceFailure;
}

}  // namespace sheetlab::cli
