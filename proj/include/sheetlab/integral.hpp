// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "sheetlab/hermite.hpp"
#include "sheetlab/montecarlo.hpp"
#include "sheetlab/sheet.hpp"

namespace sheetlab {

/// Thrown when a curve breakpoint is not a node of the sheet grid.
struct AlignmentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/**
 * Axis-parallel staircase from the origin to an end multitime: consecutive
 * breakpoints differ in exactly one coordinate, which strictly increases.
 */
class IncreasingCurve {
public:
  explicit IncreasingCurve(std::vector<MultiTime> breakpoints);

  const std::vector<MultiTime>& breakpoints() const { return breakpoints_; }
  /// Active (0-based) axis of segment i, between breakpoints i and i+1.
  std::size_t axis(std::size_t segment) const { return axes_[segment]; }
  std::size_t segments() const { return axes_.size(); }
  std::size_t m() const { return breakpoints_.front().dim(); }
  const MultiTime& end() const { return breakpoints_.back(); }

  /// Parts before and after interior breakpoint k; the second part is not
  /// anchored at the origin so it is returned as a raw breakpoint list.
  std::pair<std::vector<MultiTime>, std::vector<MultiTime>> split(std::size_t k) const;

private:
  std::vector<MultiTime> breakpoints_;
  std::vector<std::size_t> axes_;
};

/// Staircase visiting axes in `axis_order` (a permutation of 0..m-1), each
/// traversed fully in `steps_per_axis` equal segments.
IncreasingCurve make_staircase(const MultiTime& t, const std::vector<std::size_t>& axis_order,
                               std::size_t steps_per_axis = 1);

/// Random monotone staircase with `n_corners` segments (n_corners >= m),
/// breakpoints on the lattice t^alpha * i / lattice. Deterministic in seed.
IncreasingCurve random_staircase(const MultiTime& t, std::size_t n_corners, std::uint64_t seed,
                                 std::size_t lattice = 16);

/// phi_a(s, W_s), a = 0..d-1.
using Integrand = std::function<Eigen::VectorXd(const MultiTime& s, const Eigen::VectorXd& w)>;

/// Left-endpoint (Ito) sum of sum_a phi_a dW^a along every grid step of the
/// curve, the sheet restricted to each segment. Throws AlignmentError when a
/// breakpoint is off-grid.
double curvilinear_integral(const SheetGrid& grid, const IncreasingCurve& curve, const Integrand& phi);

/// Same, over an arbitrary chain of axis-parallel increasing segments.
double curvilinear_integral(const SheetGrid& grid, const std::vector<MultiTime>& chain,
                            const Integrand& phi);

/// sum over curve steps of dW dW^T (d x d).
Eigen::MatrixXd curve_covariation(const SheetGrid& grid, const IncreasingCurve& curve);

/// Monte-Carlo mean of the (a, b) curve covariation against delta_ab v(t).
Estimate covariation_rule_check(const SheetSpec& spec, const IncreasingCurve& curve, std::size_t a, std::size_t b,
                           const McOptions& mc);

/**
 * Differentiable process Phi_t = Phi(v(t), W_t) given by a Hermite series,
 * with derivative processes phi_a = series_derivative(Phi, a).
 */
class ProcessSpec {
public:
  explicit ProcessSpec(HermiteSeries phi);
  /// Explicit derivatives; throws std::invalid_argument unless they are
  /// exactly the index shifts of `phi`.
  ProcessSpec(HermiteSeries phi, std::vector<HermiteSeries> derivatives);

  std::size_t d() const { return phi_.dim(); }
  const HermiteSeries& series() const { return phi_; }
  const std::vector<HermiteSeries>& derivatives() const { return derivatives_; }

  double value(double v, const Eigen::VectorXd& w) const { return series_eval(phi_, v, w); }
  /// Integrand (phi_a(v(s), w))_a.
  Integrand integrand() const;

private:
  HermiteSeries phi_;
  std::vector<HermiteSeries> derivatives_;
};

struct MeshDiagnostics {
  std::size_t mesh = 0;       ///< cells per axis
  double pair_ms = 0.0;       ///< max over curve pairs of E[(I_g - I_g')^2]
  double pair_ms_se = 0.0;
  double recon_ms = 0.0;      ///< max over curves of E[(Phi(t) - Phi(0) - I_g)^2]
  double recon_ms_se = 0.0;
  double vs_finest_ms = 0.0;  ///< max over curves of E[(I_g(mesh) - I_g(finest))^2]
};

struct PathIndependenceReport {
  std::vector<MeshDiagnostics> meshes;  ///< in the order requested
  std::size_t replicates = 0;

  /// Both mean-square discrepancies strictly decrease along the mesh ladder
  /// (or already sit at rounding level, as for exactly telescoping sums).
  bool monotone() const;
};

/// Integrates the process derivatives along every curve on sheets sampled at
/// the finest mesh and observed on each coarser mesh of the dyadic ladder.
PathIndependenceReport path_independence_test(const ProcessSpec& process, const MultiTime& t,
                                              const std::vector<IncreasingCurve>& curves,
                                              const std::vector<std::size_t>& meshes, const McOptions& mc);

/// E[Phi(v(t), W_t)] over sheets on a uniform `mesh`-per-axis grid; theory a_0.
Estimate martingale_check(const ProcessSpec& process, const MultiTime& t, const McOptions& mc,
                          std::size_t mesh = 8);

/// E[(int_g sum_a phi_a dW^a)^2] against int_0^{v(t)} sum_a E[phi_a(u, Z_u)^2] du
/// on sheets drawn from `spec`.
Estimate ito_isometry_check(const ProcessSpec& process, const SheetSpec& spec, const IncreasingCurve& curve,
                            const McOptions& mc);

/// Isometry check for the tail process sum_{|n| > p} a_n H_n; the theoretical
/// value reduces to sum_{|n| > p} a_n^2 v^{|n|} / n!.
Estimate truncation_tail_check(const HermiteSeries& phi, int p, const SheetSpec& spec,
                               const IncreasingCurve& curve, const McOptions& mc);

}  // namespace sheetlab
