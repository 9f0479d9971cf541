// SPDX-License-Identifier: MIT
#include "sheetlab/hermite.hpp"

#include <algorithm>
#include <limits>

#include <unsupported/Eigen/AutoDiff>

#include "sheetlab/rng.hpp"

namespace sheetlab {

namespace {

using Dual = Eigen::AutoDiffScalar<Eigen::Matrix<double, 1, 1>>;

void check_dim(const MultiIndex& n, Eigen::Index size, const char* who) {
  if (static_cast<std::size_t>(size) != n.dim())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

// Purpose tag separating the Gaussian draws of the Hermite estimators from
// other consumers of the same seed.
constexpr std::uint32_t kGaussianPurpose = 0x48u;

Eigen::VectorXd gaussian_point(const CounterRng& rng, std::size_t r, std::size_t d, double sd) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(d));
  for (std::size_t a = 0; a < d; ++a)
    z[static_cast<Eigen::Index>(a)] = sd * rng.normal(r, static_cast<std::uint32_t>(a), kGaussianPurpose);
  return z;
}

// Per-axis tables H_0..H_K at x^a, then one product per basis element.
Eigen::ArrayXd basis_values(const std::vector<MultiIndex>& basis, int max_order, double v,
                            const Eigen::VectorXd& x) {
  std::vector<std::vector<double>> tables;
  tables.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index a = 0; a < x.size(); ++a) tables.push_back(hermite_1d_table(max_order, v, x[a]));
  Eigen::ArrayXd h(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    double p = 1.0;
    for (std::size_t a = 0; a < basis[i].dim(); ++a) p *= tables[a][static_cast<std::size_t>(basis[i][a])];
    h[static_cast<Eigen::Index>(i)] = p;
  }
  return h;
}

double norm_squared(const MultiIndex& n, double v) {
  return std::pow(v, order(n)) / static_cast<double>(factorial(n));
}

}  // namespace

double hermite(const MultiIndex& n, double v, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dim(n, x.size(), "hermite");
  double p = 1.0;
  for (std::size_t a = 0; a < n.dim(); ++a) p *= hermite_1d(n[a], v, x[static_cast<Eigen::Index>(a)]);
  return p;
}

double hermite_rodrigues_1d(int k, double v, double x) {
  if (!(v > 0.0)) throw std::domain_error("hermite_rodrigues_1d: v must be positive");
  if (k < 0) throw std::invalid_argument("hermite_rodrigues_1d: negative order");
  const double z = x / std::sqrt(v);
  double prev = 1.0, cur = z;
  if (k == 0) return 1.0;
  for (int j = 1; j < k; ++j) {
    const double next = z * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return std::pow(v, 0.5 * k) / std::tgamma(k + 1.0) * cur;
}

double hermite_dv(const MultiIndex& n, double v, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dim(n, x.size(), "hermite_dv");
  double sum = 0.0;
  for (std::size_t a = 0; a < n.dim(); ++a)
    if (auto shifted = lower(n, a, 2)) sum += hermite(*shifted, v, x);
  return -0.5 * sum;
}

double hermite_dx(const MultiIndex& n, std::size_t axis, double v,
                  const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dim(n, x.size(), "hermite_dx");
  if (auto shifted = lower(n, axis, 1)) return hermite(*shifted, v, x);
  return 0.0;
}

double backward_heat_residual(const MultiIndex& n, double v,
                              const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dim(n, x.size(), "backward_heat_residual");
  const Dual dv(v, 1, 0);
  Dual product(1.0);
  for (std::size_t a = 0; a < n.dim(); ++a)
    product = product * hermite_1d(n[a], dv, Dual(x[static_cast<Eigen::Index>(a)]));
  const double d_by_dv = product.derivatives().size() ? product.derivatives()[0] : 0.0;

  double laplacian = 0.0;
  for (std::size_t a = 0; a < n.dim(); ++a) {
    if (auto once = lower(n, a, 1))
      if (auto twice = lower(*once, a, 1)) laplacian += hermite(*twice, v, x);
  }
  return d_by_dv + 0.5 * laplacian;
}

double GramEstimate::max_z_score() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < mean.rows(); ++i) {
    for (Eigen::Index j = 0; j < mean.cols(); ++j) {
      const double dev = std::abs(mean(i, j) - theoretical(i, j));
      if (se(i, j) > 0.0)
        worst = std::max(worst, dev / se(i, j));
      else if (dev != 0.0)
        return std::numeric_limits<double>::infinity();
    }
  }
  return worst;
}

GramEstimate orthogonality_matrix(std::size_t d, double v, int max_order, const McOptions& mc) {
  if (!(v > 0.0)) throw std::domain_error("orthogonality_matrix: v must be positive");
  GramEstimate g;
  g.basis = enumerate_up_to(d, max_order);
  const auto b = static_cast<Eigen::Index>(g.basis.size());
  const double sd = std::sqrt(v);
  const CounterRng rng(mc.seed);

  const Moments moments = reduce_replicates(mc, Moments(b * b), [&](Moments& acc, std::size_t r) {
    const Eigen::ArrayXd h = basis_values(g.basis, max_order, v, gaussian_point(rng, r, d, sd));
    Eigen::MatrixXd outer = h.matrix() * h.matrix().transpose();
    acc.push(Eigen::Map<const Eigen::ArrayXd>(outer.data(), b * b));
  });

  g.mean = Eigen::Map<const Eigen::MatrixXd>(moments.mean().data(), b, b);
  g.se = Eigen::Map<const Eigen::MatrixXd>(moments.standard_error().eval().data(), b, b);
  g.theoretical = Eigen::MatrixXd::Zero(b, b);
  for (Eigen::Index i = 0; i < b; ++i) g.theoretical(i, i) = norm_squared(g.basis[static_cast<std::size_t>(i)], v);
  return g;
}

HermiteSeries::HermiteSeries(std::size_t d) : d_(d) {
  if (d < 1) throw std::invalid_argument("HermiteSeries: d must be >= 1");
}

HermiteSeries::HermiteSeries(std::size_t d, std::initializer_list<std::pair<MultiIndex, double>> terms)
    : HermiteSeries(d) {
  for (const auto& [n, a] : terms) add(n, a);
}

HermiteSeries& HermiteSeries::set(const MultiIndex& n, double a) {
  if (n.dim() != d_) throw std::invalid_argument("HermiteSeries: index dimension mismatch");
  if (a == 0.0)
    terms_.erase(n);
  else
    terms_.insert_or_assign(n, a);
  return *this;
}

HermiteSeries& HermiteSeries::add(const MultiIndex& n, double a) { return set(n, coefficient(n) + a); }

double HermiteSeries::coefficient(const MultiIndex& n) const {
  if (n.dim() != d_) throw std::invalid_argument("HermiteSeries: index dimension mismatch");
  auto it = terms_.find(n);
  return it == terms_.end() ? 0.0 : it->second;
}

int HermiteSeries::max_order() const {
  int k = 0;
  for (const auto& [n, a] : terms_) k = std::max(k, order(n));
  return k;
}

HermiteSeries HermiteSeries::truncated(int p) const {
  HermiteSeries out(d_);
  for (const auto& [n, a] : terms_)
    if (order(n) <= p) out.terms_.emplace(n, a);
  return out;
}

HermiteSeries HermiteSeries::tail(int p) const {
  HermiteSeries out(d_);
  for (const auto& [n, a] : terms_)
    if (order(n) > p) out.terms_.emplace(n, a);
  return out;
}

double HermiteSeries::energy(double v) const {
  double e = 0.0;
  for (const auto& [n, a] : terms_) e += a * a * norm_squared(n, v);
  return e;
}

double series_eval(const HermiteSeries& s, double v, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (static_cast<std::size_t>(x.size()) != s.dim()) throw std::invalid_argument("series_eval: dimension mismatch");
  if (s.empty()) return 0.0;
  const int k = s.max_order();
  std::vector<std::vector<double>> tables;
  for (Eigen::Index a = 0; a < x.size(); ++a) tables.push_back(hermite_1d_table(k, v, x[a]));
  double sum = 0.0;
  for (const auto& [n, coeff] : s.terms()) {
    double p = coeff;
    for (std::size_t a = 0; a < n.dim(); ++a) p *= tables[a][static_cast<std::size_t>(n[a])];
    sum += p;
  }
  return sum;
}

HermiteSeries series_derivative(const HermiteSeries& s, std::size_t axis) {
  if (axis >= s.dim()) throw std::out_of_range("series_derivative: axis out of range");
  HermiteSeries out(s.dim());
  for (const auto& [n, a] : s.terms())
    if (auto q = lower(n, axis, 1)) out.set(*q, a);
  return out;
}

CoefficientEstimate estimate_coefficients(const VolumetricFunction& phi, std::size_t d, double v,
                                          int max_order, const McOptions& mc) {
  if (!(v > 0.0)) throw std::domain_error("estimate_coefficients: v must be positive");
  const std::vector<MultiIndex> basis = enumerate_up_to(d, max_order);
  const auto b = static_cast<Eigen::Index>(basis.size());
  Eigen::ArrayXd scale(b);
  for (Eigen::Index i = 0; i < b; ++i) scale[i] = 1.0 / norm_squared(basis[static_cast<std::size_t>(i)], v);
  const double sd = std::sqrt(v);
  const CounterRng rng(mc.seed);

  const Moments moments = reduce_replicates(mc, Moments(b), [&](Moments& acc, std::size_t r) {
    const Eigen::VectorXd z = gaussian_point(rng, r, d, sd);
    const double f = phi(v, z);
    acc.push(f * scale * basis_values(basis, max_order, v, z));
  });

  CoefficientEstimate out{HermiteSeries(d), {}};
  const Eigen::ArrayXd se = moments.standard_error();
  for (Eigen::Index i = 0; i < b; ++i) {
    out.series.set(basis[static_cast<std::size_t>(i)], moments.mean()[i]);
    out.se.emplace(basis[static_cast<std::size_t>(i)], se[i]);
  }
  return out;
}

}  // namespace sheetlab
