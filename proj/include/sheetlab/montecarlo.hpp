// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace sheetlab {

/// Replicate count, seed and worker count for a Monte-Carlo estimator.
/// `threads == 0` means hardware concurrency. Results never depend on it.
struct McOptions {
  std::size_t replicates = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// Replicates are grouped in fixed-size blocks; accumulation order inside and
/// across blocks is independent of the thread count.
inline constexpr std::size_t kReplicateBlock = 2048;

/**
 * Streaming mean/variance of a fixed-length vector of observables
 * (Welford update, Chan merge).
 */
class Moments {
public:
  Moments() = default;
  explicit Moments(Eigen::Index size)
      : mean_(Eigen::ArrayXd::Zero(size)), m2_(Eigen::ArrayXd::Zero(size)) {}

  void push(const Eigen::Ref<const Eigen::ArrayXd>& x) {
    ++count_;
    const Eigen::ArrayXd delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }
  void push(double x) { push(Eigen::ArrayXd::Constant(1, x)); }

  void merge(const Moments& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double n1 = static_cast<double>(count_);
    const double n2 = static_cast<double>(other.count_);
    const double n = n1 + n2;
    const Eigen::ArrayXd delta = other.mean_ - mean_;
    mean_ += delta * (n2 / n);
    m2_ += other.m2_ + delta.square() * (n1 * n2 / n);
    count_ += other.count_;
  }

  std::size_t count() const { return count_; }
  const Eigen::ArrayXd& mean() const { return mean_; }
  /// Unbiased sample variance.
  Eigen::ArrayXd variance() const {
    if (count_ < 2) return Eigen::ArrayXd::Zero(mean_.size());
    return m2_ / static_cast<double>(count_ - 1);
  }
  /// Standard error of the mean.
  Eigen::ArrayXd standard_error() const {
    if (count_ < 2) return Eigen::ArrayXd::Zero(mean_.size());
    return (variance() / static_cast<double>(count_)).sqrt();
  }

private:
  std::size_t count_ = 0;
  Eigen::ArrayXd mean_;
  Eigen::ArrayXd m2_;
};

/// Runs body(i) for i in [0, n) on up to `threads` workers.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

/**
 * Deterministic blocked reduction over replicates.
 *
 * `body(acc, r)` accumulates replicate r into a block-local accumulator;
 * accumulators need `merge(const Acc&)`. Blocks are merged in index order.
 */
template <typename Accumulator, typename Body>
Accumulator reduce_replicates(const McOptions& opt, const Accumulator& zero, Body&& body) {
  if (opt.replicates < 2) throw std::invalid_argument("Monte-Carlo estimator needs >= 2 replicates");
  const std::size_t blocks = (opt.replicates + kReplicateBlock - 1) / kReplicateBlock;
  std::vector<Accumulator> partial(blocks, zero);
  parallel_for(blocks, opt.threads, [&](std::size_t b) {
    const std::size_t begin = b * kReplicateBlock;
    const std::size_t end = std::min(opt.replicates, begin + kReplicateBlock);
    for (std::size_t r = begin; r < end; ++r) body(partial[b], r);
  });
  Accumulator total = zero;
  for (const auto& p : partial) total.merge(p);
  return total;
}

/// Mean with its standard error and the value theory predicts, as reported
/// by every stochastic check.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  double theoretical = 0.0;

  /// |mean - theoretical| <= se_mult * se; exact agreement always passes.
  bool within(double se_mult) const {
    return std::abs(mean - theoretical) <= se_mult * se;
  }
};

}  // namespace sheetlab
