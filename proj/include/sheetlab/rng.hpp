// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <cstdint>

namespace sheetlab {

/**
 * Counter-based Gaussian source (Philox4x32-10).
 *
 * Every draw is a pure function of (key, counter), so a value keyed by e.g.
 * (seed, cell, component) is identical regardless of iteration order or how
 * work is split across threads.
 */
class CounterRng {
public:
  using Counter = std::array<std::uint32_t, 4>;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  /// Raw 128-bit block for a counter.
  Counter block(const Counter& counter) const;

  /// Two independent uniforms in (0, 1) for the counter.
  std::array<double, 2> uniforms(const Counter& counter) const;

  /// Two independent standard normals for the counter (Box-Muller).
  std::array<double, 2> normals(const Counter& counter) const;

  /// Convenience keyed on three 64/32-bit words.
  double normal(std::uint64_t stream, std::uint32_t slot, std::uint32_t purpose = 0) const {
    return normals(make_counter(stream, slot, purpose))[0];
  }

  static Counter make_counter(std::uint64_t stream, std::uint32_t slot, std::uint32_t purpose) {
    return {static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), slot,
            purpose};
  }

  std::uint64_t key() const { return key_; }

private:
  std::uint64_t key_;
};

/// SplitMix64 finalizer: derives well-separated child keys from a parent seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace sheetlab
