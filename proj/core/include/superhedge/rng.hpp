#pragma once

#include <cstdint>

namespace superhedge {

/// Counter-based pseudo-random generator.
///
/// Output k of stream s under seed q is mix(state0(q, s) + k * GAMMA) where
/// mix is the SplitMix64 finalizer (Stafford mix13). Any (seed, stream,
/// counter) triple can be evaluated independently, so path blocks can draw
/// from disjoint streams without sharing state and results do not depend on
/// worker count or call interleaving.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform();

  /// Standard normal via the inverse CDF applied to a uniform strictly
  /// inside (0, 1); no rejection, so draws stay aligned with the counter.
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer (Stafford variant 13).
std::uint64_t mix64(std::uint64_t z);

/// Inverse standard normal CDF. Acklam's rational approximation
/// (|relative error| < 1.2e-9) plus one Halley step against erfc,
/// giving close to full double precision on (0, 1).
double inverse_normal_cdf(double p);

}  // namespace superhedge
