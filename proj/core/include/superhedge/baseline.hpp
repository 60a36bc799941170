#pragma once

#include <cstdint>
#include <vector>

#include "superhedge/claims.hpp"
#include "superhedge/market.hpp"

namespace superhedge {

/// Zero-rate Black-Scholes inputs (discounted world).
struct BsParams {
  double spot;
  double strike;
  double sigma;
  double tau;  // year fraction until expiry

  void validate() const;
};

/// Standard normal CDF via the Abramowitz-Stegun 26.2.17 rational
/// approximation, |error| < 7.5e-8.
double normal_cdf(double x);

double bs_call_price(const BsParams& p);

/// N(d1) with zero rate; lies in (0, 1).
double bs_delta(const BsParams& p);

struct DeltaHedgeResult {
  double initial_cost = 0.0;  // equals bs_call_price exactly
  double alpha_hat = 0.0;     // fraction of paths with V_T >= H
  std::vector<double> performance;  // V_T - H per path
};

/// Daily-rebalanced delta hedge of a call on simulated Black-Scholes paths.
/// The position is reset at the start of each step using the time to expiry
/// remaining at that point.
DeltaHedgeResult delta_hedge_simulate(const MarketModelConfig& cfg, const ClaimSpec& claim,
                                      std::size_t n, std::uint64_t seed);

/// Theoretical superhedging price of the up-and-out barrier call,
/// x0 (1 - K/U). Requires K < U and x0 < U.
double barrier_superhedge_theoretical(double x0, double strike, double barrier);

}  // namespace superhedge
