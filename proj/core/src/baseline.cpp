#include "superhedge/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "superhedge/errors.hpp"

namespace superhedge {

void BsParams::validate() const {
  if (!(spot > 0.0 && strike > 0.0 && sigma > 0.0 && tau > 0.0)) {
    throw ConfigError("bs: spot, strike, sigma and tau must be > 0");
  }
}

double normal_cdf(double x) {
  // Abramowitz-Stegun 26.2.17.
  constexpr double b1 = 0.319381530, b2 = -0.356563782, b3 = 1.781477937,
                   b4 = -1.821255978, b5 = 1.330274429, p = 0.2316419;
  const double ax = std::abs(x);
  const double t = 1.0 / (1.0 + p * ax);
  const double poly = ((((b5 * t + b4) * t + b3) * t + b2) * t + b1) * t;
  const double pdf = std::exp(-0.5 * ax * ax) / std::sqrt(2.0 * M_PI);
  const double tail = pdf * poly;
  return x >= 0.0 ? 1.0 - tail : tail;
}

namespace {

double d1(const BsParams& p) {
  const double sig_sqrt_tau = p.sigma * std::sqrt(p.tau);
  return (std::log(p.spot / p.strike) + 0.5 * sig_sqrt_tau * sig_sqrt_tau) / sig_sqrt_tau;
}

}  // namespace

double bs_call_price(const BsParams& p) {
  p.validate();
  const double sig_sqrt_tau = p.sigma * std::sqrt(p.tau);
  const double x1 = d1(p);
  return p.spot * normal_cdf(x1) - p.strike * normal_cdf(x1 - sig_sqrt_tau);
}

double bs_delta(const BsParams& p) {
  p.validate();
  return normal_cdf(d1(p));
}

DeltaHedgeResult delta_hedge_simulate(const MarketModelConfig& cfg, const ClaimSpec& claim,
                                      std::size_t n, std::uint64_t seed) {
  cfg.validate();
  claim.validate();
  if (cfg.kind != MarketKind::black_scholes) {
    throw ConfigError("delta_hedge_simulate: black_scholes market required");
  }
  if (claim.kind != ClaimKind::european_call) {
    throw ConfigError("delta_hedge_simulate: european call required");
  }

  const int T = cfg.horizon;
  const double tau = static_cast<double>(T) * cfg.dt;
  const PathBatch batch = simulate_black_scholes(cfg, n, seed);

  DeltaHedgeResult result;
  result.initial_cost = bs_call_price({cfg.x0, claim.strike, cfg.sigma, tau});
  result.performance.resize(n);

  std::size_t wins = 0;
  for (std::size_t p = 0; p < n; ++p) {
    double v = result.initial_cost;
    for (int t = 0; t < T; ++t) {
      const double remaining = tau - static_cast<double>(t) * cfg.dt;
      const double delta =
          bs_delta({batch.price(p, static_cast<std::size_t>(t)), claim.strike, cfg.sigma,
                    remaining});
      v += delta * (batch.price(p, static_cast<std::size_t>(t) + 1) -
                    batch.price(p, static_cast<std::size_t>(t)));
    }
    const double h = payoff(claim, batch.path(p));
    result.performance[p] = v - h;
    if (v >= h) ++wins;
  }
  result.alpha_hat = static_cast<double>(wins) / static_cast<double>(n);
  return result;
}

double barrier_superhedge_theoretical(double x0, double strike, double barrier) {
  if (!(strike < barrier)) throw ConfigError("barrier price: requires K < U");
  if (!(x0 > 0.0 && x0 < barrier)) throw ConfigError("barrier price: requires 0 < x0 < U");
  return x0 * (1.0 - strike / barrier);
}

}  // namespace superhedge
