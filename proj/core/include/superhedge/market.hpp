#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace superhedge {

enum class MarketKind { trinomial, black_scholes };

/// Full description of one of the two supported market models. Prices are
/// discounted (numeraire identically 1), single risky asset.
struct MarketModelConfig {
  MarketKind kind = MarketKind::trinomial;
  double x0 = 100.0;
  int horizon = 1;  // T, number of trading steps

  // trinomial: one-step returns with -1 < d < m < u and d < 0 < u.
  double d = -0.01;
  double m = 0.0;
  double u = 0.01;
  double prob_d = 1.0 / 3.0;
  double prob_m = 1.0 / 3.0;
  double prob_u = 1.0 / 3.0;

  // black_scholes: log-Euler scheme per step of length dt (year fraction).
  double sigma = 0.1;
  double mu = 0.0;
  double dt = 1.0 / 250.0;

  static MarketModelConfig trinomial(double x0, int horizon, double d, double m, double u);
  static MarketModelConfig black_scholes(double x0, int horizon, double sigma, double mu,
                                         double dt);

  /// Throws ConfigError on violated invariants (x0 > 0, ordering of returns,
  /// no-arbitrage d < 0 < u, sigma > 0, dt > 0, probabilities on the simplex).
  void validate() const;
};

/// Dense [n0, n1, n2] array, row-major. Used for per-path increments so the
/// asset axis survives even while every shipped model has one asset.
struct Array3 {
  std::size_t n0 = 0, n1 = 0, n2 = 0;
  std::vector<double> data;

  Array3() = default;
  Array3(std::size_t a, std::size_t b, std::size_t c)
      : n0(a), n1(b), n2(c), data(a * b * c, 0.0) {}

  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * n1 + j) * n2 + k];
  }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * n1 + j) * n2 + k];
  }
};

/// A batch of discounted price paths. prices is [n_paths, T+1, n_assets]
/// row-major; column 0 is constant across paths. probs is empty for Monte
/// Carlo batches and holds exact per-path probabilities for enumerations.
struct PathBatch {
  std::size_t n_paths = 0;
  std::size_t n_times = 0;  // T + 1
  std::size_t n_assets = 1;
  std::vector<double> prices;
  std::vector<double> probs;
  std::uint64_t seed = 0;

  std::size_t horizon() const { return n_times == 0 ? 0 : n_times - 1; }

  double price(std::size_t p, std::size_t t, std::size_t a = 0) const {
    return prices[(p * n_times + t) * n_assets + a];
  }
  double& price(std::size_t p, std::size_t t, std::size_t a = 0) {
    return prices[(p * n_times + t) * n_assets + a];
  }

  /// Contiguous view of one path (single-asset batches only).
  std::span<const double> path(std::size_t p) const {
    return {prices.data() + p * n_times, n_times};
  }

  /// Checks positivity, the constant first column and, when present, that
  /// probs sums to 1 within 1e-12. Throws ConfigError otherwise.
  void validate() const;
};

/// X_t = X_0 prod_{k<=t} (1 + R_k), R_k i.i.d. on {d, m, u}. Deterministic
/// given (cfg, n, seed); path p draws from stream p of the seed.
PathBatch simulate_trinomial(const MarketModelConfig& cfg, std::size_t n, std::uint64_t seed);

/// Log-Euler scheme: X_{t+1} = X_t exp((mu - sigma^2/2) dt + sigma sqrt(dt) Z).
PathBatch simulate_black_scholes(const MarketModelConfig& cfg, std::size_t n, std::uint64_t seed);

/// One Black-Scholes step with an externally supplied standard normal draw.
double black_scholes_step(const MarketModelConfig& cfg, double x, double z);

inline constexpr std::size_t kDefaultEnumerationCap = 1594323;  // 3^13 paths

/// All 3^T paths in base-3 order (digit 0/1/2 = d/m/u move, step 1 is the
/// most significant digit) with exact product probabilities. Refuses when
/// 3^T exceeds the cap.
PathBatch enumerate_trinomial(const MarketModelConfig& cfg,
                              std::size_t path_cap = kDefaultEnumerationCap);

/// out[p, k, a] = X_{k+1} - X_k.
Array3 increments(const PathBatch& batch);

}  // namespace superhedge
