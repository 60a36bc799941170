#include "superhedge/market.hpp"

#include <cmath>
#include <string>

#include "superhedge/errors.hpp"
#include "superhedge/parallel.hpp"
#include "superhedge/rng.hpp"

namespace superhedge {

MarketModelConfig MarketModelConfig::trinomial(double x0, int horizon, double d, double m,
                                               double u) {
  MarketModelConfig cfg;
  cfg.kind = MarketKind::trinomial;
  cfg.x0 = x0;
  cfg.horizon = horizon;
  cfg.d = d;
  cfg.m = m;
  cfg.u = u;
  cfg.validate();
  return cfg;
}

MarketModelConfig MarketModelConfig::black_scholes(double x0, int horizon, double sigma,
                                                   double mu, double dt) {
  MarketModelConfig cfg;
  cfg.kind = MarketKind::black_scholes;
  cfg.x0 = x0;
  cfg.horizon = horizon;
  cfg.sigma = sigma;
  cfg.mu = mu;
  cfg.dt = dt;
  cfg.validate();
  return cfg;
}

void MarketModelConfig::validate() const {
  if (!(x0 > 0.0)) throw ConfigError("market: x0 must be > 0");
  if (horizon < 0) throw ConfigError("market: horizon must be >= 0");
  if (kind == MarketKind::trinomial) {
    if (!(-1.0 < d && d < m && m < u)) {
      throw ConfigError("market: trinomial returns must satisfy -1 < d < m < u");
    }
    if (!(d < 0.0 && 0.0 < u)) {
      throw ConfigError("market: trinomial needs d < 0 < u (no one-step arbitrage)");
    }
    if (!(prob_d > 0.0 && prob_m > 0.0 && prob_u > 0.0) ||
        std::abs(prob_d + prob_m + prob_u - 1.0) > 1e-12) {
      throw ConfigError("market: trinomial probabilities must be positive and sum to 1");
    }
  } else {
    if (!(sigma > 0.0)) throw ConfigError("market: sigma must be > 0");
    if (!(dt > 0.0)) throw ConfigError("market: dt must be > 0");
  }
}

void PathBatch::validate() const {
  if (prices.size() != n_paths * n_times * n_assets) {
    throw ConfigError("path batch: prices size does not match dimensions");
  }
  for (double v : prices) {
    if (!(v > 0.0)) throw ConfigError("path batch: prices must be strictly positive");
  }
  for (std::size_t p = 1; p < n_paths; ++p) {
    for (std::size_t a = 0; a < n_assets; ++a) {
      if (price(p, 0, a) != price(0, 0, a)) {
        throw ConfigError("path batch: column 0 must be constant across paths");
      }
    }
  }
  if (!probs.empty()) {
    if (probs.size() != n_paths) throw ConfigError("path batch: probs size mismatch");
    double s = 0.0;
    for (double q : probs) s += q;
    if (std::abs(s - 1.0) > 1e-12) {
      throw ConfigError("path batch: probabilities must sum to 1 within 1e-12");
    }
  }
}

namespace {

PathBatch make_batch(std::size_t n, int horizon, std::uint64_t seed) {
  PathBatch batch;
  batch.n_paths = n;
  batch.n_times = static_cast<std::size_t>(horizon) + 1;
  batch.n_assets = 1;
  batch.seed = seed;
  batch.prices.assign(batch.n_paths * batch.n_times, 0.0);
  return batch;
}

constexpr std::size_t kSimBlock = 4096;

}  // namespace

PathBatch simulate_trinomial(const MarketModelConfig& cfg, std::size_t n, std::uint64_t seed) {
  cfg.validate();
  if (cfg.kind != MarketKind::trinomial) throw ConfigError("simulate_trinomial: wrong kind");
  if (n < 1) throw ConfigError("simulate_trinomial: n must be >= 1");

  PathBatch batch = make_batch(n, cfg.horizon, seed);
  const double cut_d = cfg.prob_d;
  const double cut_m = cfg.prob_d + cfg.prob_m;
  const int T = cfg.horizon;

  parallel_blocks(n, kSimBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      CounterRng rng(seed, p);
      double x = cfg.x0;
      batch.price(p, 0) = x;
      for (int t = 0; t < T; ++t) {
        const double v = rng.uniform();
        const double r = v < cut_d ? cfg.d : (v < cut_m ? cfg.m : cfg.u);
        x *= 1.0 + r;
        batch.price(p, static_cast<std::size_t>(t) + 1) = x;
      }
    }
  });
  return batch;
}

double black_scholes_step(const MarketModelConfig& cfg, double x, double z) {
  return x * std::exp((cfg.mu - 0.5 * cfg.sigma * cfg.sigma) * cfg.dt +
                      cfg.sigma * std::sqrt(cfg.dt) * z);
}

PathBatch simulate_black_scholes(const MarketModelConfig& cfg, std::size_t n,
                                 std::uint64_t seed) {
  cfg.validate();
  if (cfg.kind != MarketKind::black_scholes) {
    throw ConfigError("simulate_black_scholes: wrong kind");
  }
  if (n < 1) throw ConfigError("simulate_black_scholes: n must be >= 1");

  PathBatch batch = make_batch(n, cfg.horizon, seed);
  const int T = cfg.horizon;
  const double drift = (cfg.mu - 0.5 * cfg.sigma * cfg.sigma) * cfg.dt;
  const double vol = cfg.sigma * std::sqrt(cfg.dt);

  parallel_blocks(n, kSimBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      CounterRng rng(seed, p);
      double x = cfg.x0;
      batch.price(p, 0) = x;
      for (int t = 0; t < T; ++t) {
        x *= std::exp(drift + vol * rng.normal());
        batch.price(p, static_cast<std::size_t>(t) + 1) = x;
      }
    }
  });
  return batch;
}

PathBatch enumerate_trinomial(const MarketModelConfig& cfg, std::size_t path_cap) {
  cfg.validate();
  if (cfg.kind != MarketKind::trinomial) throw ConfigError("enumerate_trinomial: wrong kind");

  const int T = cfg.horizon;
  std::size_t n_paths = 1;
  for (int t = 0; t < T; ++t) {
    if (n_paths > path_cap / 3) {
      throw ConfigError("enumerate_trinomial: 3^" + std::to_string(T) +
                        " paths exceed the enumeration cap of " + std::to_string(path_cap));
    }
    n_paths *= 3;
  }

  PathBatch batch = make_batch(n_paths, T, 0);
  batch.probs.assign(n_paths, 0.0);
  const double rets[3] = {cfg.d, cfg.m, cfg.u};
  const double prs[3] = {cfg.prob_d, cfg.prob_m, cfg.prob_u};

  parallel_blocks(n_paths, kSimBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      double x = cfg.x0;
      double q = 1.0;
      batch.price(p, 0) = x;
      std::size_t rest = p;
      std::size_t place = n_paths / 3;
      for (int t = 0; t < T; ++t) {
        const std::size_t digit = rest / place;
        rest %= place;
        place = place == 1 ? 1 : place / 3;
        x *= 1.0 + rets[digit];
        q *= prs[digit];
        batch.price(p, static_cast<std::size_t>(t) + 1) = x;
      }
      batch.probs[p] = q;
    }
  });

  // Exact-probability invariant: rescale away accumulated rounding so the
  // sum is 1 bit-exact in the uniform case and within 1e-12 otherwise.
  double s = 0.0;
  for (double q : batch.probs) s += q;
  if (std::abs(s - 1.0) > 1e-12) {
    for (double& q : batch.probs) q /= s;
  }
  return batch;
}

Array3 increments(const PathBatch& batch) {
  if (batch.horizon() < 1) throw ConfigError("increments: batch horizon must be >= 1");
  Array3 out(batch.n_paths, batch.horizon(), batch.n_assets);
  for (std::size_t p = 0; p < batch.n_paths; ++p) {
    for (std::size_t t = 0; t + 1 < batch.n_times; ++t) {
      for (std::size_t a = 0; a < batch.n_assets; ++a) {
        out(p, t, a) = batch.price(p, t + 1, a) - batch.price(p, t, a);
      }
    }
  }
  return out;
}

}  // namespace superhedge
