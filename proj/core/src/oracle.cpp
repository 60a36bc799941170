#include "superhedge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "superhedge/errors.hpp"

namespace superhedge {

namespace {

constexpr double kFeasTol = 1e-10;   // constraint slack accepted as feasible
constexpr double kTieTol = 1e-12;    // price window treated as a tie

struct Candidate {
  double u;
  double xi;
};

// Smallest-|xi| point of the interval [lo, hi].
double nearest_to_zero(double lo, double hi) {
  if (lo > 0.0) return lo;
  if (hi < 0.0) return hi;
  return 0.0;
}

}  // namespace

NodeLpResult one_step_superhedge(double x0, std::span<const ChildState> children) {
  const std::size_t n = children.size();
  if (n < 2) throw ConfigError("one_step_superhedge: need at least 2 children");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (children[i].x == children[j].x) {
        throw ConfigError("one_step_superhedge: children must have distinct prices");
      }
    }
  }

  double x_min = children[0].x, x_max = children[0].x;
  for (const auto& c : children) {
    x_min = std::min(x_min, c.x);
    x_max = std::max(x_max, c.x);
  }
  if (!(x_min <= x0 && x0 <= x_max)) {
    throw ArbitrageError("one_step_superhedge: x0 outside the convex hull of child prices");
  }

  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = children[i].x - x0;

  auto feasible = [&](double u, double xi) {
    for (std::size_t k = 0; k < n; ++k) {
      if (u + xi * a[k] < children[k].h - kFeasTol) return false;
    }
    return true;
  };

  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double xi = (children[i].h - children[j].h) / (a[i] - a[j]);
      const double u = children[i].h - xi * a[i];
      if (feasible(u, xi)) cands.push_back({u, xi});
    }
  }
  // A child sitting at x0 pins u alone; xi is then only constrained to an
  // interval and the tie-break picks its point nearest zero.
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != 0.0) continue;
    const double u = children[i].h;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (std::size_t k = 0; k < n; ++k) {
      if (a[k] > 0.0) {
        lo = std::max(lo, (children[k].h - u) / a[k]);
      } else if (a[k] < 0.0) {
        hi = std::min(hi, (children[k].h - u) / a[k]);
      } else if (children[k].h > u + kFeasTol) {
        ok = false;
      }
    }
    if (ok && lo <= hi + kFeasTol) {
      const double xi = nearest_to_zero(lo, std::max(lo, hi));
      if (feasible(u, xi)) cands.push_back({u, xi});
    }
  }

  if (cands.empty()) {
    throw ArbitrageError("one_step_superhedge: no feasible candidate (degenerate node)");
  }

  double best_u = cands[0].u;
  for (const auto& c : cands) best_u = std::min(best_u, c.u);
  const double scale = std::max(1.0, std::abs(best_u));
  NodeLpResult out;
  out.price = best_u;
  out.xi = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) {
    if (c.u <= best_u + kTieTol * scale && std::abs(c.xi) < std::abs(out.xi)) {
      out.price = c.u;
      out.xi = c.xi;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(out.price + out.xi * a[k] - children[k].h) <= 1e-9 * scale) {
      out.binding.push_back(static_cast<int>(k));
    }
  }
  return out;
}

namespace {

std::size_t pow3_checked(int t, std::size_t cap, const char* who) {
  std::size_t n = 1;
  for (int k = 0; k < t; ++k) {
    if (n > cap / 3) {
      throw ConfigError(std::string(who) + ": 3^" + std::to_string(t) +
                        " exceeds the tree cap of " + std::to_string(cap));
    }
    n *= 3;
  }
  return n;
}

}  // namespace

double TreeSolution::xi_at(int t, std::span<const int> moves) const {
  if (t < 0 || t >= horizon) throw ConfigError("xi_at: t out of range");
  if (recombining) {
    int n_d = 0, n_m = 0;
    for (int k = 0; k < t; ++k) {
      if (moves[k] == 0) ++n_d;
      else if (moves[k] == 1) ++n_m;
    }
    return xi_lattice[t][static_cast<std::size_t>(n_d) * (t + 1) + n_m];
  }
  std::size_t id = 0;
  for (int k = 0; k < t; ++k) id = id * 3 + static_cast<std::size_t>(moves[k]);
  return xi_tree[t][id];
}

TreeSolution superhedge_price_tree(const MarketModelConfig& cfg, const ClaimSpec& claim,
                                   std::size_t path_cap) {
  cfg.validate();
  claim.validate();
  if (cfg.kind != MarketKind::trinomial) {
    throw ConfigError("superhedge_price_tree: trinomial market required");
  }
  if (cfg.horizon < 1) throw ConfigError("superhedge_price_tree: horizon must be >= 1");

  const int T = cfg.horizon;
  const double grow[3] = {1.0 + cfg.d, 1.0 + cfg.m, 1.0 + cfg.u};

  TreeSolution sol;
  sol.horizon = T;

  if (claim.kind == ClaimKind::european_call) {
    // Recombining lattice over exact move counts (n_d, n_m); n_u implied.
    sol.recombining = true;
    sol.xi_lattice.assign(T, {});
    auto node_price = [&](int t, int n_d, int n_m) {
      return cfg.x0 * std::pow(grow[0], n_d) * std::pow(grow[1], n_m) *
             std::pow(grow[2], t - n_d - n_m);
    };

    // One (T+1)-stride grid reused for every level; level t touches only
    // entries with n_d + n_m <= t.
    const std::size_t stride = static_cast<std::size_t>(T) + 1;
    std::vector<double> value(stride * stride, 0.0);
    for (int n_d = 0; n_d <= T; ++n_d) {
      for (int n_m = 0; n_m + n_d <= T; ++n_m) {
        const double x = node_price(T, n_d, n_m);
        value[static_cast<std::size_t>(n_d) * stride + n_m] = std::max(x - claim.strike, 0.0);
      }
    }
    for (int t = T - 1; t >= 0; --t) {
      sol.xi_lattice[t].assign(static_cast<std::size_t>(t + 1) * (t + 1),
                               std::numeric_limits<double>::quiet_NaN());
      for (int n_d = 0; n_d <= t; ++n_d) {
        for (int n_m = 0; n_m + n_d <= t; ++n_m) {
          const double x = node_price(t, n_d, n_m);
          const ChildState children[3] = {
              {x * grow[0], value[static_cast<std::size_t>(n_d + 1) * stride + n_m]},
              {x * grow[1], value[static_cast<std::size_t>(n_d) * stride + n_m + 1]},
              {x * grow[2], value[static_cast<std::size_t>(n_d) * stride + n_m]},
          };
          const NodeLpResult lp = one_step_superhedge(x, children);
          value[static_cast<std::size_t>(n_d) * stride + n_m] = lp.price;
          sol.xi_lattice[t][static_cast<std::size_t>(n_d) * (t + 1) + n_m] = lp.xi;
        }
      }
    }
    sol.price = value[0];
    return sol;
  }

  // Path-dependent claim: full ternary tree.
  pow3_checked(T, path_cap, "superhedge_price_tree");
  sol.recombining = false;
  sol.xi_tree.assign(T, {});
  std::size_t level_size = 1;
  for (int t = 0; t < T; ++t) {
    sol.xi_tree[t].assign(level_size, 0.0);
    level_size *= 3;
  }

  std::vector<double> path(static_cast<std::size_t>(T) + 1);
  path[0] = cfg.x0;

  auto solve = [&](auto&& self, int t, std::size_t id) -> double {
    if (t == T) return payoff(claim, path);
    const double x = path[t];
    ChildState children[3];
    for (int j = 0; j < 3; ++j) {
      path[t + 1] = x * grow[j];
      children[j] = {path[t + 1], self(self, t + 1, id * 3 + j)};
    }
    const NodeLpResult lp = one_step_superhedge(x, children);
    sol.xi_tree[t][id] = lp.xi;
    return lp.price;
  };
  sol.price = solve(solve, 0, 0);
  return sol;
}

std::vector<double> claim_values(const ClaimSpec& claim, const PathBatch& batch) {
  std::vector<double> out(batch.n_paths);
  for (std::size_t p = 0; p < batch.n_paths; ++p) out[p] = payoff(claim, batch.path(p));
  return out;
}

double sup_martingale_expectation(const MarketModelConfig& cfg,
                                  std::span<const double> claim_values) {
  cfg.validate();
  if (cfg.kind != MarketKind::trinomial) {
    throw ConfigError("sup_martingale_expectation: trinomial market required");
  }
  const int T = cfg.horizon;
  const std::size_t n_leaves = pow3_checked(T, kDefaultEnumerationCap,
                                            "sup_martingale_expectation");
  if (claim_values.size() != n_leaves) {
    throw ConfigError("sup_martingale_expectation: claim values size must be 3^T");
  }

  const double rets[3] = {cfg.d, cfg.m, cfg.u};
  std::vector<double> value(claim_values.begin(), claim_values.end());

  std::size_t nodes = n_leaves / 3;
  for (int t = T - 1; t >= 0; --t, nodes /= 3) {
    for (std::size_t i = 0; i < nodes; ++i) {
      // Node price from the base-3 digits of the prefix id.
      double x = cfg.x0;
      std::size_t rest = i;
      std::size_t place = 1;
      for (int k = 1; k < t; ++k) place *= 3;
      for (int k = 0; k < t; ++k) {
        const std::size_t digit = rest / place;
        rest %= place;
        if (place > 1) place /= 3;
        x *= 1.0 + rets[digit];
      }
      // Vertices of {q >= 0, sum q = 1, sum q a = 0}: flat singletons and
      // sign-crossing pairs.
      double best = -std::numeric_limits<double>::infinity();
      const double a[3] = {x * rets[0], x * rets[1], x * rets[2]};
      const double* v = value.data() + 3 * i;
      for (int j = 0; j < 3; ++j) {
        if (a[j] == 0.0) best = std::max(best, v[j]);
      }
      for (int j = 0; j < 3; ++j) {
        for (int k = j + 1; k < 3; ++k) {
          if (a[j] < 0.0 && a[k] > 0.0) {
            const double q_k = -a[j] / (a[k] - a[j]);
            best = std::max(best, (1.0 - q_k) * v[j] + q_k * v[k]);
          }
        }
      }
      value[i] = best;
    }
  }
  return value[0];
}

double quantile_price_bruteforce(const MarketModelConfig& cfg, const ClaimSpec& claim,
                                 double alpha) {
  cfg.validate();
  claim.validate();
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("quantile_price_bruteforce: alpha must lie in (0, 1]");
  }
  if (cfg.horizon > 2) {
    throw ConfigError(
        "quantile_price_bruteforce: subset enumeration is limited to T <= 2; "
        "use the trained estimator (train-t0) for larger horizons");
  }

  const PathBatch paths = enumerate_trinomial(cfg);
  const std::vector<double> h = claim_values(claim, paths);
  const std::size_t n = paths.n_paths;

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> gated(n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double prob = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      if (mask & (std::size_t{1} << p)) prob += paths.probs[p];
    }
    if (prob < alpha - 1e-12) continue;
    for (std::size_t p = 0; p < n; ++p) {
      gated[p] = (mask & (std::size_t{1} << p)) ? h[p] : 0.0;
    }
    best = std::min(best, sup_martingale_expectation(cfg, gated));
  }
  return best;
}

QuantileCurve quantile_curve(const MarketModelConfig& cfg, const ClaimSpec& claim,
                             std::span<const double> alpha_grid) {
  if (alpha_grid.empty()) throw ConfigError("quantile_curve: empty alpha grid");
  QuantileCurve curve;
  curve.alphas.assign(alpha_grid.begin(), alpha_grid.end());
  std::sort(curve.alphas.begin(), curve.alphas.end());
  for (double a : curve.alphas) curve.prices.push_back(quantile_price_bruteforce(cfg, claim, a));

  const PathBatch paths = enumerate_trinomial(cfg);
  curve.superhedge_price = sup_martingale_expectation(cfg, claim_values(claim, paths));

  for (std::size_t i = 1; i < curve.prices.size(); ++i) {
    if (curve.prices[i] < curve.prices[i - 1]) {
      throw std::logic_error("quantile_curve: prices are not nondecreasing");
    }
  }
  if (curve.alphas.back() == 1.0 && curve.prices.back() != curve.superhedge_price) {
    throw std::logic_error("quantile_curve: alpha = 1 price differs from superhedging price");
  }
  return curve;
}

}  // namespace superhedge
