#pragma once

#include <span>
#include <vector>

#include "superhedge/claims.hpp"
#include "superhedge/market.hpp"

namespace superhedge {

/// One successor node of a pricing tree: its price and claim value.
struct ChildState {
  double x;
  double h;
};

/// Result of the one-period minimal-superhedge linear program.
struct NodeLpResult {
  double price = 0.0;            // minimal u
  double xi = 0.0;               // position in the risky asset
  std::vector<int> binding;      // indices of active constraints
};

/// Minimal u such that some xi gives u + xi (x_i - x0) >= h_i for every
/// child. Nodes carry at most a handful of constraints in two unknowns, so
/// the LP is solved exactly by enumerating constraint pairs plus the
/// flat-constraint corner cases; ties go to the smaller |xi|.
NodeLpResult one_step_superhedge(double x0, std::span<const ChildState> children);

/// Time-0 superhedging price plus the full predictable strategy on a
/// trinomial tree. Call claims run on a recombining lattice keyed by integer
/// move counts; path-dependent claims expand the full tree (3^T capped).
struct TreeSolution {
  double price = 0.0;
  int horizon = 0;
  bool recombining = false;

  // Lattice strategies: xi_lattice[t] is a (t+1)x(t+1) grid over
  // (n_down, n_mid) counts, entry n_down * (t+1) + n_mid, giving xi_{t+1}.
  std::vector<std::vector<double>> xi_lattice;
  // Full-tree strategies: xi_tree[t] has 3^t entries indexed by the base-3
  // prefix id (step 1 = most significant digit; digit 0/1/2 = d/m/u).
  std::vector<std::vector<double>> xi_tree;

  /// Strategy xi_{t+1} at the node reached by the first t moves (digits
  /// 0/1/2 for d/m/u).
  double xi_at(int t, std::span<const int> moves) const;
};

TreeSolution superhedge_price_tree(const MarketModelConfig& cfg, const ClaimSpec& claim,
                                   std::size_t path_cap = kDefaultEnumerationCap);

/// Payoffs of a claim over an enumerated batch, in enumeration order.
std::vector<double> claim_values(const ClaimSpec& claim, const PathBatch& batch);

/// Backward induction taking at each node the sup of the child expectation
/// over all one-step martingale measures (closed simplex; the sup is
/// attained at a vertex, i.e. on at most two children). claim_values must
/// hold 3^T per-path values in enumeration order.
double sup_martingale_expectation(const MarketModelConfig& cfg,
                                  std::span<const double> claim_values);

/// min over path sets A with P(A) >= alpha of sup_{P*} E*[H 1_A], by
/// enumerating all 2^(3^T) subsets. Practical only for T <= 2; refuses
/// beyond that and points at the trained estimator instead.
double quantile_price_bruteforce(const MarketModelConfig& cfg, const ClaimSpec& claim,
                                 double alpha);

struct QuantileCurve {
  std::vector<double> alphas;       // ascending, in (0, 1]
  std::vector<double> prices;       // nondecreasing
  double superhedge_price = 0.0;    // value at alpha = 1
};

/// Brute-force quantile prices over an alpha grid. Verifies that the curve
/// is nondecreasing and, when the grid ends at 1, that it matches the
/// superhedging price exactly.
QuantileCurve quantile_curve(const MarketModelConfig& cfg, const ClaimSpec& claim,
                             std::span<const double> alpha_grid);

}  // namespace superhedge
