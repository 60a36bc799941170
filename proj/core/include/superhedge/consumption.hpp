#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "superhedge/hedger0.hpp"

namespace superhedge {

/// Per-time networks defining the approximate consumption process through
/// the running-max recursion B_0 = 0, B_t = max(F_t(Y_0..Y_t), B_{t-1}),
/// which keeps B nondecreasing pathwise by construction.
struct ConsumptionNets {
  std::vector<Network> nets;  // t = 1..T; net t has input dim t + 1
  double beta = 500.0;
  double feasibility_slack = 0.01;
  double feasibility_rate = 0.0;  // achieved P(B_T <= G + slack) on the test pool

  int horizon() const { return static_cast<int>(nets.size()); }
  void validate() const;
};

/// Terminal portfolio surplus per path: portfolio_terminal - H.
std::vector<double> gains_minus_claim(const HedgePolicy& base_policy, const PathBatch& batch,
                                      const ClaimSpec& claim);

/// B_0..B_T along a single price path.
std::vector<double> consumption_path(const ConsumptionNets& nets, std::span<const double> path);

/// Batched consumption: row p holds B_0..B_T of path p.
Eigen::MatrixXd consumption_batch(const ConsumptionNets& nets, const PathBatch& batch);

/// Empirical loss (1/N) sum_j [ -|B_t,j|^2 + beta max(B_t,j - G_j, 0) ]
/// with B_t,j = max(net_t(Y_t), B_prev,j).
double loss_consumption_t(const Network& net_t, double beta, const PathBatch& batch,
                          std::span<const double> G, std::span<const double> B_prev);

/// Trains the nets forward in t (earlier nets frozen, each by Adam on fresh
/// batches) and reports the achieved feasibility rate on the held-out pool.
ConsumptionNets train_consumption(const MarketModelConfig& cfg, const ClaimSpec& claim,
                                  const HedgePolicy& base_policy, double beta,
                                  const TrainConfig& train_cfg);

/// Per-path trajectories of the price process U_t = theta_u + gains_t - B_t,
/// the consumption B_t and the gains process.
struct PriceProcessSample {
  Eigen::MatrixXd U;      // [n, T+1]
  Eigen::MatrixXd B;      // [n, T+1]
  Eigen::MatrixXd gains;  // [n, T+1], gains_t = sum_{k<=t} xi_k (X_k - X_{k-1})
};

PriceProcessSample price_process(const HedgePolicy& base_policy, const ConsumptionNets& nets,
                                 const PathBatch& batch);

}  // namespace superhedge
