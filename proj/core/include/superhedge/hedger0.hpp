#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "superhedge/claims.hpp"
#include "superhedge/market.hpp"
#include "superhedge/nn.hpp"

namespace superhedge {

/// Time-0 hedging policy: a bare trainable scalar for the price (the time-0
/// sigma-algebra is trivial, so a network evaluated at the constant history
/// would add nothing) plus one strategy network per trading step. Network k
/// reads the observed history (X_0..X_{k-1}) as x/X_0 - 1 features.
struct HedgePolicy {
  double price_param = 0.0;             // theta_u
  std::vector<Network> strategy_nets;   // k = 1..T; net k has input dim k
  std::optional<double> truncation;     // C; outputs clamped to [-C, C] when set
  double lambda = 1.0;

  int horizon() const { return static_cast<int>(strategy_nets.size()); }
  void validate() const;
};

struct TrainConfig {
  std::size_t n_samples = 200000;  // evaluation pool; split but not iterated over
  std::size_t batch_size = 1024;
  int epochs = 10;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double split = 0.7;  // train fraction of the pool

  void validate() const;
};

struct EvalReport {
  double lambda = 0.0;
  double price = 0.0;
  double alpha_hat = 0.0;             // empirical superhedging probability
  std::vector<double> loss_samples;   // per-path V_T - H on the test set
  std::size_t n_test = 0;
  std::uint64_t seed = 0;

  static std::string csv_header();  // lambda,price,alpha_hat,n_test,seed
  std::string csv_row() const;
};

/// Feature matrix [n, T+1]: X_t / X_0 - 1 for t = 0..T.
Eigen::MatrixXd history_features(const PathBatch& batch);

/// Fresh policy for the given market: strategy nets of shape
/// {k, 30, 30, 1}, price parameter zero.
HedgePolicy make_policy(const MarketModelConfig& cfg, double lambda,
                        std::optional<double> truncation, std::uint64_t seed,
                        Activation activation = Activation::swish);

/// Same, with the price parameter warm-started at the mean payoff of a pilot
/// batch. Adam moves a parameter by about lr per step, so starting theta_u
/// at zero cannot reach realistic price levels within a desk-scale
/// iteration budget.
HedgePolicy make_warm_policy(const MarketModelConfig& cfg, const ClaimSpec& claim,
                             double lambda, std::optional<double> truncation,
                             std::uint64_t seed, Activation activation = Activation::swish);

/// theta_u + sum_k trunc(F_k(Y_{k-1})) (X_k - X_{k-1}) per path.
std::vector<double> portfolio_terminal(const HedgePolicy& policy, const PathBatch& batch);

/// |theta_u|^2 + (lambda / N) sum_j (max(H_j - V_j, 0))^2.
double loss_lambda(const HedgePolicy& policy, const PathBatch& batch, const ClaimSpec& claim);

/// Minibatch Adam on the loss above, resampling a fresh simulated batch
/// every iteration; the pre-generated pool only sizes the epochs and
/// provides the held-out test set for the report.
std::pair<HedgePolicy, EvalReport> train_t0(const MarketModelConfig& cfg,
                                            const ClaimSpec& claim, HedgePolicy policy,
                                            const TrainConfig& train_cfg);

/// Independent train_t0 runs over the lambda grid (fresh derived seeds),
/// reports sorted by lambda.
std::vector<EvalReport> sweep_lambda(const MarketModelConfig& cfg, const ClaimSpec& claim,
                                     std::span<const double> lambdas,
                                     const TrainConfig& train_cfg);

/// Policy checkpoint, little-endian:
///   bytes 0..7  magic "SHPOL001"
///   f64 theta_u, u8 has_truncation, f64 truncation, f64 lambda, u32 T
///   T network records in the nn checkpoint layout
void save_policy(const HedgePolicy& policy, const std::filesystem::path& path);
HedgePolicy load_policy(const std::filesystem::path& path);

}  // namespace superhedge
