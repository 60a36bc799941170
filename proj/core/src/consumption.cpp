#include "superhedge/consumption.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superhedge/errors.hpp"
#include "superhedge/rng.hpp"

namespace superhedge {

void ConsumptionNets::validate() const {
  if (nets.empty()) throw ConfigError("consumption: no networks");
  if (!(beta > 0.0)) throw ConfigError("consumption: beta must be > 0");
  for (std::size_t t = 0; t < nets.size(); ++t) {
    nets[t].validate();
    if (nets[t].input_dim() != t + 2 || nets[t].output_dim() != 1) {
      throw ConfigError("consumption: net for t=" + std::to_string(t + 1) +
                        " must map R^" + std::to_string(t + 2) + " -> R");
    }
  }
}

std::vector<double> gains_minus_claim(const HedgePolicy& base_policy, const PathBatch& batch,
                                      const ClaimSpec& claim) {
  std::vector<double> g = portfolio_terminal(base_policy, batch);
  for (std::size_t p = 0; p < batch.n_paths; ++p) g[p] -= payoff(claim, batch.path(p));
  return g;
}

std::vector<double> consumption_path(const ConsumptionNets& nets, std::span<const double> path) {
  nets.validate();
  if (path.size() != static_cast<std::size_t>(nets.horizon()) + 1) {
    throw ConfigError("consumption_path: path length must be T + 1");
  }
  const double x0 = path[0];
  std::vector<double> b(path.size());
  b[0] = 0.0;
  Eigen::VectorXd feat(path.size());
  for (std::size_t t = 0; t < path.size(); ++t) feat(static_cast<Eigen::Index>(t)) = path[t] / x0 - 1.0;
  for (int t = 1; t <= nets.horizon(); ++t) {
    const Eigen::VectorXd out = forward(nets.nets[t - 1], feat.head(t + 1));
    b[static_cast<std::size_t>(t)] = std::max(out(0), b[static_cast<std::size_t>(t) - 1]);
  }
  return b;
}

Eigen::MatrixXd consumption_batch(const ConsumptionNets& nets, const PathBatch& batch) {
  nets.validate();
  if (batch.horizon() != static_cast<std::size_t>(nets.horizon())) {
    throw ConfigError("consumption_batch: horizon mismatch");
  }
  const Eigen::MatrixXd feats = history_features(batch);
  const auto n = static_cast<Eigen::Index>(batch.n_paths);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, nets.horizon() + 1);
  for (int t = 1; t <= nets.horizon(); ++t) {
    const Eigen::MatrixXd out = forward_batch(nets.nets[t - 1], feats.leftCols(t + 1));
    b.col(t) = out.col(0).cwiseMax(b.col(t - 1));
  }
  return b;
}

double loss_consumption_t(const Network& net_t, double beta, const PathBatch& batch,
                          std::span<const double> G, std::span<const double> B_prev) {
  if (!(beta > 0.0)) throw ConfigError("loss_consumption_t: beta must be > 0");
  if (G.size() != batch.n_paths || B_prev.size() != batch.n_paths) {
    throw ConfigError("loss_consumption_t: size mismatch");
  }
  const Eigen::MatrixXd feats = history_features(batch);
  const Eigen::MatrixXd out =
      forward_batch(net_t, feats.leftCols(static_cast<Eigen::Index>(net_t.input_dim())));
  double acc = 0.0;
  for (std::size_t j = 0; j < batch.n_paths; ++j) {
    const double b_t = std::max(out(static_cast<Eigen::Index>(j), 0), B_prev[j]);
    acc += -b_t * b_t + beta * std::max(b_t - G[j], 0.0);
  }
  return acc / static_cast<double>(batch.n_paths);
}

namespace {

constexpr std::size_t kHiddenWidth = 30;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return mix64(base ^ mix64(salt + 0x51D5A1ULL));
}

PathBatch simulate(const MarketModelConfig& cfg, std::size_t n, std::uint64_t seed) {
  return cfg.kind == MarketKind::trinomial ? simulate_trinomial(cfg, n, seed)
                                           : simulate_black_scholes(cfg, n, seed);
}

}  // namespace

ConsumptionNets train_consumption(const MarketModelConfig& cfg, const ClaimSpec& claim,
                                  const HedgePolicy& base_policy, double beta,
                                  const TrainConfig& train_cfg) {
  cfg.validate();
  claim.validate();
  base_policy.validate();
  train_cfg.validate();
  if (!(beta > 0.0)) {
    throw ConfigError(
        "train_consumption: beta must be > 0; with beta = 0 the loss decreases "
        "monotonically in B and training diverges");
  }
  const int T = base_policy.horizon();
  if (cfg.horizon != T) throw ConfigError("train_consumption: horizon mismatch");

  ConsumptionNets result;
  result.beta = beta;

  const std::size_t n_train =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                   train_cfg.split * static_cast<double>(train_cfg.n_samples))));
  const std::size_t iters_per_epoch = std::max<std::size_t>(1, n_train / train_cfg.batch_size);
  const std::size_t total_iters = iters_per_epoch * static_cast<std::size_t>(train_cfg.epochs);

  for (int t = 1; t <= T; ++t) {
    Network net = init_truncated_normal(
        {static_cast<std::size_t>(t) + 1, kHiddenWidth, kHiddenWidth, 1},
        derive_seed(train_cfg.seed, 0xB000ULL + static_cast<std::uint64_t>(t)),
        base_policy.strategy_nets.front().activation);
    AdamState state = AdamState::for_network(net, train_cfg.lr);
    ForwardCache cache;

    for (std::size_t iter = 0; iter < total_iters; ++iter) {
      const PathBatch batch = simulate(
          cfg, train_cfg.batch_size,
          derive_seed(train_cfg.seed, (static_cast<std::uint64_t>(t) << 32) + iter + 1));
      const Eigen::MatrixXd feats = history_features(batch);
      const std::vector<double> g = gains_minus_claim(base_policy, batch, claim);
      const auto n = static_cast<Eigen::Index>(batch.n_paths);
      const double inv_n = 1.0 / static_cast<double>(n);

      // Frozen prefix of the recursion.
      Eigen::VectorXd b_prev = Eigen::VectorXd::Zero(n);
      for (int s = 1; s < t; ++s) {
        const Eigen::MatrixXd out = forward_batch(result.nets[s - 1], feats.leftCols(s + 1));
        b_prev = out.col(0).cwiseMax(b_prev);
      }

      const Eigen::MatrixXd out = forward_batch_cached(net, feats.leftCols(t + 1), cache);
      double loss = 0.0;
      Eigen::MatrixXd upstream(n, 1);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double f = out(j, 0);
        const double b_t = std::max(f, b_prev(j));
        const double excess = b_t - g[static_cast<std::size_t>(j)];
        loss += (-b_t * b_t + beta * std::max(excess, 0.0)) * inv_n;
        // max(f, b_prev) propagates to the net on [f >= b_prev] (ties to the
        // net branch); the hinge contributes beta on strict excess.
        const double through = f >= b_prev(j) ? 1.0 : 0.0;
        upstream(j, 0) = through * (-2.0 * b_t + (excess > 0.0 ? beta : 0.0)) * inv_n;
      }
      if (!std::isfinite(loss)) {
        throw TrainingError("train_consumption: non-finite loss at t=" + std::to_string(t) +
                            " iteration " + std::to_string(iter));
      }
      const NetGradients grads = backward_batch(net, feats.leftCols(t + 1), cache, upstream);
      adam_step(state, net, grads);
    }
    result.nets.push_back(std::move(net));
  }

  // Feasibility on the held-out share of the evaluation pool.
  const PathBatch pool = simulate(cfg, train_cfg.n_samples, train_cfg.seed);
  PathBatch test;
  test.n_paths = train_cfg.n_samples - n_train;
  test.n_times = pool.n_times;
  test.n_assets = pool.n_assets;
  test.seed = pool.seed;
  test.prices.assign(
      pool.prices.begin() + static_cast<std::ptrdiff_t>(n_train * pool.n_times * pool.n_assets),
      pool.prices.end());

  const Eigen::MatrixXd b = consumption_batch(result, test);
  const std::vector<double> g = gains_minus_claim(base_policy, test, claim);
  std::size_t ok = 0;
  for (std::size_t j = 0; j < test.n_paths; ++j) {
    if (b(static_cast<Eigen::Index>(j), T) <= g[j] + result.feasibility_slack) ++ok;
  }
  result.feasibility_rate = static_cast<double>(ok) / static_cast<double>(test.n_paths);
  return result;
}

PriceProcessSample price_process(const HedgePolicy& base_policy, const ConsumptionNets& nets,
                                 const PathBatch& batch) {
  base_policy.validate();
  nets.validate();
  if (batch.horizon() != static_cast<std::size_t>(base_policy.horizon()) ||
      base_policy.horizon() != nets.horizon()) {
    throw ConfigError("price_process: horizon mismatch");
  }
  const int T = base_policy.horizon();
  const Eigen::MatrixXd feats = history_features(batch);
  const auto n = static_cast<Eigen::Index>(batch.n_paths);

  PriceProcessSample sample;
  sample.gains = Eigen::MatrixXd::Zero(n, T + 1);
  for (int k = 1; k <= T; ++k) {
    Eigen::MatrixXd out = forward_batch(base_policy.strategy_nets[k - 1], feats.leftCols(k));
    if (base_policy.truncation) {
      const double c = *base_policy.truncation;
      out = out.cwiseMax(-c).cwiseMin(c);
    }
    Eigen::VectorXd dx(n);
    for (Eigen::Index p = 0; p < n; ++p) {
      dx(p) = batch.price(static_cast<std::size_t>(p), static_cast<std::size_t>(k)) -
              batch.price(static_cast<std::size_t>(p), static_cast<std::size_t>(k) - 1);
    }
    sample.gains.col(k) = sample.gains.col(k - 1) + out.col(0).cwiseProduct(dx);
  }
  sample.B = consumption_batch(nets, batch);
  sample.U = (sample.gains - sample.B).array() + base_policy.price_param;
  return sample;
}

}  // namespace superhedge
