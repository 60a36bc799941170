#include "superhedge/hedger0.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "superhedge/errors.hpp"
#include "superhedge/rng.hpp"

namespace superhedge {

void HedgePolicy::validate() const {
  if (strategy_nets.empty()) throw ConfigError("policy: no strategy networks");
  if (truncation && !(*truncation > 0.0)) throw ConfigError("policy: truncation must be > 0");
  if (!(lambda > 0.0)) throw ConfigError("policy: lambda must be > 0");
  for (std::size_t k = 0; k < strategy_nets.size(); ++k) {
    strategy_nets[k].validate();
    if (strategy_nets[k].input_dim() != k + 1 || strategy_nets[k].output_dim() != 1) {
      throw ConfigError("policy: strategy net " + std::to_string(k + 1) +
                        " must map R^" + std::to_string(k + 1) + " -> R");
    }
  }
}

void TrainConfig::validate() const {
  if (n_samples < 2) throw ConfigError("train: n_samples must be >= 2");
  if (batch_size < 1 || batch_size > n_samples) {
    throw ConfigError("train: batch_size must lie in [1, n_samples]");
  }
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("train: lr must be > 0");
  if (!(split > 0.0 && split < 1.0)) throw ConfigError("train: split must lie in (0, 1)");
}

std::string EvalReport::csv_header() { return "lambda,price,alpha_hat,n_test,seed"; }

std::string EvalReport::csv_row() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%.6g,%zu,%llu", lambda, price, alpha_hat, n_test,
                static_cast<unsigned long long>(seed));
  return buf;
}

Eigen::MatrixXd history_features(const PathBatch& batch) {
  const auto n = static_cast<Eigen::Index>(batch.n_paths);
  const auto cols = static_cast<Eigen::Index>(batch.n_times);
  const double x0 = batch.price(0, 0);
  Eigen::MatrixXd f(n, cols);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index t = 0; t < cols; ++t) {
      f(p, t) = batch.price(static_cast<std::size_t>(p), static_cast<std::size_t>(t)) / x0 - 1.0;
    }
  }
  return f;
}

namespace {

constexpr std::size_t kHiddenWidth = 30;

Eigen::MatrixXd price_deltas(const PathBatch& batch) {
  const auto n = static_cast<Eigen::Index>(batch.n_paths);
  const auto T = static_cast<Eigen::Index>(batch.horizon());
  Eigen::MatrixXd dx(n, T);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index t = 0; t < T; ++t) {
      dx(p, t) = batch.price(static_cast<std::size_t>(p), static_cast<std::size_t>(t) + 1) -
                 batch.price(static_cast<std::size_t>(p), static_cast<std::size_t>(t));
    }
  }
  return dx;
}

std::vector<double> batch_payoffs(const ClaimSpec& claim, const PathBatch& batch) {
  std::vector<double> h(batch.n_paths);
  for (std::size_t p = 0; p < batch.n_paths; ++p) h[p] = payoff(claim, batch.path(p));
  return h;
}

PathBatch simulate(const MarketModelConfig& cfg, std::size_t n, std::uint64_t seed) {
  return cfg.kind == MarketKind::trinomial ? simulate_trinomial(cfg, n, seed)
                                           : simulate_black_scholes(cfg, n, seed);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return mix64(base ^ mix64(salt + 0x7F4A7C15ULL));
}

}  // namespace

HedgePolicy make_policy(const MarketModelConfig& cfg, double lambda,
                        std::optional<double> truncation, std::uint64_t seed,
                        Activation activation) {
  cfg.validate();
  if (cfg.horizon < 1) throw ConfigError("make_policy: horizon must be >= 1");
  HedgePolicy policy;
  policy.lambda = lambda;
  policy.truncation = truncation;
  for (int k = 1; k <= cfg.horizon; ++k) {
    policy.strategy_nets.push_back(init_truncated_normal(
        {static_cast<std::size_t>(k), kHiddenWidth, kHiddenWidth, 1},
        derive_seed(seed, static_cast<std::uint64_t>(k)), activation));
  }
  policy.validate();
  return policy;
}

HedgePolicy make_warm_policy(const MarketModelConfig& cfg, const ClaimSpec& claim,
                             double lambda, std::optional<double> truncation,
                             std::uint64_t seed, Activation activation) {
  HedgePolicy policy = make_policy(cfg, lambda, truncation, seed, activation);
  const PathBatch pilot = simulate(cfg, 4096, derive_seed(seed, 0x9BADF00DULL));
  const std::vector<double> h = batch_payoffs(claim, pilot);
  double mean = 0.0;
  for (double v : h) mean += v;
  policy.price_param = mean / static_cast<double>(h.size());
  return policy;
}

std::vector<double> portfolio_terminal(const HedgePolicy& policy, const PathBatch& batch) {
  policy.validate();
  if (static_cast<std::size_t>(policy.horizon()) != batch.horizon()) {
    throw ConfigError("portfolio_terminal: policy and batch horizons differ");
  }
  const Eigen::MatrixXd feats = history_features(batch);
  const Eigen::MatrixXd dx = price_deltas(batch);
  const auto n = static_cast<Eigen::Index>(batch.n_paths);

  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, policy.price_param);
  for (int k = 1; k <= policy.horizon(); ++k) {
    Eigen::MatrixXd out = forward_batch(policy.strategy_nets[k - 1], feats.leftCols(k));
    if (policy.truncation) {
      const double c = *policy.truncation;
      out = out.cwiseMax(-c).cwiseMin(c);
    }
    v.array() += out.col(0).array() * dx.col(k - 1).array();
  }
  return {v.data(), v.data() + v.size()};
}

double loss_lambda(const HedgePolicy& policy, const PathBatch& batch, const ClaimSpec& claim) {
  if (batch.n_paths == 0) throw ConfigError("loss_lambda: empty batch");
  const std::vector<double> v = portfolio_terminal(policy, batch);
  const std::vector<double> h = batch_payoffs(claim, batch);
  double acc = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double shortfall = std::max(h[j] - v[j], 0.0);
    acc += shortfall * shortfall;
  }
  return policy.price_param * policy.price_param +
         policy.lambda * acc / static_cast<double>(v.size());
}

namespace {

struct EvalOutcome {
  double alpha_hat = 0.0;
  std::vector<double> performance;  // V_T - H per path
};

EvalOutcome evaluate(const HedgePolicy& policy, const ClaimSpec& claim,
                     const PathBatch& batch) {
  const std::vector<double> v = portfolio_terminal(policy, batch);
  const std::vector<double> h = batch_payoffs(claim, batch);
  EvalOutcome out;
  out.performance.resize(v.size());
  std::size_t wins = 0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out.performance[j] = v[j] - h[j];
    if (out.performance[j] >= 0.0) ++wins;  // zero shortfall counts as hedged
  }
  out.alpha_hat = static_cast<double>(wins) / static_cast<double>(v.size());
  return out;
}

}  // namespace

std::pair<HedgePolicy, EvalReport> train_t0(const MarketModelConfig& cfg,
                                            const ClaimSpec& claim, HedgePolicy policy,
                                            const TrainConfig& train_cfg) {
  cfg.validate();
  claim.validate();
  train_cfg.validate();
  policy.validate();

  const int T = policy.horizon();
  if (cfg.horizon != T) throw ConfigError("train_t0: policy horizon != market horizon");

  const std::size_t n_train =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::floor(train_cfg.split *
                                              static_cast<double>(train_cfg.n_samples))));
  const std::size_t iters_per_epoch = std::max<std::size_t>(1, n_train / train_cfg.batch_size);
  const std::size_t total_iters = iters_per_epoch * static_cast<std::size_t>(train_cfg.epochs);

  std::vector<AdamState> net_states;
  net_states.reserve(policy.strategy_nets.size());
  for (const Network& net : policy.strategy_nets) {
    net_states.push_back(AdamState::for_network(net, train_cfg.lr));
  }
  AdamState price_state = AdamState::for_scalar(train_cfg.lr);

  std::vector<ForwardCache> caches(policy.strategy_nets.size());
  const double lambda = policy.lambda;

  for (std::size_t iter = 0; iter < total_iters; ++iter) {
    const PathBatch batch =
        simulate(cfg, train_cfg.batch_size, derive_seed(train_cfg.seed, iter + 1));
    const Eigen::MatrixXd feats = history_features(batch);
    const Eigen::MatrixXd dx = price_deltas(batch);
    const std::vector<double> h = batch_payoffs(claim, batch);
    const auto n = static_cast<Eigen::Index>(batch.n_paths);
    const double inv_n = 1.0 / static_cast<double>(n);

    // Forward pass of every strategy net, keeping caches and raw outputs.
    std::vector<Eigen::MatrixXd> raw(policy.strategy_nets.size());
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, policy.price_param);
    for (int k = 1; k <= T; ++k) {
      raw[k - 1] =
          forward_batch_cached(policy.strategy_nets[k - 1], feats.leftCols(k), caches[k - 1]);
      Eigen::ArrayXd pos = raw[k - 1].col(0).array();
      if (policy.truncation) {
        const double c = *policy.truncation;
        pos = pos.max(-c).min(c);
      }
      v.array() += pos * dx.col(k - 1).array();
    }

    // Loss and dL/dV per sample.
    double shortfall_sq = 0.0;
    Eigen::VectorXd dv(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = std::max(h[static_cast<std::size_t>(j)] - v(j), 0.0);
      shortfall_sq += r * r;
      dv(j) = -2.0 * lambda * r * inv_n;
    }
    const double loss =
        policy.price_param * policy.price_param + lambda * shortfall_sq * inv_n;
    if (!std::isfinite(loss)) {
      throw TrainingError("train_t0: non-finite loss at iteration " + std::to_string(iter));
    }

    const double dtheta = 2.0 * policy.price_param + dv.sum();
    for (int k = 1; k <= T; ++k) {
      Eigen::MatrixXd upstream(n, 1);
      if (policy.truncation) {
        const double c = *policy.truncation;
        for (Eigen::Index j = 0; j < n; ++j) {
          upstream(j, 0) = dv(j) * dx(j, k - 1) * truncate_slope(raw[k - 1](j, 0), c);
        }
      } else {
        upstream.col(0) = dv.cwiseProduct(dx.col(k - 1));
      }
      const NetGradients grads =
          backward_batch(policy.strategy_nets[k - 1], feats.leftCols(k), caches[k - 1], upstream);
      adam_step(net_states[k - 1], policy.strategy_nets[k - 1], grads);
    }
    adam_step(price_state, policy.price_param, dtheta);
  }

  // Held-out report on the test share of the evaluation pool.
  const PathBatch pool = simulate(cfg, train_cfg.n_samples, train_cfg.seed);
  PathBatch test;
  test.n_paths = train_cfg.n_samples - n_train;
  test.n_times = pool.n_times;
  test.n_assets = pool.n_assets;
  test.seed = pool.seed;
  test.prices.assign(
      pool.prices.begin() + static_cast<std::ptrdiff_t>(n_train * pool.n_times * pool.n_assets),
      pool.prices.end());

  const EvalOutcome eval = evaluate(policy, claim, test);
  EvalReport report;
  report.lambda = lambda;
  report.price = policy.price_param;
  report.alpha_hat = eval.alpha_hat;
  report.loss_samples = eval.performance;
  report.n_test = test.n_paths;
  report.seed = train_cfg.seed;
  return {std::move(policy), std::move(report)};
}

std::vector<EvalReport> sweep_lambda(const MarketModelConfig& cfg, const ClaimSpec& claim,
                                     std::span<const double> lambdas,
                                     const TrainConfig& train_cfg) {
  if (lambdas.empty()) throw ConfigError("sweep_lambda: empty lambda grid");
  std::vector<double> grid(lambdas.begin(), lambdas.end());
  std::sort(grid.begin(), grid.end());

  std::vector<EvalReport> reports;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    TrainConfig tc = train_cfg;
    tc.seed = derive_seed(train_cfg.seed, 0xC0FFEEULL + i);
    HedgePolicy init =
        make_warm_policy(cfg, claim, grid[i], std::nullopt, derive_seed(tc.seed, 17));
    auto [policy, report] = train_t0(cfg, claim, std::move(init), tc);
    reports.push_back(std::move(report));
  }
  return reports;
}

namespace {
constexpr char kPolicyMagic[8] = {'S', 'H', 'P', 'O', 'L', '0', '0', '1'};

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("policy checkpoint: truncated stream");
  return v;
}
}  // namespace

void save_policy(const HedgePolicy& policy, const std::filesystem::path& path) {
  policy.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kPolicyMagic, sizeof(kPolicyMagic));
  write_pod<double>(os, policy.price_param);
  write_pod<std::uint8_t>(os, policy.truncation ? 1 : 0);
  write_pod<double>(os, policy.truncation.value_or(0.0));
  write_pod<double>(os, policy.lambda);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(policy.strategy_nets.size()));
  for (const Network& net : policy.strategy_nets) save_network(net, os);
  if (!os) throw std::runtime_error("policy checkpoint: write failure");
}

HedgePolicy load_policy(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kPolicyMagic, sizeof(kPolicyMagic)) != 0) {
    throw std::runtime_error("policy checkpoint: bad magic");
  }
  HedgePolicy policy;
  policy.price_param = read_pod<double>(is);
  const auto has_c = read_pod<std::uint8_t>(is);
  const double c = read_pod<double>(is);
  if (has_c) policy.truncation = c;
  policy.lambda = read_pod<double>(is);
  const auto T = read_pod<std::uint32_t>(is);
  for (std::uint32_t k = 0; k < T; ++k) policy.strategy_nets.push_back(load_network(is));
  policy.validate();
  return policy;
}

}  // namespace superhedge
