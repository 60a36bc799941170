#include "superhedge/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "superhedge/errors.hpp"
#include "superhedge/rng.hpp"

namespace superhedge {

namespace {

double activate(Activation act, double z) {
  switch (act) {
    case Activation::tanh:
      return std::tanh(z);
    case Activation::sigmoid:
      return 1.0 / (1.0 + std::exp(-z));
    case Activation::swish:
      return z / (1.0 + std::exp(-z));
  }
  return z;
}

double activate_slope(Activation act, double z) {
  switch (act) {
    case Activation::tanh: {
      const double a = std::tanh(z);
      return 1.0 - a * a;
    }
    case Activation::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Activation::swish: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 + z * (1.0 - s));
    }
  }
  return 1.0;
}

}  // namespace

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size()) + static_cast<std::size_t>(biases[l].size());
  }
  return n;
}

void Network::validate() const {
  if (layer_dims.size() < 2) throw ConfigError("network: need at least input and output dims");
  if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size()) {
    throw ConfigError("network: layer count mismatch");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != static_cast<Eigen::Index>(layer_dims[l + 1]) ||
        weights[l].cols() != static_cast<Eigen::Index>(layer_dims[l]) ||
        biases[l].size() != static_cast<Eigen::Index>(layer_dims[l + 1])) {
      throw ConfigError("network: weight shape mismatch at layer " + std::to_string(l + 1));
    }
  }
}

Network init_truncated_normal(const std::vector<std::size_t>& dims, std::uint64_t seed,
                              Activation activation) {
  if (dims.size() < 2) throw ConfigError("init_truncated_normal: need at least 2 dims");
  Network net;
  net.layer_dims = dims;
  net.activation = activation;
  CounterRng rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(dims[l + 1]);
    const auto cols = static_cast<Eigen::Index>(dims[l]);
    Eigen::MatrixXd w(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        double z = rng.normal();
        while (std::abs(z) > 2.0) z = rng.normal();
        w(i, j) = z * scale;
      }
    }
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(Eigen::VectorXd::Zero(rows));
  }
  return net;
}

Eigen::MatrixXd forward_batch(const Network& net, const Eigen::MatrixXd& X) {
  ForwardCache cache;
  return forward_batch_cached(net, X, cache);
}

Eigen::MatrixXd forward_batch_cached(const Network& net, const Eigen::MatrixXd& X,
                                     ForwardCache& cache) {
  net.validate();
  if (X.cols() != static_cast<Eigen::Index>(net.input_dim())) {
    throw ConfigError("forward: input dim mismatch");
  }
  const std::size_t L = net.n_layers();
  cache.pre.assign(L, {});
  cache.act.assign(L > 0 ? L - 1 : 0, {});

  Eigen::MatrixXd a = X;
  for (std::size_t l = 0; l < L; ++l) {
    Eigen::MatrixXd z = a * net.weights[l].transpose();
    z.rowwise() += net.biases[l].transpose();
    cache.pre[l] = z;
    if (l + 1 < L) {
      cache.act[l] = z.unaryExpr([&](double v) { return activate(net.activation, v); });
      a = cache.act[l];
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd out = forward_batch(net, x.transpose());
  return out.row(0).transpose();
}

void NetGradients::add(const NetGradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
}

NetGradients zero_gradients(const Network& net) {
  NetGradients g;
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    g.weights.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.biases.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return g;
}

NetGradients backward_batch(const Network& net, const Eigen::MatrixXd& X,
                            const ForwardCache& cache, const Eigen::MatrixXd& upstream) {
  const std::size_t L = net.n_layers();
  if (upstream.rows() != X.rows() ||
      upstream.cols() != static_cast<Eigen::Index>(net.output_dim())) {
    throw ConfigError("backward: upstream shape mismatch");
  }

  NetGradients g;
  g.weights.resize(L);
  g.biases.resize(L);

  Eigen::MatrixXd delta = upstream;
  for (std::size_t l = L; l-- > 0;) {
    const Eigen::MatrixXd& below = (l == 0) ? X : cache.act[l - 1];
    g.weights[l] = delta.transpose() * below;
    g.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd slope =
          cache.pre[l - 1].unaryExpr([&](double v) { return activate_slope(net.activation, v); });
      delta = (delta * net.weights[l]).cwiseProduct(slope);
    } else {
      g.input = delta * net.weights[0];
    }
  }
  return g;
}

NetGradients backward(const Network& net, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& upstream) {
  ForwardCache cache;
  const Eigen::MatrixXd X = x.transpose();
  forward_batch_cached(net, X, cache);
  return backward_batch(net, X, cache, upstream.transpose());
}

double truncate(double y, double C) {
  if (!(C > 0.0)) throw ConfigError("truncate: C must be > 0");
  return std::min(C, std::max(-C, y));
}

Eigen::VectorXd truncate(const Eigen::VectorXd& y, double C) {
  if (!(C > 0.0)) throw ConfigError("truncate: C must be > 0");
  return y.cwiseMax(-C).cwiseMin(C);
}

double truncate_slope(double y, double C) {
  return (y >= -C && y <= C) ? 1.0 : 0.0;
}

AdamState AdamState::for_network(const Network& net, double lr) {
  AdamState s;
  s.lr = lr;
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    s.m_w.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    s.v_w.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    s.m_b.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    s.v_b.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return s;
}

AdamState AdamState::for_scalar(double lr) {
  AdamState s;
  s.lr = lr;
  return s;
}

namespace {

void adam_update(AdamState& s, double corr1, double corr2, double* p, const double* g,
                 double* m, double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double m_hat = m[i] / corr1;
    const double v_hat = v[i] / corr2;
    p[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

}  // namespace

void adam_step(AdamState& state, Network& net, const NetGradients& grads) {
  ++state.step_count;
  const double corr1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double corr2 = 1.0 - std::pow(state.beta2, state.step_count);
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    adam_update(state, corr1, corr2, net.weights[l].data(), grads.weights[l].data(),
                state.m_w[l].data(), state.v_w[l].data(),
                static_cast<std::size_t>(net.weights[l].size()));
    adam_update(state, corr1, corr2, net.biases[l].data(), grads.biases[l].data(),
                state.m_b[l].data(), state.v_b[l].data(),
                static_cast<std::size_t>(net.biases[l].size()));
  }
}

void adam_step(AdamState& state, double& param, double grad) {
  ++state.step_count;
  const double corr1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double corr2 = 1.0 - std::pow(state.beta2, state.step_count);
  adam_update(state, corr1, corr2, &param, &grad, &state.m_s, &state.v_s, 1);
}

namespace {

constexpr char kMagic[8] = {'S', 'H', 'N', 'N', 'E', 'T', '0', '1'};

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("network checkpoint: truncated stream");
  return v;
}

}  // namespace

void save_network(const Network& net, std::ostream& os) {
  net.validate();
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.activation));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.layer_dims.size()));
  for (std::size_t d : net.layer_dims) write_pod<std::uint64_t>(os, d);
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    const auto& w = net.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) write_pod<double>(os, w(i, j));
    }
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) {
      write_pod<double>(os, net.biases[l](i));
    }
  }
  if (!os) throw std::runtime_error("network checkpoint: write failure");
}

Network load_network(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("network checkpoint: bad magic");
  }
  Network net;
  const auto act = read_pod<std::uint32_t>(is);
  if (act > 2) throw std::runtime_error("network checkpoint: unknown activation");
  net.activation = static_cast<Activation>(act);
  const auto n_dims = read_pod<std::uint32_t>(is);
  if (n_dims < 2 || n_dims > 64) throw std::runtime_error("network checkpoint: bad dims");
  for (std::uint32_t i = 0; i < n_dims; ++i) {
    net.layer_dims.push_back(static_cast<std::size_t>(read_pod<std::uint64_t>(is)));
  }
  for (std::size_t l = 0; l + 1 < net.layer_dims.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(net.layer_dims[l + 1]);
    const auto cols = static_cast<Eigen::Index>(net.layer_dims[l]);
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = read_pod<double>(is);
    }
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) b(i) = read_pod<double>(is);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  net.validate();
  return net;
}

void save_network(const Network& net, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_network(net, os);
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return load_network(is);
}

}  // namespace superhedge
