#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace superhedge {

enum class Activation { tanh, sigmoid, swish };

/// Feedforward network: affine layers with a componentwise activation on
/// layers 1..L-1 and an affine final layer.
struct Network {
  std::vector<std::size_t> layer_dims;   // N_0 .. N_L
  std::vector<Eigen::MatrixXd> weights;  // A^l is N_l x N_{l-1}
  std::vector<Eigen::VectorXd> biases;   // b^l is N_l
  Activation activation = Activation::swish;

  std::size_t n_layers() const { return weights.size(); }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  std::size_t parameter_count() const;
  void validate() const;
};

/// Weights i.i.d. truncated standard normal (redraw while |z| > 2) scaled by
/// 1 / sqrt(fan_in); biases zero. Draw order is layer-major, row-major, so
/// (dims, seed) fully determines the result.
Network init_truncated_normal(const std::vector<std::size_t>& dims, std::uint64_t seed,
                              Activation activation = Activation::swish);

Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x);

/// Batched forward; rows are samples.
Eigen::MatrixXd forward_batch(const Network& net, const Eigen::MatrixXd& X);

/// Layer values kept for backpropagation.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;  // Z_l, l = 1..L
  std::vector<Eigen::MatrixXd> act;  // A_l, l = 1..L-1 (hidden activations)
};

Eigen::MatrixXd forward_batch_cached(const Network& net, const Eigen::MatrixXd& X,
                                     ForwardCache& cache);

struct NetGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd input;  // gradient w.r.t. the network input, one row per sample

  void add(const NetGradients& other);
};

NetGradients zero_gradients(const Network& net);

/// Exact reverse-mode gradients of upstream . F(x) w.r.t. every weight,
/// bias and the input.
NetGradients backward(const Network& net, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& upstream);

/// Batched form; upstream has one row per sample, weight/bias gradients are
/// summed over the batch in fixed row order.
NetGradients backward_batch(const Network& net, const Eigen::MatrixXd& X,
                            const ForwardCache& cache, const Eigen::MatrixXd& upstream);

/// Componentwise clamp of y to [-C, C].
double truncate(double y, double C);
Eigen::VectorXd truncate(const Eigen::VectorXd& y, double C);

/// Subgradient of the clamp: 1 on [-C, C] including both endpoints, else 0.
double truncate_slope(double y, double C);

/// Adam moments for one parameter set (a network or a bare scalar).
/// beta1 = 0.9, beta2 = 0.999, eps = 1e-8; moments start at zero.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step_count = 0;
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  double m_s = 0.0, v_s = 0.0;

  static AdamState for_network(const Network& net, double lr);
  static AdamState for_scalar(double lr);
};

/// One bias-corrected Adam update of a network in place.
void adam_step(AdamState& state, Network& net, const NetGradients& grads);

/// One bias-corrected Adam update of a bare scalar parameter in place.
void adam_step(AdamState& state, double& param, double grad);

/// Binary checkpoint, little-endian:
///   bytes 0..7  magic "SHNNET01"
///   u32         activation (0 tanh, 1 sigmoid, 2 swish)
///   u32         number of dims (L + 1)
///   u64 * dims  layer dims N_0..N_L
///   per layer   A^l row-major float64, then b^l float64
void save_network(const Network& net, std::ostream& os);
Network load_network(std::istream& is);
void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

}  // namespace superhedge
