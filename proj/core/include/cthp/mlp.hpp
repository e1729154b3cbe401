#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace cthp {

/// Fully connected network with tanh hidden activations and an affine output
/// layer. The input is a single scalar (normalized time); alongside plain
/// evaluation the network propagates d(output)/d(input) exactly, and the
/// reverse pass differentiates losses that consume both the outputs and
/// their input-derivatives.
struct Mlp {
  std::vector<int> layer_sizes;            // [N0, N1, ..., NL], N0 == 1
  std::vector<Eigen::MatrixXd> weights;    // weights[l]: N_{l+1} x N_l
  std::vector<Eigen::VectorXd> biases;     // biases[l]: N_{l+1}

  std::size_t parameter_count() const;
  int output_size() const { return layer_sizes.back(); }

  /// Copies all weights and biases into one flat vector (layer by layer,
  /// row-major weights then bias), or back. Adam operates on this packing.
  Eigen::VectorXd to_flat() const;
  void from_flat(const Eigen::VectorXd& flat);
};

/// Network outputs together with their derivatives w.r.t. the scalar input.
/// Columns index batch samples, rows index output channels.
struct DualOutput {
  Eigen::MatrixXd value;
  Eigen::MatrixXd dvalue_dt;
};

/// Activations recorded by forward_with_input_derivative for the reverse
/// pass: per layer the value, its input-tangent, and the pre-activation
/// tangent of hidden layers.
struct ForwardTape {
  std::vector<Eigen::MatrixXd> x;     // x[l]: activations of layer l (x[0] = input row)
  std::vector<Eigen::MatrixXd> xdot;  // d x[l] / d input
  std::vector<Eigen::MatrixXd> zdot;  // pre-activation tangents of hidden layers
};

/// Gradient of a scalar loss w.r.t. every weight and bias.
struct MlpGrad {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd to_flat() const;
};

Mlp init_weights(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Batched forward pass; ts is a row of scalar inputs.
Eigen::MatrixXd forward(const Mlp& net, const Eigen::RowVectorXd& ts);
Eigen::VectorXd forward(const Mlp& net, double t);

DualOutput forward_with_input_derivative(const Mlp& net,
                                         const Eigen::RowVectorXd& ts,
                                         ForwardTape* tape = nullptr);
DualOutput forward_with_input_derivative(const Mlp& net, double t);

/// Reverse pass over the augmented graph: grad_value = dLoss/d(outputs) and
/// grad_dvalue = dLoss/d(output input-derivatives), both channels x batch.
/// Requires the tape produced by the matching forward call.
MlpGrad backward(const Mlp& net, const ForwardTape& tape,
                 const Eigen::MatrixXd& grad_value,
                 const Eigen::MatrixXd& grad_dvalue);

/// JSON checkpoint: layer sizes, row-major weights, biases, seed, iteration.
void save_checkpoint(const Mlp& net, const std::string& path,
                     std::uint64_t seed = 0, std::int64_t iteration = 0);
struct Checkpoint {
  Mlp net;
  std::uint64_t seed = 0;
  std::int64_t iteration = 0;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cthp
