#pragma once

#include <Eigen/Core>
#include <vector>

#include "clc/rng.hpp"

namespace clc {

enum class Activation { ReLU, Tanh, Identity };

struct LayerSpec {
  int width = 0;
  Activation act = Activation::Identity;
};

// Fully connected network with explicit backpropagation. Batches are stored
// column-wise: an input is (input_dim x n) and the output (output_dim x n).
class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, std::vector<LayerSpec> layers);

  // Uniform fan-in init, U(-1/sqrt(fan_in), +1/sqrt(fan_in)) for weights and
  // biases. final_scale shrinks the last layer (near-zero initial outputs
  // keep bounded actors away from their clamp bounds).
  void init(Rng& rng, double final_scale = 1.0);

  // Forward pass retaining the activation trace needed by backward.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input);
  // Trace-free forward for finite differences and evaluation.
  Eigen::MatrixXd eval(const Eigen::MatrixXd& input) const;
  // Post-activation values of every layer, input first. Used by the gradient
  // checker to detect ReLU kink crossings between perturbed evaluations.
  std::vector<Eigen::MatrixXd> eval_trace(const Eigen::MatrixXd& input) const;

  // Accumulates parameter gradients for the scalar loss whose d(loss)/d(output)
  // is `upstream`; returns d(loss)/d(input). Requires a prior forward().
  Eigen::MatrixXd backward(const Eigen::MatrixXd& upstream);
  void zero_grad();

  int input_dim() const { return input_dim_; }
  int output_dim() const;
  int param_count() const;

  // Flat parameter order: per layer, weight matrix in column-major storage
  // order, then bias. The checkpoint format relies on this order.
  Eigen::VectorXd params() const;
  void set_params(const Eigen::VectorXd& flat);
  Eigen::VectorXd grads() const;

  int layer_count() const { return static_cast<int>(layers_.size()); }
  const Eigen::MatrixXd& weight(int layer) const { return layers_[layer].w; }
  const Eigen::VectorXd& bias(int layer) const { return layers_[layer].b; }
  Eigen::MatrixXd& weight(int layer) { return layers_[layer].w; }
  Eigen::VectorXd& bias(int layer) { return layers_[layer].b; }
  Activation activation(int layer) const { return layers_[layer].act; }

 private:
  struct Layer {
    Eigen::MatrixXd w;  // out x in
    Eigen::VectorXd b;
    Activation act = Activation::Identity;
    Eigen::MatrixXd gw;
    Eigen::VectorXd gb;
  };

  static Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& z);
  // Derivative expressed through the post-activation value.
  static Eigen::MatrixXd activation_grad(Activation act, const Eigen::MatrixXd& a);

  int input_dim_ = 0;
  std::vector<Layer> layers_;
  // forward() trace: input_ then post-activations per layer.
  Eigen::MatrixXd traced_input_;
  std::vector<Eigen::MatrixXd> traced_acts_;
  bool traced_ = false;
};

}  // namespace clc
