#include "clc/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace clc {

Mlp::Mlp(int input_dim, std::vector<LayerSpec> layers) : input_dim_(input_dim) {
  if (input_dim <= 0) throw std::invalid_argument("input dimension must be positive");
  if (layers.empty()) throw std::invalid_argument("network needs at least one layer");
  int fan_in = input_dim;
  for (const LayerSpec& spec : layers) {
    if (spec.width <= 0) throw std::invalid_argument("layer width must be positive");
    Layer layer;
    layer.w = Eigen::MatrixXd::Zero(spec.width, fan_in);
    layer.b = Eigen::VectorXd::Zero(spec.width);
    layer.gw = Eigen::MatrixXd::Zero(spec.width, fan_in);
    layer.gb = Eigen::VectorXd::Zero(spec.width);
    layer.act = spec.act;
    layers_.push_back(std::move(layer));
    fan_in = spec.width;
  }
}

void Mlp::init(Rng& rng, double final_scale) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    const double limit = 1.0 / std::sqrt(static_cast<double>(layer.w.cols()));
    const double scale = (l + 1 == layers_.size()) ? final_scale : 1.0;
    double* w = layer.w.data();
    for (Eigen::Index i = 0; i < layer.w.size(); ++i) {
      w[i] = scale * rng.uniform(-limit, limit);
    }
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) {
      layer.b(i) = scale * rng.uniform(-limit, limit);
    }
  }
}

int Mlp::output_dim() const {
  return static_cast<int>(layers_.back().w.rows());
}

Eigen::MatrixXd Mlp::apply_activation(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::ReLU: return z.cwiseMax(0.0);
    case Activation::Tanh: return z.array().tanh().matrix();
    case Activation::Identity: return z;
  }
  return z;
}

Eigen::MatrixXd Mlp::activation_grad(Activation act, const Eigen::MatrixXd& a) {
  switch (act) {
    case Activation::ReLU:
      return (a.array() > 0.0).cast<double>().matrix();
    case Activation::Tanh:
      return (1.0 - a.array().square()).matrix();
    case Activation::Identity:
      return Eigen::MatrixXd::Ones(a.rows(), a.cols());
  }
  return Eigen::MatrixXd::Ones(a.rows(), a.cols());
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) {
  if (input.rows() != input_dim_) throw std::invalid_argument("input dimension mismatch");
  traced_input_ = input;
  traced_acts_.clear();
  Eigen::MatrixXd a = input;
  for (const Layer& layer : layers_) {
    a = apply_activation(layer.act, (layer.w * a).colwise() + layer.b);
    traced_acts_.push_back(a);
  }
  traced_ = true;
  return a;
}

Eigen::MatrixXd Mlp::eval(const Eigen::MatrixXd& input) const {
  if (input.rows() != input_dim_) throw std::invalid_argument("input dimension mismatch");
  Eigen::MatrixXd a = input;
  for (const Layer& layer : layers_) {
    a = apply_activation(layer.act, (layer.w * a).colwise() + layer.b);
  }
  return a;
}

std::vector<Eigen::MatrixXd> Mlp::eval_trace(const Eigen::MatrixXd& input) const {
  if (input.rows() != input_dim_) throw std::invalid_argument("input dimension mismatch");
  std::vector<Eigen::MatrixXd> trace;
  trace.push_back(input);
  Eigen::MatrixXd a = input;
  for (const Layer& layer : layers_) {
    a = apply_activation(layer.act, (layer.w * a).colwise() + layer.b);
    trace.push_back(a);
  }
  return trace;
}

Eigen::MatrixXd Mlp::backward(const Eigen::MatrixXd& upstream) {
  if (!traced_) throw std::logic_error("backward called without a traced forward pass");
  if (upstream.rows() != output_dim() || upstream.cols() != traced_input_.cols()) {
    throw std::invalid_argument("upstream gradient shape mismatch");
  }
  Eigen::MatrixXd delta = upstream;
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    Layer& layer = layers_[l];
    delta = delta.cwiseProduct(activation_grad(layer.act, traced_acts_[l]));
    const Eigen::MatrixXd& below =
        (l == 0) ? traced_input_ : traced_acts_[l - 1];
    layer.gw.noalias() += delta * below.transpose();
    layer.gb.noalias() += delta.rowwise().sum();
    if (l > 0) delta = (layer.w.transpose() * delta).eval();
  }
  return layers_.front().w.transpose() * delta;
}

void Mlp::zero_grad() {
  for (Layer& layer : layers_) {
    layer.gw.setZero();
    layer.gb.setZero();
  }
}

int Mlp::param_count() const {
  int n = 0;
  for (const Layer& layer : layers_) {
    n += static_cast<int>(layer.w.size() + layer.b.size());
  }
  return n;
}

Eigen::VectorXd Mlp::params() const {
  Eigen::VectorXd flat(param_count());
  Eigen::Index at = 0;
  for (const Layer& layer : layers_) {
    flat.segment(at, layer.w.size()) =
        Eigen::Map<const Eigen::VectorXd>(layer.w.data(), layer.w.size());
    at += layer.w.size();
    flat.segment(at, layer.b.size()) = layer.b;
    at += layer.b.size();
  }
  return flat;
}

void Mlp::set_params(const Eigen::VectorXd& flat) {
  if (flat.size() != param_count()) {
    throw std::invalid_argument("flat parameter vector has the wrong length");
  }
  Eigen::Index at = 0;
  for (Layer& layer : layers_) {
    Eigen::Map<Eigen::VectorXd>(layer.w.data(), layer.w.size()) =
        flat.segment(at, layer.w.size());
    at += layer.w.size();
    layer.b = flat.segment(at, layer.b.size());
    at += layer.b.size();
  }
}

Eigen::VectorXd Mlp::grads() const {
  Eigen::VectorXd flat(param_count());
  Eigen::Index at = 0;
  for (const Layer& layer : layers_) {
    flat.segment(at, layer.gw.size()) =
        Eigen::Map<const Eigen::VectorXd>(layer.gw.data(), layer.gw.size());
    at += layer.gw.size();
    flat.segment(at, layer.gb.size()) = layer.gb;
    at += layer.gb.size();
  }
  return flat;
}

}  // namespace clc
