#pragma once

#include "unfold_ssc/common.hpp"
#include "unfold_ssc/rng.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace unfold_ssc {

enum class Activation { linear, leaky_relu };

inline Activation parse_activation(const std::string& name) {
  if (name == "linear") return Activation::linear;
  if (name == "leaky_relu") return Activation::leaky_relu;
  throw ConfigError("autoenc: unknown activation '" + name + "'");
}

inline std::string to_string(Activation a) {
  return a == Activation::linear ? "linear" : "leaky_relu";
}

struct AeConfig {
  Eigen::Index input_dim = 0;
  std::vector<Eigen::Index> hidden_dims{256, 64};
  Eigen::Index latent_dim = 32;
  Activation activation = Activation::leaky_relu;
  double leaky_slope = 0.01;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct DenseLayer {
  Matrix<Scalar> w;  // out x in
  Vector<Scalar> b;  // out
};

/// Encoder d -> hidden... -> l, every layer followed by the activation.
/// Decoder mirrors it back to d with a linear output layer.
template <typename Scalar>
struct AeWeights {
  std::vector<DenseLayer<Scalar>> encoder;
  std::vector<DenseLayer<Scalar>> decoder;
  Activation activation = Activation::leaky_relu;
  Scalar leaky_slope = Scalar(0.01);

  Eigen::Index input_dim() const { return encoder.front().w.cols(); }
  Eigen::Index latent_dim() const { return encoder.back().w.rows(); }
};

template <typename Scalar>
AeWeights<Scalar> make_autoencoder(const AeConfig& cfg) {
  if (cfg.input_dim < 1 || cfg.latent_dim < 1)
    throw ConfigError("autoenc: input and latent dims must be >= 1");
  std::vector<Eigen::Index> dims{cfg.input_dim};
  for (auto h : cfg.hidden_dims) {
    if (h < 1) throw ConfigError("autoenc: hidden widths must be >= 1");
    dims.push_back(h);
  }
  dims.push_back(cfg.latent_dim);

  Xoshiro256pp rng(cfg.seed);
  auto glorot = [&](Eigen::Index out, Eigen::Index in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-bound, bound);
    DenseLayer<Scalar> layer{Matrix<Scalar>(out, in), Vector<Scalar>::Zero(out)};
    for (Eigen::Index j = 0; j < in; ++j)
      for (Eigen::Index i = 0; i < out; ++i) layer.w(i, j) = static_cast<Scalar>(u(rng));
    return layer;
  };

  AeWeights<Scalar> ae;
  ae.activation = cfg.activation;
  ae.leaky_slope = static_cast<Scalar>(cfg.leaky_slope);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) ae.encoder.push_back(glorot(dims[i + 1], dims[i]));
  for (std::size_t i = dims.size() - 1; i > 0; --i) ae.decoder.push_back(glorot(dims[i - 1], dims[i]));
  return ae;
}

/// Inputs and pre-activations of each layer, kept for the backward pass.
template <typename Scalar>
struct StackCache {
  std::vector<Matrix<Scalar>> inputs;
  std::vector<Matrix<Scalar>> pre;
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> activate(const Matrix<Scalar>& pre, Activation act, Scalar slope) {
  if (act == Activation::linear) return pre;
  return pre.unaryExpr([slope](Scalar x) { return x > 0 ? x : slope * x; });
}

template <typename Scalar>
Matrix<Scalar> activate_grad(const Matrix<Scalar>& pre, const Matrix<Scalar>& g, Activation act,
                             Scalar slope) {
  if (act == Activation::linear) return g;
  return g.binaryExpr(pre, [slope](Scalar gi, Scalar x) { return x > 0 ? gi : slope * gi; });
}

}  // namespace detail

/// Runs a dense stack on column samples. `linear_last` skips the final activation.
template <typename Scalar>
Matrix<Scalar> run_stack(const std::vector<DenseLayer<Scalar>>& layers, const Matrix<Scalar>& input,
                         Activation act, Scalar slope, bool linear_last,
                         StackCache<Scalar>* cache = nullptr) {
  Matrix<Scalar> x = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.w.cols() != x.rows())
      throw ShapeError("autoenc: layer " + std::to_string(i) + " expects " +
                       std::to_string(l.w.cols()) + " inputs, got " + std::to_string(x.rows()));
    Matrix<Scalar> pre = l.w * x;
    pre.colwise() += l.b;
    const bool last = i + 1 == layers.size();
    Matrix<Scalar> out =
        (last && linear_last) ? pre : detail::activate(pre, act, slope);
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->pre.push_back(std::move(pre));
    }
    x = std::move(out);
  }
  return x;
}

/// Accumulates layer gradients into `grads` and returns dLoss/dInput.
template <typename Scalar>
Matrix<Scalar> backprop_stack(const std::vector<DenseLayer<Scalar>>& layers,
                              const StackCache<Scalar>& cache, const Matrix<Scalar>& grad_out,
                              Activation act, Scalar slope, bool linear_last,
                              std::vector<DenseLayer<Scalar>>& grads) {
  Matrix<Scalar> g = grad_out;
  for (std::size_t i = layers.size(); i-- > 0;) {
    const bool last = i + 1 == layers.size();
    if (!(last && linear_last)) g = detail::activate_grad(cache.pre[i], g, act, slope);
    grads[i].w.noalias() += g * cache.inputs[i].transpose();
    grads[i].b += g.rowwise().sum();
    g = layers[i].w.transpose() * g;
  }
  return g;
}

template <typename Scalar>
std::vector<DenseLayer<Scalar>> zeros_like(const std::vector<DenseLayer<Scalar>>& layers) {
  std::vector<DenseLayer<Scalar>> z;
  for (const auto& l : layers)
    z.push_back({Matrix<Scalar>::Zero(l.w.rows(), l.w.cols()), Vector<Scalar>::Zero(l.b.size())});
  return z;
}

/// X: d x n (columns are samples) -> H: n x l (rows are latent codes).
template <typename Scalar>
Matrix<Scalar> encode(const AeWeights<Scalar>& ae, const Matrix<Scalar>& x,
                      StackCache<Scalar>* cache = nullptr) {
  return run_stack(ae.encoder, x, ae.activation, ae.leaky_slope, false, cache).transpose();
}

/// H: n x l -> Xhat: d x n.
template <typename Scalar>
Matrix<Scalar> decode(const AeWeights<Scalar>& ae, const Matrix<Scalar>& h,
                      StackCache<Scalar>* cache = nullptr) {
  return run_stack(ae.decoder, Matrix<Scalar>(h.transpose()), ae.activation, ae.leaky_slope,
                   true, cache);
}

template <typename Scalar>
struct AeLoss {
  Scalar value{};
  Matrix<Scalar> grad;  // dL/dXhat
};

/// (1/n) sum_i ||x_i - xhat_i||^2.
template <typename Scalar>
AeLoss<Scalar> ae_loss(const Matrix<Scalar>& x, const Matrix<Scalar>& xhat) {
  require_same_shape(x, xhat, "autoenc ae_loss");
  const Scalar n = static_cast<Scalar>(x.cols());
  const Matrix<Scalar> diff = xhat - x;
  return {diff.squaredNorm() / n, (Scalar(2) / n) * diff};
}

/// H (n x l) -> H~ (l x n) with unit-norm columns.
template <typename Scalar>
Matrix<Scalar> normalize_latent(const Matrix<Scalar>& h) {
  Matrix<Scalar> out = h.transpose();
  for (Eigen::Index i = 0; i < out.cols(); ++i) {
    const Scalar norm = out.col(i).norm();
    if (!(norm > 0))
      throw NumericalError("autoenc: latent code of sample " + std::to_string(i) + " is zero");
    out.col(i) /= norm;
  }
  return out;
}

/// Gradient w.r.t. H (n x l) given dL/dH~ and the forward input/output.
template <typename Scalar>
Matrix<Scalar> normalize_latent_backward(const Matrix<Scalar>& h, const Matrix<Scalar>& htilde,
                                         const Matrix<Scalar>& grad_htilde) {
  Matrix<Scalar> g(h.rows(), h.cols());
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    const Scalar norm = h.row(i).norm();
    const auto u = htilde.col(i);
    const auto gu = grad_htilde.col(i);
    g.row(i) = ((gu - u * u.dot(gu)) / norm).transpose();
  }
  return g;
}

}  // namespace unfold_ssc
