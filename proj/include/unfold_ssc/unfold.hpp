#pragma once

// Unrolled ADMM network. Layer k computes
//   C_k = W_k H - B_k (mu_{k-1} - rho_k Z_{k-1})
//   V_k = C_k + mu_{k-1} / rho_k
//   Z_k = offdiag(relu(|V_k| - theta_k) * sgn(V_k))
//   mu_k = mu_{k-1} + rho_k (C_k - Z_k)
// with rho_k = softplus(r_k), theta_k = softplus(t_k).

#include "unfold_ssc/admm.hpp"
#include "unfold_ssc/common.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace unfold_ssc {

template <typename Scalar>
Scalar softplus(Scalar x) {
  // log(1 + e^x) without overflow for large x
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <typename Scalar>
Scalar softplus_inverse(Scalar y) {
  if (!(y > 0)) throw std::invalid_argument("softplus_inverse: argument must be > 0");
  return y > 30 ? y + std::log(-std::expm1(-y)) : std::log(std::expm1(y));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return x >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-x))
                : std::exp(x) / (Scalar(1) + std::exp(x));
}

template <typename Scalar>
struct UnfoldLayer {
  Matrix<Scalar> w;  // n x l
  Matrix<Scalar> b;  // n x n
  Scalar rho_pre{};    // rho = softplus(rho_pre)
  Scalar theta_pre{};  // theta = softplus(theta_pre)

  Scalar rho() const { return softplus(rho_pre); }
  Scalar theta() const { return softplus(theta_pre); }
};

template <typename Scalar>
struct UnfoldParams {
  std::vector<UnfoldLayer<Scalar>> layers;  // size 1 when tied, else depth
  int depth = 0;
  bool tied = false;

  const UnfoldLayer<Scalar>& layer(int k) const {
    return layers[tied ? 0 : static_cast<std::size_t>(k)];
  }
  Eigen::Index samples() const { return layers.empty() ? 0 : layers.front().b.rows(); }
  Eigen::Index latent_dim() const { return layers.empty() ? 0 : layers.front().w.cols(); }
};

/// Every layer starts at the analytic C-step operators for dictionary Y = H~.
template <typename Scalar>
UnfoldParams<Scalar> init_params(const Matrix<Scalar>& htilde, Scalar rho0, Scalar threshold0,
                                 int depth, bool tied = false) {
  if (!(rho0 > 0)) throw ConfigError("unfold: rho0 must be > 0");
  if (!(threshold0 > 0))
    throw ConfigError("unfold: initial threshold must be > 0 (softplus parameterization)");
  if (depth < 1) throw ConfigError("unfold: layer count must be >= 1");
  const auto ops = precompute(htilde, rho0);
  UnfoldLayer<Scalar> layer{ops.w, ops.b, softplus_inverse(rho0), softplus_inverse(threshold0)};
  UnfoldParams<Scalar> params;
  params.depth = depth;
  params.tied = tied;
  params.layers.assign(tied ? 1 : static_cast<std::size_t>(depth), layer);
  return params;
}

template <typename Derived>
Matrix<typename Derived::Scalar> relu_soft_threshold(const Eigen::MatrixBase<Derived>& v,
                                                     typename Derived::Scalar theta) {
  using Scalar = typename Derived::Scalar;
  return v.unaryExpr([theta](Scalar x) {
    return std::max(std::abs(x) - theta, Scalar(0)) * sign(x);
  });
}

template <typename Scalar>
struct LayerActivations {
  Matrix<Scalar> c, v, z, mu;
};

template <typename Scalar>
struct ForwardTape {
  Matrix<Scalar> htilde, z0, mu0;
  std::vector<LayerActivations<Scalar>> layers;

  const Matrix<Scalar>& z_in(std::size_t k) const { return k == 0 ? z0 : layers[k - 1].z; }
  const Matrix<Scalar>& mu_in(std::size_t k) const { return k == 0 ? mu0 : layers[k - 1].mu; }
};

template <typename Scalar>
struct ForwardResult {
  Matrix<Scalar> c;  // last-layer C with zeroed diagonal
  ForwardTape<Scalar> tape;
};

template <typename Scalar>
ForwardResult<Scalar> forward(const UnfoldParams<Scalar>& params, const Matrix<Scalar>& htilde,
                              const Matrix<Scalar>& z0, const Matrix<Scalar>& mu0) {
  const Eigen::Index n = htilde.cols();
  if (params.layers.empty()) throw ConfigError("unfold: no layers");
  if (params.samples() != n || params.latent_dim() != htilde.rows())
    throw ShapeError("unfold: parameters sized for " +
                     shape_str(params.latent_dim(), params.samples()) + " but H~ is " +
                     shape_str(htilde.rows(), htilde.cols()));
  if (z0.rows() != n || z0.cols() != n || mu0.rows() != n || mu0.cols() != n)
    throw ShapeError("unfold: Z0 and mu0 must be " + shape_str(n, n));

  ForwardResult<Scalar> out;
  auto& tape = out.tape;
  tape.htilde = htilde;
  tape.z0 = z0;
  tape.mu0 = mu0;
  tape.layers.reserve(static_cast<std::size_t>(params.depth));
  for (int k = 0; k < params.depth; ++k) {
    const auto& p = params.layer(k);
    const Scalar rho = p.rho();
    const Scalar theta = p.theta();
    const auto& z_prev = tape.z_in(static_cast<std::size_t>(k));
    const auto& mu_prev = tape.mu_in(static_cast<std::size_t>(k));
    LayerActivations<Scalar> a;
    a.c = p.w * htilde;
    a.c.noalias() -= p.b * (mu_prev - rho * z_prev);
    a.v = a.c + mu_prev / rho;
    a.z = relu_soft_threshold(a.v, theta);
    a.z.diagonal().setZero();
    a.mu = mu_prev + rho * (a.c - a.z);
    if (!a.c.allFinite() || !a.z.allFinite() || !a.mu.allFinite())
      throw NumericalError("unfold: non-finite activation in layer " + std::to_string(k));
    tape.layers.push_back(std::move(a));
  }
  out.c = tape.layers.back().c;
  out.c.diagonal().setZero();
  return out;
}

template <typename Scalar>
struct LayerGrads {
  Matrix<Scalar> w, b;
  Scalar rho_pre{}, theta_pre{};
};

template <typename Scalar>
struct UnfoldGrads {
  std::vector<LayerGrads<Scalar>> layers;  // mirrors UnfoldParams::layers
  Matrix<Scalar> htilde;
};

/// Reverse-mode gradients of a scalar loss given dLoss/dC for the C returned by forward().
/// The threshold kink and sgn(0) take subgradient 0.
template <typename Scalar>
UnfoldGrads<Scalar> backward(const ForwardTape<Scalar>& tape, const UnfoldParams<Scalar>& params,
                             const Matrix<Scalar>& grad_c) {
  const Eigen::Index n = tape.htilde.cols();
  if (static_cast<int>(tape.layers.size()) != params.depth || params.samples() != n)
    throw ShapeError("unfold: tape does not match parameters");
  if (grad_c.rows() != n || grad_c.cols() != n)
    throw ShapeError("unfold: grad_C must be " + shape_str(n, n));

  UnfoldGrads<Scalar> g;
  for (const auto& p : params.layers)
    g.layers.push_back({Matrix<Scalar>::Zero(p.w.rows(), p.w.cols()),
                        Matrix<Scalar>::Zero(p.b.rows(), p.b.cols()), Scalar(0), Scalar(0)});
  g.htilde = Matrix<Scalar>::Zero(tape.htilde.rows(), n);

  // Adjoints of the current layer's outputs.
  Matrix<Scalar> gc = grad_c;
  gc.diagonal().setZero();
  Matrix<Scalar> gz = Matrix<Scalar>::Zero(n, n);
  Matrix<Scalar> gmu = Matrix<Scalar>::Zero(n, n);

  for (int k = params.depth - 1; k >= 0; --k) {
    const auto& p = params.layer(k);
    auto& lg = g.layers[params.tied ? 0 : static_cast<std::size_t>(k)];
    const auto& a = tape.layers[static_cast<std::size_t>(k)];
    const auto& z_prev = tape.z_in(static_cast<std::size_t>(k));
    const auto& mu_prev = tape.mu_in(static_cast<std::size_t>(k));
    const Scalar rho = p.rho();
    const Scalar theta = p.theta();
    Scalar g_rho = 0;
    Scalar g_theta = 0;

    // mu_k = mu_prev + rho (C - Z)
    Matrix<Scalar> gmu_prev = gmu;
    gc += rho * gmu;
    gz -= rho * gmu;
    g_rho += gmu.cwiseProduct(a.c - a.z).sum();

    // Z_k = offdiag(ST(V, theta))
    Matrix<Scalar> gv(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar vij = a.v(i, j);
        if (i != j && std::abs(vij) > theta) {
          gv(i, j) = gz(i, j);
          g_theta -= sign(vij) * gz(i, j);
        } else {
          gv(i, j) = 0;
        }
      }

    // V_k = C + mu_prev / rho
    gc += gv;
    gmu_prev += gv / rho;
    g_rho -= gv.cwiseProduct(mu_prev).sum() / (rho * rho);

    // C_k = W H - B M,  M = mu_prev - rho Z_prev
    lg.w.noalias() += gc * tape.htilde.transpose();
    g.htilde.noalias() += p.w.transpose() * gc;
    lg.b.noalias() -= gc * (mu_prev - rho * z_prev).transpose();
    const Matrix<Scalar> gm = -(p.b.transpose() * gc);
    gmu_prev += gm;
    g_rho -= gm.cwiseProduct(z_prev).sum();

    lg.rho_pre += g_rho * sigmoid(p.rho_pre);
    lg.theta_pre += g_theta * sigmoid(p.theta_pre);

    gz = -rho * gm;
    gmu = std::move(gmu_prev);
    gc.setZero();
  }
  return g;
}

}  // namespace unfold_ssc
