#pragma once

// Iterative ADMM for  min ||X - YC||_F^2 + lambda ||C||_1  s.t. diag(C) = 0,
// split as C = Z with multiplier mu and penalty rho.

#include "unfold_ssc/common.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace unfold_ssc {

template <typename Scalar>
struct ClassicConfig {
  Scalar lambda = Scalar(0.1);
  Scalar rho = Scalar(1);
  int iterations = 200;
  std::optional<Matrix<Scalar>> dictionary;  // Y; defaults to X
  bool zero_diagonal = true;                 // diag(Z) <- 0 after each Z-step

  void validate() const {
    if (!(rho > 0)) throw ConfigError("ssc-classic: rho must be > 0");
    if (iterations < 1) throw ConfigError("ssc-classic: iterations must be >= 1");
    if (!(lambda >= 0)) throw ConfigError("ssc-classic: lambda must be >= 0");
  }
};

template <typename Scalar>
struct AdmmState {
  Matrix<Scalar> c, z, mu;
  std::vector<Scalar> primal_residual;  // ||C - Z||_F after each iteration
};

/// Closed-form C-step operators: W = (2Y^T Y + rho I)^{-1} 2Y^T,  B = (2Y^T Y + rho I)^{-1}.
template <typename Scalar>
struct CStepOperators {
  Matrix<Scalar> w;  // n x l
  Matrix<Scalar> b;  // n x n
};

template <typename Derived>
CStepOperators<typename Derived::Scalar> precompute(const Eigen::MatrixBase<Derived>& y,
                                                    typename Derived::Scalar rho) {
  using Scalar = typename Derived::Scalar;
  if (!(rho > 0)) throw ConfigError("ssc-classic: rho must be > 0");
  const Eigen::Index n = y.cols();
  Matrix<Scalar> gram = Scalar(2) * (y.transpose() * y);
  gram.diagonal().array() += rho;
  const Eigen::LLT<Matrix<Scalar>> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NumericalError("ssc-classic: Cholesky of 2Y^TY + rho I failed");
  CStepOperators<Scalar> ops;
  ops.b = llt.solve(Matrix<Scalar>::Identity(n, n));
  ops.w = llt.solve(Scalar(2) * y.transpose());
  return ops;
}

/// C = W X - B (mu - rho Z).
template <typename Scalar>
Matrix<Scalar> step_c(const CStepOperators<Scalar>& ops, const Matrix<Scalar>& x,
                      const Matrix<Scalar>& z, const Matrix<Scalar>& mu, Scalar rho) {
  if (ops.w.cols() != x.rows() || ops.w.rows() != x.cols())
    throw ShapeError("ssc-classic: W is " + shape_str(ops.w.rows(), ops.w.cols()) +
                     " but X is " + shape_str(x.rows(), x.cols()));
  require_same_shape(z, mu, "ssc-classic step_c");
  require_same_shape(ops.b, z, "ssc-classic step_c");
  // Kept apart from the subtraction so mu == rho Z cancels exactly even with FMA.
  const Matrix<Scalar> rz = rho * z;
  return ops.w * x - ops.b * (mu - rz);
}

template <typename Scalar>
Scalar soft_threshold(Scalar x, Scalar theta) {
  if (theta < 0) throw std::invalid_argument("soft_threshold: negative threshold");
  if (x > theta) return x - theta;
  if (x < -theta) return x + theta;
  return Scalar(0);
}

template <typename Derived>
Matrix<typename Derived::Scalar> soft_threshold(const Eigen::MatrixBase<Derived>& v,
                                                typename Derived::Scalar theta) {
  using Scalar = typename Derived::Scalar;
  if (theta < 0) throw std::invalid_argument("soft_threshold: negative threshold");
  return v.unaryExpr([theta](Scalar x) {
    return x > theta ? x - theta : (x < -theta ? x + theta : Scalar(0));
  });
}

/// Z = ST(C + mu/rho, lambda/rho), then diag(Z) = 0.
template <typename Scalar>
Matrix<Scalar> step_z(const Matrix<Scalar>& c, const Matrix<Scalar>& mu, Scalar rho,
                      Scalar lambda, bool zero_diag = true) {
  if (!(rho > 0)) throw ConfigError("ssc-classic: rho must be > 0");
  require_same_shape(c, mu, "ssc-classic step_z");
  Matrix<Scalar> z = soft_threshold(c + mu / rho, lambda / rho);
  if (zero_diag) z.diagonal().setZero();
  return z;
}

template <typename Scalar>
Matrix<Scalar> step_mu(const Matrix<Scalar>& mu, const Matrix<Scalar>& c,
                       const Matrix<Scalar>& z, Scalar rho) {
  require_same_shape(c, z, "ssc-classic step_mu");
  require_same_shape(mu, c, "ssc-classic step_mu");
  return mu + rho * (c - z);
}

template <typename Scalar>
AdmmState<Scalar> solve(const Matrix<Scalar>& x, const ClassicConfig<Scalar>& cfg,
                        const std::optional<Matrix<Scalar>>& z0 = std::nullopt,
                        const std::optional<Matrix<Scalar>>& mu0 = std::nullopt) {
  cfg.validate();
  const Eigen::Index n = x.cols();
  const Matrix<Scalar>& y = cfg.dictionary ? *cfg.dictionary : x;
  if (y.cols() != n || y.rows() != x.rows())
    throw ShapeError("ssc-classic: dictionary must match X's shape");

  const auto ops = precompute(y, cfg.rho);
  AdmmState<Scalar> st;
  st.z = z0 ? *z0 : Matrix<Scalar>::Zero(n, n);
  st.mu = mu0 ? *mu0 : Matrix<Scalar>::Zero(n, n);
  require_same_shape(st.z, ops.b, "ssc-classic Z0");
  require_same_shape(st.mu, ops.b, "ssc-classic mu0");
  st.primal_residual.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int it = 0; it < cfg.iterations; ++it) {
    st.c = step_c(ops, x, st.z, st.mu, cfg.rho);
    st.z = step_z(st.c, st.mu, cfg.rho, cfg.lambda, cfg.zero_diagonal);
    st.mu = step_mu(st.mu, st.c, st.z, cfg.rho);
    if (!st.c.allFinite() || !st.z.allFinite() || !st.mu.allFinite())
      throw NumericalError("ssc-classic: non-finite iterate at iteration " + std::to_string(it));
    st.primal_residual.push_back((st.c - st.z).norm());
  }
  return st;
}

}  // namespace unfold_ssc
