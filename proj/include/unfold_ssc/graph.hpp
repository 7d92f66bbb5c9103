#pragma once

#include "unfold_ssc/common.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

namespace unfold_ssc {

/// Binary, symmetric, zero-diagonal KNN graph.
template <typename Scalar>
struct Adjacency {
  Matrix<Scalar> entries;
  Eigen::Index k = 0;

  Eigen::Index size() const { return entries.rows(); }
};

/// Marks the k nearest other columns of each column (ties to the smaller index),
/// then union-symmetrizes.
template <typename Derived>
Adjacency<typename Derived::Scalar> knn_adjacency(const Eigen::MatrixBase<Derived>& points,
                                                  Eigen::Index k) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.cols();
  if (k < 1 || k >= n)
    throw std::invalid_argument("graph: knn needs 1 <= k < n, got k=" + std::to_string(k) +
                                ", n=" + std::to_string(n));
  // Exact differences rather than the Gram expansion, so duplicate columns are at distance 0.
  Matrix<Scalar> dist(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i)
      dist(i, j) = dist(j, i) = (points.col(i) - points.col(j)).squaredNorm();

  Adjacency<Scalar> adj;
  adj.k = k;
  adj.entries = Matrix<Scalar>::Zero(n, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t pos = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) order[pos++] = j;
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        const Scalar da = dist(a, i), db = dist(b, i);
                        return da < db || (da == db && a < b);
                      });
    for (Eigen::Index t = 0; t < k; ++t) adj.entries(i, order[static_cast<std::size_t>(t)]) = 1;
  }
  adj.entries = adj.entries.cwiseMax(adj.entries.transpose()).eval();
  adj.entries.diagonal().setZero();
  return adj;
}

/// L = D - A.
template <typename Scalar>
Matrix<Scalar> laplacian(const Adjacency<Scalar>& adj) {
  Matrix<Scalar> lap = -adj.entries;
  lap.diagonal() += adj.entries.rowwise().sum();
  return lap;
}

template <typename Scalar>
struct LossAndGrad {
  Scalar value{};
  Matrix<Scalar> grad;
};

/// Sum_{ij} A_ij ||C_i - C_j||^2 over columns of C, evaluated as 2 Tr(C L C^T);
/// gradient 4 C L.
template <typename Scalar>
LossAndGrad<Scalar> structure_loss(const Matrix<Scalar>& c, const Matrix<Scalar>& lap) {
  if (c.cols() != lap.rows() || lap.rows() != lap.cols())
    throw ShapeError("graph: structure_loss shape mismatch " + shape_str(c.rows(), c.cols()) +
                     " vs Laplacian " + shape_str(lap.rows(), lap.cols()));
  const Matrix<Scalar> cl = c * lap;
  return {Scalar(2) * cl.cwiseProduct(c).sum(), Scalar(4) * cl};
}

}  // namespace unfold_ssc
