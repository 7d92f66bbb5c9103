#pragma once

#include "unfold_ssc/common.hpp"

#include <cstdint>
#include <vector>

namespace unfold_ssc {

/// S = (|C| + |C|^T) / 2 with zeroed diagonal.
template <typename Derived>
Matrix<typename Derived::Scalar> similarity(const Eigen::MatrixBase<Derived>& c) {
  if (c.rows() != c.cols())
    throw ShapeError("cluster: similarity needs a square matrix, got " +
                     shape_str(c.rows(), c.cols()));
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> s = (c.cwiseAbs() + c.cwiseAbs().transpose()) / Scalar(2);
  s.diagonal().setZero();
  return s;
}

struct KMeansOptions {
  int restarts = 10;
  int iterations = 300;
};

struct KMeansResult {
  Labels labels;
  double wcss = 0;
  std::vector<double> trace;  // WCSS after each Lloyd step of the winning restart
};

/// k-means++ seeding and Lloyd iterations on the rows of `points`; best of restarts
/// by within-cluster sum of squares, ties to the lowest restart index.
KMeansResult kmeans(const MatrixXd& points, int k, std::uint64_t seed,
                    const KMeansOptions& opts = {});

struct SpectralOptions {
  bool row_normalize = true;
  KMeansOptions kmeans;
};

struct ClusterResult {
  Labels labels;  // 0..k-1
  int k = 0;
  MatrixXd embedding;  // n x k
  VectorXd eigenvalues;  // all eigenvalues of L_sym, ascending
};

/// Eigenvectors of the k smallest eigenvalues of I - D^{-1/2} S D^{-1/2}, optionally
/// row-normalized, then k-means on the rows.
ClusterResult spectral_cluster(const MatrixXd& s, int k, std::uint64_t seed,
                               const SpectralOptions& opts = {});

}  // namespace unfold_ssc
