#include "unfold_ssc/cluster.hpp"

#include "unfold_ssc/rng.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace unfold_ssc {

namespace {

constexpr double kDegreeFloor = 1e-12;

double sq_dist(const MatrixXd& points, Eigen::Index i, const MatrixXd& centers, int c) {
  return (points.row(i) - centers.row(c)).squaredNorm();
}

MatrixXd seed_plus_plus(const MatrixXd& points, int k, Xoshiro256pp& rng) {
  const Eigen::Index n = points.rows();
  MatrixXd centers(k, points.cols());
  auto pick = [&](double u) {
    return std::min<Eigen::Index>(static_cast<Eigen::Index>(u * static_cast<double>(n)), n - 1);
  };
  centers.row(0) = points.row(pick(rng.uniform()));
  VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = sq_dist(points, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0) {
      const double target = rng.uniform() * total;
      double acc = 0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target && d2(i) > 0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng.uniform());
    }
    centers.row(c) = points.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), sq_dist(points, i, centers, c));
  }
  return centers;
}

KMeansResult lloyd(const MatrixXd& points, MatrixXd centers, int iterations) {
  const Eigen::Index n = points.rows();
  const int k = static_cast<int>(centers.rows());
  KMeansResult res;
  res.labels.assign(static_cast<std::size_t>(n), -1);
  VectorXd cost(n);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(points, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      cost(i) = best_d;
      if (res.labels[static_cast<std::size_t>(i)] != best) {
        res.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }

    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (int l : res.labels) ++counts[static_cast<std::size_t>(l)];
    // Empty cluster repair: hand the empty centroid the point farthest from its own.
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i)
        if (counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(i)])] > 1 &&
            (far < 0 || cost(i) > cost(far)))
          far = i;
      if (far < 0) break;
      --counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(far)])];
      res.labels[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      cost(far) = 0;
      changed = true;
    }
    if (!changed && it > 0) break;

    centers.setZero();
    for (Eigen::Index i = 0; i < n; ++i) centers.row(res.labels[static_cast<std::size_t>(i)]) += points.row(i);
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

    double wcss = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      wcss += sq_dist(points, i, centers, res.labels[static_cast<std::size_t>(i)]);
    res.trace.push_back(wcss);
    res.wcss = wcss;
  }
  return res;
}

}  // namespace

KMeansResult kmeans(const MatrixXd& points, int k, std::uint64_t seed, const KMeansOptions& opts) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n)
    throw std::invalid_argument("cluster: k-means needs 1 <= k <= n, got k=" + std::to_string(k) +
                                ", n=" + std::to_string(n));
  if (opts.restarts < 1 || opts.iterations < 1)
    throw std::invalid_argument("cluster: restarts and iterations must be >= 1");
  Xoshiro256pp stream(seed);
  KMeansResult best;
  for (int r = 0; r < opts.restarts; ++r) {
    Xoshiro256pp rng = stream;
    stream.jump();
    auto res = lloyd(points, seed_plus_plus(points, k, rng), opts.iterations);
    if (r == 0 || res.wcss < best.wcss) best = std::move(res);
  }
  return best;
}

ClusterResult spectral_cluster(const MatrixXd& s, int k, std::uint64_t seed,
                               const SpectralOptions& opts) {
  const Eigen::Index n = s.rows();
  if (s.cols() != n) throw ShapeError("cluster: similarity must be square");
  if (k < 2 || k > n)
    throw std::invalid_argument("cluster: spectral clustering needs 2 <= k <= n, got k=" +
                                std::to_string(k));
  const VectorXd deg = s.rowwise().sum();
  const VectorXd dinv = deg.unaryExpr([](double d) { return 1.0 / std::sqrt(d > 0 ? d : kDegreeFloor); });
  MatrixXd lsym = -(dinv.asDiagonal() * s * dinv.asDiagonal());
  lsym.diagonal().array() += 1.0;
  lsym = (0.5 * (lsym + lsym.transpose())).eval();

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(lsym);
  if (eig.info() != Eigen::Success) throw NumericalError("cluster: eigensolver failed");

  ClusterResult out;
  out.k = k;
  out.eigenvalues = eig.eigenvalues();
  out.embedding = eig.eigenvectors().leftCols(k);
  if (opts.row_normalize)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = out.embedding.row(i).norm();
      if (norm > 0) out.embedding.row(i) /= norm;
    }
  out.labels = kmeans(out.embedding, k, seed, opts.kmeans).labels;
  return out;
}

}  // namespace unfold_ssc
