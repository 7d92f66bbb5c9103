#include <doctest.h>

#include "oracles.hpp"

#include "unfold_ssc/graph.hpp"

using namespace unfold_ssc;

TEST_CASE("knn on a line") {
  MatrixXd pts(1, 3);
  pts << 0, 1, 3;
  const auto a = knn_adjacency(pts, 1);
  MatrixXd expect(3, 3);
  expect << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  CHECK(a.entries == expect);
  CHECK(a.k == 1);
}

TEST_CASE("knn with duplicate columns") {
  MatrixXd pts(2, 4);
  pts << 0, 0, 5, 5, 1, 1, 2, 2;
  const auto a = knn_adjacency(pts, 1);
  CHECK(a.entries(0, 1) == 1);
  CHECK(a.entries(2, 3) == 1);
  CHECK(a.entries == a.entries.transpose());
  CHECK(a.entries.sum() == 4);
}

TEST_CASE("knn ties go to the smaller index") {
  // Point 0 is equidistant from 1 and 2; point 2 prefers 3.
  MatrixXd pts(1, 4);
  pts << 0, -1, 1, 1.2;
  const auto a = knn_adjacency(pts, 1);
  CHECK(a.entries(0, 1) == 1);
  CHECK(a.entries(0, 2) == 0);
}

TEST_CASE("knn matches exhaustive distance sort") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    oracle::Gen g(seed);
    const MatrixXd pts = g.gaussian(4, 10);
    const int k = 1 + static_cast<int>(seed % 5);
    const auto a = knn_adjacency(pts, k);
    CHECK(a.entries == oracle::knn_bruteforce(pts, k));
    CHECK(a.entries.diagonal().isZero(0));
    for (Eigen::Index i = 0; i < 10; ++i) CHECK(a.entries.row(i).sum() >= k);
  }
}

TEST_CASE("knn invariant under feature permutation") {
  oracle::Gen g(11);
  const MatrixXd pts = g.gaussian(6, 15);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.indices() << 3, 0, 5, 1, 4, 2;
  CHECK(knn_adjacency(pts, 4).entries == knn_adjacency(MatrixXd(perm * pts), 4).entries);
}

TEST_CASE("knn size checks") {
  const MatrixXd pts = MatrixXd::Random(2, 4);
  CHECK_THROWS(knn_adjacency(pts, 4));
  CHECK_THROWS(knn_adjacency(pts, 0));
}

TEST_CASE("laplacian examples") {
  Adjacency<double> two{MatrixXd(2, 2), 1};
  two.entries << 0, 1, 1, 0;
  MatrixXd l2(2, 2);
  l2 << 1, -1, -1, 1;
  CHECK(laplacian(two) == l2);

  Adjacency<double> none{MatrixXd::Zero(4, 4), 1};
  CHECK(laplacian(none).isZero(0));

  Adjacency<double> path{MatrixXd(3, 3), 1};
  path.entries << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  MatrixXd l3(3, 3);
  l3 << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK(laplacian(path) == l3);
}

TEST_CASE("laplacian rows sum to zero and it is PSD") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    oracle::Gen g(seed);
    Adjacency<double> a{g.adjacency(12, 0.3), 1};
    const MatrixXd l = laplacian(a);
    CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
    CHECK(l == l.transpose());
    for (int t = 0; t < 5; ++t) {
      const Eigen::VectorXd v = g.gaussian(12, 1);
      CHECK(v.dot(l * v) >= -1e-10);
    }
  }
}

TEST_CASE("structure loss examples") {
  MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  const MatrixXd l = laplacian(Adjacency<double>{a, 1});
  const auto r = structure_loss(MatrixXd(MatrixXd::Identity(2, 2)), l);
  CHECK(r.value == doctest::Approx(4.0));
  CHECK(oracle::pairwise_structure(MatrixXd::Identity(2, 2), a) == 4.0);

  oracle::Gen g(2);
  const auto zero = structure_loss(g.gaussian(5, 5), MatrixXd(MatrixXd::Zero(5, 5)));
  CHECK(zero.value == 0.0);
  CHECK(zero.grad.isZero(0));
  CHECK_THROWS_AS(structure_loss(g.gaussian(3, 4), MatrixXd(MatrixXd::Zero(3, 3))), ShapeError);
}

TEST_CASE("structure loss matches the pairwise sum and finite differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    oracle::Gen g(seed);
    MatrixXd c = g.gaussian(6, 6);
    const auto adj = knn_adjacency(g.gaussian(3, 6), 2);
    const MatrixXd l = laplacian(adj);
    const auto r = structure_loss(c, l);
    CHECK(oracle::rel_err(r.value, oracle::pairwise_structure(c, adj.entries), 0) <= 1e-12);
    auto f = [&] { return oracle::pairwise_structure(c, adj.entries); };
    for (Eigen::Index i = 0; i < c.size(); ++i)
      CHECK(oracle::rel_err(r.grad.data()[i], oracle::central_difference(f, c.data() + i)) <= 1e-6);
  }
}
