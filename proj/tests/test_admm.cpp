#include <doctest.h>

#include "oracles.hpp"

#include "unfold_ssc/admm.hpp"

using namespace unfold_ssc;

namespace {
const MatrixXd I2 = MatrixXd::Identity(2, 2);
}

TEST_CASE("precompute examples") {
  auto ops = precompute(I2, 1.0);
  CHECK((ops.b - I2 / 3.0).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((ops.w - 2.0 * I2 / 3.0).cwiseAbs().maxCoeff() <= 1e-15);

  ops = precompute(MatrixXd(MatrixXd::Zero(3, 2)), 2.0);
  CHECK((ops.b - I2 / 2.0).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(ops.w.isZero(0));

  oracle::Gen g(1);
  const MatrixXd y = g.gaussian(4, 6);
  ops = precompute(y, 0.5);
  const MatrixXd gram = 2 * y.transpose() * y + 0.5 * MatrixXd::Identity(6, 6);
  CHECK(oracle::rel_fro(gram * ops.b, MatrixXd::Identity(6, 6)) <= 1e-10);
  CHECK(oracle::rel_fro(gram * ops.w, 2 * y.transpose()) <= 1e-10);

  CHECK_THROWS_AS(precompute(y, 0.0), ConfigError);
  CHECK_THROWS_AS(precompute(y, -1.0), ConfigError);
}

TEST_CASE("C-step examples") {
  const auto ops = precompute(I2, 1.0);
  const MatrixXd zero = MatrixXd::Zero(2, 2);
  CHECK((step_c(ops, I2, zero, zero, 1.0) - 2.0 * I2 / 3.0).cwiseAbs().maxCoeff() <= 1e-15);

  oracle::Gen g(2);
  const MatrixXd x = g.gaussian(3, 5);
  const auto ops5 = precompute(x, 0.7);
  const MatrixXd z = g.gaussian(5, 5);
  CHECK(step_c(ops5, x, z, MatrixXd(0.7 * z), 0.7) == ops5.w * x);
}

TEST_CASE("C-step is stationary for the C-subproblem") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    oracle::Gen g(seed);
    const MatrixXd y = g.gaussian(4, 7);
    const MatrixXd x = y;
    const double rho = g.uniform(0.1, 3);
    const MatrixXd z = g.gaussian(7, 7), mu = g.gaussian(7, 7);
    const MatrixXd c = step_c(precompute(y, rho), x, z, mu, rho);
    const MatrixXd grad = 2 * y.transpose() * (y * c - x) + mu + rho * (c - z);
    const double scale = (2 * y.transpose() * x).norm() + mu.norm() + rho * z.norm();
    CHECK(grad.norm() / scale <= 1e-8);
  }
}

TEST_CASE("soft threshold examples") {
  CHECK(soft_threshold(0.5, 0.2) == doctest::Approx(0.3));
  CHECK(soft_threshold(-0.1, 0.2) == 0.0);
  CHECK(soft_threshold(-0.7, 0.2) == doctest::Approx(-0.5));
  CHECK(soft_threshold(0.2, 0.2) == 0.0);
  CHECK_THROWS(soft_threshold(1.0, -0.1));
}

TEST_CASE("soft threshold properties") {
  oracle::Gen g(3);
  for (int i = 0; i < 2000; ++i) {
    const double x = g.uniform(-3, 3), y = g.uniform(-3, 3), t = g.uniform(0, 1);
    CHECK(soft_threshold(-x, t) == -soft_threshold(x, t));
    CHECK(std::abs(soft_threshold(x, t)) <= std::abs(x));
    CHECK(std::abs(soft_threshold(x, t) - soft_threshold(y, t)) <= std::abs(x - y) + 1e-15);
  }
}

TEST_CASE("Z-step") {
  const MatrixXd zero = MatrixXd::Zero(3, 3);
  CHECK(step_z(zero, zero, 1.0, 0.3, true).isZero(0));

  oracle::Gen g(4);
  const MatrixXd c = g.gaussian(5, 5), mu = g.gaussian(5, 5);
  MatrixXd expect = c + mu / 2.0;
  expect.diagonal().setZero();
  CHECK(step_z(c, mu, 2.0, 0.0, true) == expect);

  const MatrixXd z = step_z(c, mu, 2.0, 0.2, true);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j)
      CHECK(z(i, j) == (i == j ? 0.0 : oracle::soft_threshold(c(i, j) + mu(i, j) / 2.0, 0.1)));
}

TEST_CASE("mu-step") {
  MatrixXd diff(2, 2);
  diff << 0, 1, 0, 0;
  const MatrixXd zero = MatrixXd::Zero(2, 2);
  MatrixXd expect(2, 2);
  expect << 0, 0.5, 0, 0;
  CHECK(step_mu(zero, diff, zero, 0.5) == expect);

  oracle::Gen g(5);
  const MatrixXd mu = g.gaussian(3, 3), c = g.gaussian(3, 3), d1 = g.gaussian(3, 3), d2 = g.gaussian(3, 3);
  CHECK(step_mu(mu, c, c, 0.9) == mu);
  const MatrixXd z3 = MatrixXd::Zero(3, 3);
  const MatrixXd two = step_mu(step_mu(mu, d1, z3, 1.0), d2, z3, 1.0);
  CHECK(oracle::rel_fro(two, mu + d1 + d2) <= 1e-14);
}

TEST_CASE("one iteration on the 2x2 identity") {
  ClassicConfig<double> cfg;
  cfg.lambda = 0.1;
  cfg.rho = 1.0;
  cfg.iterations = 1;
  const auto st = solve<double>(I2, cfg);
  CHECK((st.c - 2.0 * I2 / 3.0).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(st.z.isZero(0));
  CHECK((st.mu - st.c).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(st.primal_residual.size() == 1);
}

TEST_CASE("solve keeps diag(Z) zero and validates config") {
  oracle::Gen g(6);
  const MatrixXd x = g.gaussian(5, 9);
  ClassicConfig<double> cfg;
  cfg.iterations = 30;
  const auto st = solve(x, cfg);
  CHECK(st.z.diagonal().isZero(0));
  CHECK(st.primal_residual.size() == 30);
  cfg.rho = 0;
  CHECK_THROWS_AS(solve(x, cfg), ConfigError);
  cfg.rho = 1;
  cfg.iterations = 0;
  CHECK_THROWS_AS(solve(x, cfg), ConfigError);
}

TEST_CASE("solve reports the failing iteration") {
  MatrixXd x = MatrixXd::Identity(2, 2);
  ClassicConfig<double> cfg;
  cfg.iterations = 3;
  MatrixXd z0 = MatrixXd::Zero(2, 2);
  z0(0, 1) = std::numeric_limits<double>::infinity();
  try {
    solve(x, cfg, std::optional<MatrixXd>(z0));
    FAIL("expected an error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("iteration 0") != std::string::npos);
  }
}

TEST_CASE("noiseless subspaces give block-supported coefficients") {
  // Three 2-dim subspaces in R^20, 15 points each.
  oracle::Gen g(7);
  MatrixXd x(20, 45);
  for (int s = 0; s < 3; ++s) {
    const MatrixXd basis = Eigen::HouseholderQR<MatrixXd>(g.gaussian(20, 2)).householderQ() * MatrixXd::Identity(20, 2);
    for (int j = 0; j < 15; ++j) {
      Eigen::VectorXd coef = g.gaussian(2, 1);
      x.col(s * 15 + j) = basis * coef.normalized();
    }
  }
  ClassicConfig<double> cfg;
  cfg.lambda = 0.01;
  cfg.iterations = 200;
  const auto st = solve(x, cfg);
  double inside = 0, total = 0;
  for (Eigen::Index i = 0; i < 45; ++i)
    for (Eigen::Index j = 0; j < 45; ++j) {
      total += std::abs(st.c(i, j));
      if (i / 15 == j / 15) inside += std::abs(st.c(i, j));
    }
  CHECK(1 - inside / total <= 0.05);
}

TEST_CASE("primal residual eventually decreases") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    oracle::Gen g(seed);
    ClassicConfig<double> cfg;
    cfg.iterations = 100;
    const auto st = solve(g.gaussian(6, 12), cfg);
    CHECK(st.primal_residual.back() < st.primal_residual.front());
  }
}

TEST_CASE("fixed point without sparsity or diagonal constraint") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    oracle::Gen g(seed);
    const MatrixXd x = g.gaussian(4, 6);
    ClassicConfig<double> cfg;
    cfg.lambda = 0;
    cfg.iterations = 500;
    cfg.zero_diagonal = false;
    const auto st = solve(x, cfg);
    CHECK((st.c - st.z).norm() <= 1e-6);
    CHECK((2 * x.transpose() * (x * st.c - x) + st.mu).norm() <= 1e-6);
  }
}
