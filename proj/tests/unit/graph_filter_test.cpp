#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "slcgc/graph_filter.hpp"

using namespace slcgc;

namespace {

SparseMatrix path_graph(int n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = a(i + 1, i) = 1.0;
  return oracle::sparse_from_dense(a);
}

}  // namespace

TEST(Laplacian, TwoNodeHandValues) {
  const SparseMatrix l = graph::sym_norm_laplacian(path_graph(2));
  const Eigen::MatrixXd expected = (Eigen::MatrixXd(2, 2) << 1, -1, -1, 1).finished();
  EXPECT_LE((Eigen::MatrixXd(l) - expected).cwiseAbs().maxCoeff(), 1e-15);

  const SparseMatrix lhat = graph::sym_norm_laplacian(graph::self_loop(path_graph(2)));
  const Eigen::MatrixXd expected_hat = (Eigen::MatrixXd(2, 2) << 0.5, -0.5, -0.5, 0.5).finished();
  EXPECT_LE((Eigen::MatrixXd(lhat) - expected_hat).cwiseAbs().maxCoeff(), 1e-15);

  // H = I - L/2 applied to (1, -1).
  const Eigen::MatrixXd x = (Eigen::MatrixXd(2, 1) << 1, -1).finished();
  const Eigen::MatrixXd y = graph::low_pass_filter(x, lhat, {.k = 0.5, .layers = 1});
  EXPECT_NEAR(y(0), 0.5, 1e-15);
  EXPECT_NEAR(y(1), -0.5, 1e-15);
}

TEST(Laplacian, MatchesDenseOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = oracle::random_connected_graph(9, 0.3, rng);
    const Eigen::MatrixXd a_hat = a + Eigen::MatrixXd::Identity(9, 9);
    const Eigen::MatrixXd got = Eigen::MatrixXd(graph::sym_norm_laplacian(graph::self_loop(oracle::sparse_from_dense(a))));
    EXPECT_LE((got - oracle::dense_sym_laplacian(a_hat)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Laplacian, IsolatedNodeNeedsSelfLoop) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  const SparseMatrix sa = oracle::sparse_from_dense(a);
  EXPECT_THROW(graph::sym_norm_laplacian(sa), Error);
  EXPECT_NO_THROW(graph::sym_norm_laplacian(graph::self_loop(sa)));
}

TEST(Laplacian, SelfLoopRejectsAsymmetricOrLoopedInput) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(graph::self_loop(oracle::sparse_from_dense(a)), Error);
  a(1, 0) = 1.0;
  a(0, 0) = 1.0;
  EXPECT_THROW(graph::self_loop(oracle::sparse_from_dense(a)), Error);
}

TEST(Laplacian, Combinatorial) {
  const Eigen::MatrixXd l = Eigen::MatrixXd(graph::combinatorial_laplacian(path_graph(3)));
  const Eigen::MatrixXd expected = (Eigen::MatrixXd(3, 3) << 1, -1, 0, -1, 2, -1, 0, -1, 1).finished();
  EXPECT_EQ(l, expected);
}

TEST(Filter, ZeroLayersIsIdentity) {
  std::mt19937_64 rng(2);
  const SparseMatrix l = graph::sym_norm_laplacian(graph::self_loop(oracle::sparse_from_dense(oracle::random_connected_graph(7, 0.2, rng))));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(7, 3);
  EXPECT_EQ(graph::low_pass_filter(x, l, {.k = 0.5, .layers = 0}), x);
}

TEST(Filter, DegreeScaledConstantIsFixed) {
  // The zero-eigenvector of the normalized Laplacian is D^{1/2} 1.
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd a = oracle::random_connected_graph(10, 0.25, rng) + Eigen::MatrixXd::Identity(10, 10);
  const SparseMatrix l = oracle::sparse_from_dense(oracle::dense_sym_laplacian(a));
  const Eigen::MatrixXd x = a.rowwise().sum().cwiseSqrt();
  EXPECT_LE((graph::low_pass_filter(x, l, {.k = 0.5, .layers = 5}) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Filter, RegularGraphKeepsConstants) {
  // Cycle plus self-loops: every degree is 3, so constants are fixed.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 6; ++i) a(i, (i + 1) % 6) = a((i + 1) % 6, i) = 1.0;
  const SparseMatrix l = graph::sym_norm_laplacian(graph::self_loop(oracle::sparse_from_dense(a)));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(6, 2, 0.7);
  EXPECT_LE((graph::low_pass_filter(x, l, {}) - x).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Filter, Linear) {
  std::mt19937_64 rng(4);
  const SparseMatrix l = graph::sym_norm_laplacian(graph::self_loop(oracle::sparse_from_dense(oracle::random_connected_graph(8, 0.3, rng))));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 2);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Random(8, 2);
  const graph::FilterConfig cfg{.k = 0.25, .layers = 3};
  const Eigen::MatrixXd lhs = graph::low_pass_filter(2.0 * x + y, l, cfg);
  const Eigen::MatrixXd rhs = 2.0 * graph::low_pass_filter(x, l, cfg) + graph::low_pass_filter(y, l, cfg);
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Filter, SmoothnessImprovesWithDepth) {
  std::mt19937_64 rng(5);
  const SparseMatrix l = graph::sym_norm_laplacian(graph::self_loop(oracle::sparse_from_dense(oracle::random_connected_graph(20, 0.1, rng))));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(20, 4);
  double previous = graph::rayleigh(l, x);
  for (int t = 1; t <= 6; ++t) {
    const double now = graph::rayleigh(l, graph::low_pass_filter(x, l, {.k = 0.5, .layers = t}));
    EXPECT_LE(now, previous + 1e-12);
    previous = now;
  }
}

TEST(Filter, ConfigValidation) {
  EXPECT_THROW((graph::FilterConfig{.k = 0.0, .layers = 1}.validate()), Error);
  EXPECT_THROW((graph::FilterConfig{.k = 0.6, .layers = 1}.validate()), Error);
  EXPECT_THROW((graph::FilterConfig{.k = 0.5, .layers = -1}.validate()), Error);
  EXPECT_NO_THROW((graph::FilterConfig{.k = 0.5, .layers = 0}.validate()));
}

TEST(Rayleigh, HandValues) {
  const SparseMatrix l = graph::sym_norm_laplacian(path_graph(2));
  EXPECT_NEAR(graph::rayleigh(l, Eigen::VectorXd((Eigen::VectorXd(2) << 1, -1).finished())), 2.0, 1e-15);
  EXPECT_NEAR(graph::rayleigh(l, Eigen::VectorXd((Eigen::VectorXd(2) << 1, 1).finished())), 0.0, 1e-15);
  const SparseMatrix lhat = graph::sym_norm_laplacian(graph::self_loop(path_graph(2)));
  EXPECT_NEAR(graph::rayleigh(lhat, Eigen::VectorXd((Eigen::VectorXd(2) << 1, -1).finished())), 1.0, 1e-15);
}

TEST(Rayleigh, ScaleInvariantAndRejectsZero) {
  std::mt19937_64 rng(6);
  const SparseMatrix l = graph::sym_norm_laplacian(oracle::sparse_from_dense(oracle::random_connected_graph(6, 0.3, rng)));
  const Eigen::VectorXd x = Eigen::VectorXd::Random(6);
  EXPECT_NEAR(graph::rayleigh(l, x), graph::rayleigh(l, Eigen::VectorXd(-3.5 * x)), 1e-12);
  EXPECT_THROW(graph::rayleigh(l, Eigen::VectorXd(Eigen::VectorXd::Zero(6))), Error);
}
