#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <random>

#include "asgc/graph.hpp"
#include "oracles.hpp"

namespace asgc {
namespace {

using testing::single_edge;

Graph triangle() { return Graph::from_edges(3, std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}}); }

TEST(Graph, BuildSymmetrizesDedupesAndDropsLoops) {
  const auto g = Graph::from_edges(4, std::vector<Edge>{{0, 1}, {1, 0}, {1, 2}, {2, 2}, {3, 1}, {1, 3}});
  EXPECT_EQ(g.num_nodes(), 4u);
  EXPECT_EQ(g.num_edges(), 3u);
  EXPECT_FALSE(g.has_edge(2, 2));
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const auto nb = g.neighbors(i);
    EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
    EXPECT_EQ(std::adjacent_find(nb.begin(), nb.end()), nb.end());
    for (NodeId j : nb) EXPECT_TRUE(g.has_edge(j, i));
  }
}

TEST(Graph, RejectsOutOfRangeEdge) {
  EXPECT_THROW(Graph::from_edges(2, std::vector<Edge>{{0, 2}}), InvalidArgument);
}

TEST(Degrees, SmallGraphs) {
  EXPECT_EQ(degrees(single_edge()), (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(degrees(triangle()), (std::vector<std::size_t>{2, 2, 2}));
  const auto g = Graph::from_edges(3, std::vector<Edge>{{0, 1}});
  EXPECT_EQ(degrees(g)[2], 0u);
}

TEST(NormalizedAdjacency, SingleEdge) {
  const auto s = normalized_adjacency(single_edge(), false);
  EXPECT_EQ(s.entry(0, 0), 0.0);
  EXPECT_EQ(s.entry(0, 1), 1.0);
  EXPECT_EQ(s.entry(1, 0), 1.0);
  const auto st = normalized_adjacency(single_edge(), true);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(st.entry(i, j), 0.5);
  }
}

TEST(NormalizedAdjacency, PathGraphMatchesDenseConstruction) {
  const auto g = Graph::from_edges(4, std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}});
  const auto s = normalized_adjacency(g, false);
  // Degrees 1,2,2,1.
  EXPECT_NEAR(s.entry(0, 1), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s.entry(1, 2), 0.5, 1e-15);
  EXPECT_NEAR(s.entry(2, 3), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(s.entry(0, 2), 0.0);
  EXPECT_LE((testing::to_dense(s) - testing::dense_normalized(g, false)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(NormalizedAdjacency, IsolatedNodeRowsAreZero) {
  const auto g = Graph::from_edges(3, std::vector<Edge>{{0, 1}});
  for (bool loops : {false, true}) {
    const auto s = normalized_adjacency(g, loops);
    const auto dense = testing::to_dense(s);
    if (loops) {
      EXPECT_DOUBLE_EQ(dense(2, 2), 1.0);  // d' = 1 from the self-loop alone
    } else {
      EXPECT_EQ(dense.row(2).cwiseAbs().sum(), 0.0);
      EXPECT_EQ(dense.col(2).cwiseAbs().sum(), 0.0);
    }
  }
}

TEST(NormalizedAdjacency, SymmetricWithExpectedDiagonalAndSpectrum) {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 10; ++rep) {
    const auto g = testing::connected_random(20 + 18 * static_cast<std::size_t>(rep), 0.08, gen);
    for (bool loops : {false, true}) {
      const auto s = testing::to_dense(normalized_adjacency(g, loops));
      EXPECT_EQ((s - s.transpose()).cwiseAbs().maxCoeff(), 0.0);
      for (Eigen::Index i = 0; i < s.rows(); ++i) {
        if (loops) EXPECT_GT(s(i, i), 0.0);
        else EXPECT_EQ(s(i, i), 0.0);
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
      EXPECT_LE(eig.eigenvalues().cwiseAbs().maxCoeff(), 1.0 + 1e-9);
    }
  }
}

TEST(Propagate, SmallExamples) {
  Eigen::MatrixXd x(2, 1);
  x << 1, -1;
  const auto swapped = propagate(normalized_adjacency(single_edge(), false), x);
  EXPECT_EQ(swapped(0, 0), -1.0);
  EXPECT_EQ(swapped(1, 0), 1.0);
  const auto smoothed = propagate(normalized_adjacency(single_edge(), true), x);
  EXPECT_EQ(smoothed(0, 0), 0.0);
  EXPECT_EQ(smoothed(1, 0), 0.0);
}

TEST(Propagate, MatchesDenseProduct) {
  std::mt19937_64 gen(11);
  for (std::size_t n : {50u, 120u, 200u}) {
    const auto g = testing::erdos_renyi(n, 0.06, gen);
    const Eigen::MatrixXd x = testing::random_matrix(static_cast<Eigen::Index>(n), 7, gen);
    for (bool loops : {false, true}) {
      const auto op = normalized_adjacency(g, loops);
      const Eigen::MatrixXd want = testing::dense_normalized(g, loops) * x;
      const Eigen::MatrixXd got = propagate(op, x);
      EXPECT_LE((got - want).norm(), 1e-12 * want.norm());
      EXPECT_EQ(propagate(op, x, 4), got);  // thread count cannot change results
    }
  }
}

TEST(Propagate, DimensionMismatch) {
  EXPECT_THROW(propagate(normalized_adjacency(single_edge(), false), Eigen::MatrixXd::Zero(3, 1)),
               DimensionMismatch);
}

TEST(QuadraticForm, SingleEdgeHandComputation) {
  Eigen::VectorXd x(2);
  x << 1, -1;
  EXPECT_NEAR(laplacian_quadratic_form(single_edge(), x), 4.0, 1e-15);
  EXPECT_NEAR(testing::edge_sum_quadratic_form(single_edge(), x), 4.0, 1e-15);
}

TEST(QuadraticForm, ScaledOnesIsNullVector) {
  std::mt19937_64 gen(3);
  const auto g = testing::connected_random(40, 0.1, gen);
  Eigen::VectorXd x(40);
  for (Eigen::Index i = 0; i < 40; ++i) x(i) = std::sqrt(static_cast<double>(g.degree(static_cast<std::size_t>(i))));
  EXPECT_NEAR(laplacian_quadratic_form(g, x), 0.0, 1e-12);
}

TEST(QuadraticForm, ErdosRenyiBothSidesAgree) {
  std::mt19937_64 gen(30);
  const auto g = testing::connected_random(30, 0.15, gen);
  const Eigen::VectorXd x = testing::random_matrix(30, 1, gen);
  const double lhs = laplacian_quadratic_form(g, x);
  const double rhs = testing::edge_sum_quadratic_form(g, x);
  EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
}

TEST(QuadraticForm, RejectsIsolatedNodes) {
  const auto g = Graph::from_edges(3, std::vector<Edge>{{0, 1}});
  EXPECT_THROW(laplacian_quadratic_form(g, Eigen::VectorXd::Ones(3)), InvalidArgument);
}

}  // namespace
}  // namespace asgc
