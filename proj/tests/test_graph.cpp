#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "fdrsmooth/graph.hpp"
#include "fdrsmooth/sim.hpp"
#include "oracles.hpp"

namespace fdrsmooth {
namespace {

TEST(GridGraph, ChainAndSquareCounts) {
  const auto chain = build_grid_graph(1, 5);
  EXPECT_EQ(chain.num_nodes(), 5u);
  EXPECT_EQ(chain.num_edges(), 4u);
  EXPECT_TRUE(chain.is_chain());

  const auto square = build_grid_graph(2, 2);
  EXPECT_EQ(square.num_nodes(), 4u);
  EXPECT_EQ(square.num_edges(), 4u);
  EXPECT_FALSE(square.is_chain());

  const auto big = build_grid_graph(128, 128);
  EXPECT_EQ(big.num_nodes(), 16384u);
  EXPECT_EQ(big.num_edges(), 2u * 128u * 127u);
}

TEST(GridGraph, EdgeCountFormula) {
  for (std::size_t r = 1; r <= 6; ++r) {
    for (std::size_t c = 1; c <= 6; ++c) {
      EXPECT_EQ(build_grid_graph(r, c).num_edges(), r * (c - 1) + c * (r - 1));
    }
  }
}

TEST(GridGraph, RowMajorIds) {
  const auto g = build_grid_graph(3, 4);
  const auto n = g.neighbors(grid_node(1, 2, 4));
  std::vector<NodeId> got(n.begin(), n.end());
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, (std::vector<NodeId>{2, 5, 7, 10}));
}

TEST(GridGraph, ZeroDimensionRejected) {
  EXPECT_THROW(build_grid_graph(0, 3), std::invalid_argument);
  EXPECT_THROW(build_grid_graph(3, 0), std::invalid_argument);
}

TEST(SiteGraph, NormalizesAndValidates) {
  const SiteGraph g(3, {{2, 1}, {0, 1}});
  EXPECT_EQ(g.edges()[0], (Edge{1, 2}));
  EXPECT_THROW(SiteGraph(3, {{0, 3}}), std::invalid_argument);
  EXPECT_THROW(SiteGraph(3, {{1, 1}}), std::invalid_argument);
  EXPECT_THROW(SiteGraph(3, {{0, 1}, {1, 0}}), std::invalid_argument);
}

TEST(Incidence, ChainOfThree) {
  const auto d = oriented_incidence(build_grid_graph(1, 3)).to_sparse();
  Eigen::MatrixXd expected(2, 3);
  expected << 1, -1, 0, 0, 1, -1;
  EXPECT_EQ(Eigen::MatrixXd(d), expected);
}

TEST(Incidence, AnnihilatesConstants) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = testing::random_connected_graph(20, 0.2, rng);
    const auto d = oriented_incidence(g);
    EXPECT_EQ(d.apply(Eigen::VectorXd::Ones(20)).cwiseAbs().maxCoeff(), 0.0);
    const Eigen::SparseMatrix<double> s = d.to_sparse();
    for (Eigen::Index row = 0; row < s.rows(); ++row) {
      const Eigen::RowVectorXd r = Eigen::MatrixXd(s).row(row);
      EXPECT_EQ((r.array() != 0.0).count(), 2);
      EXPECT_EQ(r.sum(), 0.0);
      EXPECT_EQ(r.maxCoeff(), 1.0);
    }
  }
}

TEST(Incidence, L1OfDifferencesMatchesEdgeSum) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  const auto g = testing::random_connected_graph(10, 0.3, rng);
  const auto d = oriented_incidence(g);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd beta(10);
    for (auto& b : beta) b = normal(rng);
    double direct = 0.0;
    for (const Edge& e : g.edges()) direct += std::abs(beta[e.lo] - beta[e.hi]);
    EXPECT_NEAR(d.apply(beta).lpNorm<1>(), direct, 1e-12);
    EXPECT_NEAR((testing::dense_incidence(g) * beta).lpNorm<1>(), direct, 1e-12);
    EXPECT_NEAR(d.l1_of_differences(beta), direct, 1e-12);
    // D^T against the dense transpose
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.num_edges()));
    for (auto& x : v) x = normal(rng);
    EXPECT_LT((d.apply_transpose(v) - testing::dense_incidence(g).transpose() * v)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(Plateaus, ConstantFieldIsOnePlateau) {
  const auto g = build_grid_graph(7, 9);
  EXPECT_EQ(count_plateaus(Eigen::VectorXd::Constant(63, -2.5), g).size(), 1u);
}

TEST(Plateaus, TwoSquarePriorHasThreePlateaus) {
  for (const std::size_t side : {64u, 128u}) {
    const auto image = make_prior_image(Scenario::kLarge, side, side);
    const auto logit = image.c.unaryExpr([](double c) { return std::log(c / (1 - c)); });
    EXPECT_EQ(count_plateaus(logit.eval(), image.graph()).size(), 3u);
  }
}

TEST(Plateaus, AlternatingChainSplitsEverywhere) {
  const auto g = build_grid_graph(1, 8);
  Eigen::VectorXd v(8);
  for (int i = 0; i < 8; ++i) v[i] = i % 2;
  EXPECT_EQ(count_plateaus(v, g, 0.1).size(), 8u);
}

TEST(Plateaus, SeparatedRegionsWithEqualValuesAreDistinct) {
  // 0 0 5 0 0 on a chain: the two zero runs are not connected.
  const auto g = build_grid_graph(1, 5);
  Eigen::VectorXd v(5);
  v << 0, 0, 5, 0, 0;
  const auto set = count_plateaus(v, g);
  ASSERT_EQ(set.size(), 3u);
  EXPECT_EQ(set.plateaus[0].nodes, (std::vector<NodeId>{0, 1}));
}

TEST(Plateaus, SeedAnchoredBand) {
  // Values drift by 0.6 tol per step; chaining would merge all four, the
  // seed-anchored band stops once the drift exceeds tol.
  const auto g = build_grid_graph(1, 4);
  Eigen::VectorXd v(4);
  v << 0.0, 0.6, 1.2, 1.8;
  EXPECT_EQ(count_plateaus(v, g, 1.0).size(), 2u);
}

TEST(Plateaus, HugeToleranceMergesConnectedGraph) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const auto g = testing::random_connected_graph(30, 0.1, rng);
  Eigen::VectorXd v(30);
  for (auto& x : v) x = normal(rng);
  const double range = v.maxCoeff() - v.minCoeff();
  EXPECT_EQ(count_plateaus(v, g, range + 1.0).size(), 1u);
}

TEST(Plateaus, RejectsBadInput) {
  const auto g = build_grid_graph(2, 2);
  EXPECT_THROW(count_plateaus(Eigen::VectorXd::Zero(3), g), std::invalid_argument);
  EXPECT_THROW(count_plateaus(Eigen::VectorXd::Zero(4), g, 0.0), std::invalid_argument);
}

// Piecewise-constant fields (levels separated by much more than the band,
// jitter well inside it) on random graphs.
class PlateauProperty : public ::testing::TestWithParam<int> {};

TEST_P(PlateauProperty, PartitionAndRelabelInvariance) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  std::uniform_int_distribution<int> level(0, 3);
  std::uniform_real_distribution<double> jitter(-2e-6, 2e-6);
  const std::size_t n = 40;
  const auto g = testing::random_connected_graph(n, 0.08, rng);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = level(rng) + jitter(rng);

  const auto set = count_plateaus(v, g);
  std::vector<int> owner(n, -1);
  for (std::size_t p = 0; p < set.size(); ++p) {
    for (const NodeId node : set.plateaus[p].nodes) {
      ASSERT_EQ(owner[node], -1) << "node in two plateaus";
      owner[node] = static_cast<int>(p);
      EXPECT_LE(std::abs(v[node] - set.plateaus[p].value), kDefaultPlateauTolerance);
    }
  }
  EXPECT_TRUE(std::all_of(owner.begin(), owner.end(), [](int o) { return o >= 0; }));

  // Apply a random relabelling to graph and values together.
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (const Edge& e : g.edges()) pairs.emplace_back(perm[e.lo], perm[e.hi]);
  Eigen::VectorXd permuted(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) permuted[static_cast<Eigen::Index>(perm[i])] = v[static_cast<Eigen::Index>(i)];
  EXPECT_EQ(count_plateaus(permuted, SiteGraph(n, pairs)).size(), set.size());
}

INSTANTIATE_TEST_SUITE_P(RandomGraphs, PlateauProperty, ::testing::Range(0, 25));

}  // namespace
}  // namespace fdrsmooth
