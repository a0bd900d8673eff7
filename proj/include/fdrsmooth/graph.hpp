#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace fdrsmooth {

using NodeId = std::size_t;

struct Edge {
  NodeId lo;
  NodeId hi;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected graph over test sites. Nodes are dense ids 0..n-1; every stored
/// edge satisfies lo < hi and the edge list is duplicate-free. Edge order is
/// preserved and defines the row order of the incidence matrix.
class SiteGraph {
 public:
  SiteGraph() = default;

  /// Validates and normalizes (j, k) pairs so that j < k. Throws
  /// std::invalid_argument on self-loops, out-of-range endpoints or
  /// duplicate edges.
  SiteGraph(std::size_t num_nodes, std::vector<std::pair<NodeId, NodeId>> pairs);

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const NodeId> neighbors(NodeId node) const noexcept {
    return {adjacency_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
  }
  std::size_t degree(NodeId node) const noexcept { return offsets_[node + 1] - offsets_[node]; }

  /// True when the edges are exactly (0,1), (1,2), ..., (n-2,n-1) in order.
  bool is_chain() const noexcept { return is_chain_; }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  bool is_chain_ = false;
};

/// 4-neighbour lattice. Node id = row * cols + col.
SiteGraph build_grid_graph(std::size_t rows, std::size_t cols);

inline NodeId grid_node(std::size_t row, std::size_t col, std::size_t cols) {
  return row * cols + col;
}

/// Oriented incidence matrix D (m x n): row i carries +1 at the lower
/// endpoint and -1 at the higher endpoint of edge i. Products are evaluated
/// straight from the edge list.
class IncidenceMatrix {
 public:
  explicit IncidenceMatrix(const SiteGraph& graph);

  std::size_t rows() const noexcept { return edges_.size(); }
  std::size_t cols() const noexcept { return num_nodes_; }

  /// out = D * x
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// out = D^T * v
  void apply_transpose(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const;

  /// ||D x||_1
  double l1_of_differences(const Eigen::VectorXd& x) const;

  Eigen::SparseMatrix<double> to_sparse() const;

 private:
  std::size_t num_nodes_;
  std::vector<Edge> edges_;
};

IncidenceMatrix oriented_incidence(const SiteGraph& graph);

struct Plateau {
  std::vector<NodeId> nodes;
  double value;  // value at the seed node
};

struct PlateauSet {
  std::vector<Plateau> plateaus;
  std::size_t size() const noexcept { return plateaus.size(); }
};

inline constexpr double kDefaultPlateauTolerance = 1e-5;

/// Breadth-first flood fill over graph neighbours. Each plateau is grown from
/// the lowest-id unclaimed node, accepting neighbours whose value lies in
/// [seed - tol, seed + tol]; the band stays fixed at the seed. Runs in
/// O(sum of degrees).
PlateauSet count_plateaus(std::span<const double> values, const SiteGraph& graph,
                          double tolerance = kDefaultPlateauTolerance);

inline PlateauSet count_plateaus(const Eigen::VectorXd& values, const SiteGraph& graph,
                                 double tolerance = kDefaultPlateauTolerance) {
  return count_plateaus(std::span<const double>(values.data(), values.size()), graph,
                        tolerance);
}

}  // namespace fdrsmooth
