#include "fdrsmooth/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace fdrsmooth {

SiteGraph::SiteGraph(std::size_t num_nodes, std::vector<std::pair<NodeId, NodeId>> pairs)
    : num_nodes_(num_nodes) {
  edges_.reserve(pairs.size());
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(pairs.size() * 2);
  for (auto [j, k] : pairs) {
    if (j >= num_nodes || k >= num_nodes) {
      throw std::invalid_argument("edge (" + std::to_string(j) + ", " + std::to_string(k) +
                                  ") has an endpoint outside [0, " +
                                  std::to_string(num_nodes) + ")");
    }
    if (j == k) {
      throw std::invalid_argument("self-loop at node " + std::to_string(j));
    }
    if (j > k) std::swap(j, k);
    const std::uint64_t key = static_cast<std::uint64_t>(j) * num_nodes + k;
    if (!seen.insert(key).second) {
      throw std::invalid_argument("duplicate edge (" + std::to_string(j) + ", " +
                                  std::to_string(k) + ")");
    }
    edges_.push_back({j, k});
  }

  std::vector<std::size_t> degree(num_nodes, 0);
  for (const Edge& e : edges_) {
    ++degree[e.lo];
    ++degree[e.hi];
  }
  offsets_.assign(num_nodes + 1, 0);
  for (std::size_t i = 0; i < num_nodes; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_[num_nodes]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    adjacency_[fill[e.lo]++] = e.hi;
    adjacency_[fill[e.hi]++] = e.lo;
  }

  is_chain_ = num_nodes >= 2 && edges_.size() == num_nodes - 1;
  for (std::size_t i = 0; is_chain_ && i < edges_.size(); ++i) {
    is_chain_ = edges_[i].lo == i && edges_[i].hi == i + 1;
  }
}

SiteGraph build_grid_graph(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(rows * (cols - 1) + cols * (rows - 1));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const NodeId id = grid_node(r, c, cols);
      if (c + 1 < cols) pairs.emplace_back(id, id + 1);
      if (r + 1 < rows) pairs.emplace_back(id, id + cols);
    }
  }
  return SiteGraph(rows * cols, std::move(pairs));
}

IncidenceMatrix::IncidenceMatrix(const SiteGraph& graph)
    : num_nodes_(graph.num_nodes()), edges_(graph.edges().begin(), graph.edges().end()) {}

void IncidenceMatrix::apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  out.resize(static_cast<Eigen::Index>(edges_.size()));
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = x[edges_[i].lo] - x[edges_[i].hi];
  }
}

Eigen::VectorXd IncidenceMatrix::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out;
  apply(x, out);
  return out;
}

void IncidenceMatrix::apply_transpose(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  out.setZero(static_cast<Eigen::Index>(num_nodes_));
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const double vi = v[static_cast<Eigen::Index>(i)];
    out[edges_[i].lo] += vi;
    out[edges_[i].hi] -= vi;
  }
}

Eigen::VectorXd IncidenceMatrix::apply_transpose(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out;
  apply_transpose(v, out);
  return out;
}

double IncidenceMatrix::l1_of_differences(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (const Edge& e : edges_) total += std::abs(x[e.lo] - x[e.hi]);
  return total;
}

Eigen::SparseMatrix<double> IncidenceMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto row = static_cast<int>(i);
    triplets.emplace_back(row, static_cast<int>(edges_[i].lo), 1.0);
    triplets.emplace_back(row, static_cast<int>(edges_[i].hi), -1.0);
  }
  Eigen::SparseMatrix<double> d(static_cast<Eigen::Index>(edges_.size()),
                                static_cast<Eigen::Index>(num_nodes_));
  d.setFromTriplets(triplets.begin(), triplets.end());
  return d;
}

IncidenceMatrix oriented_incidence(const SiteGraph& graph) { return IncidenceMatrix(graph); }

PlateauSet count_plateaus(std::span<const double> values, const SiteGraph& graph,
                          double tolerance) {
  if (values.size() != graph.num_nodes()) {
    throw std::invalid_argument("count_plateaus: value vector length does not match graph");
  }
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("count_plateaus: tolerance must be positive");
  }
  const std::size_t n = graph.num_nodes();
  std::vector<char> checked(n, 0);
  std::deque<NodeId> unchecked;
  PlateauSet result;

  for (NodeId seed = 0; seed < n; ++seed) {
    if (checked[seed]) continue;
    checked[seed] = 1;
    const double lo = values[seed] - tolerance;
    const double hi = values[seed] + tolerance;
    Plateau plateau{{seed}, values[seed]};
    unchecked.push_back(seed);
    while (!unchecked.empty()) {
      const NodeId node = unchecked.front();
      unchecked.pop_front();
      for (NodeId next : graph.neighbors(node)) {
        if (checked[next]) continue;
        const double v = values[next];
        if (lo <= v && v <= hi) {
          checked[next] = 1;
          plateau.nodes.push_back(next);
          unchecked.push_back(next);
        }
      }
    }
    result.plateaus.push_back(std::move(plateau));
  }
  return result;
}

}  // namespace fdrsmooth
