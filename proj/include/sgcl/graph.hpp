#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sgcl/common.hpp"

namespace sgcl {

using NodeId = std::uint32_t;
using EdgePair = std::pair<NodeId, NodeId>;

// Immutable undirected, unweighted graph in compressed row form.
// Each row lists neighbors in ascending order without duplicates; a self-loop
// appears once in its own row and counts once toward the degree.
class Graph {
 public:
  Graph() = default;

  /// Deduplicates and symmetrizes `pairs`. Throws InvalidArgument when an id
  /// is out of range. Self-loops are dropped unless `allow_self_loops`.
  static Graph from_edge_pairs(std::span<const EdgePair> pairs, std::size_t num_nodes,
                               bool allow_self_loops = false);

  std::size_t num_nodes() const { return degrees_.size(); }
  /// Undirected edge count; a self-loop counts as one edge.
  std::size_t num_edges() const;
  bool has_self_loops() const { return self_loops_ > 0; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {col_indices_.data() + row_offsets_[u], col_indices_.data() + row_offsets_[u + 1]};
  }
  std::size_t degree(NodeId u) const { return degrees_[u]; }
  bool has_edge(NodeId u, NodeId v) const;

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<NodeId>& col_indices() const { return col_indices_; }
  const std::vector<std::size_t>& degrees() const { return degrees_; }

  /// Canonical (u <= v) edge list in ascending order.
  std::vector<EdgePair> edge_list() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> row_offsets_{0};
  std::vector<NodeId> col_indices_;
  std::vector<std::size_t> degrees_;
  std::size_t self_loops_ = 0;
};

/// A subgraph together with the parent ids of its nodes (node_map[local] = parent id).
struct Subgraph {
  Graph graph;
  std::vector<NodeId> node_map;
};

/// Induced subgraph on `nodes`, keeping the given order as the local numbering.
Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

/// Breadth-first hop distances from `source`; unreachable nodes get SIZE_MAX.
std::vector<std::size_t> bfs_distances(const Graph& g, NodeId source);

/// Induced subgraph on {v : d(center, v) <= radius}, nodes in ascending parent id order.
Subgraph ego_network(const Graph& g, NodeId center, std::size_t radius);

struct WalkParams {
  std::size_t steps = 256;
  double return_prob = 0.8;
  std::size_t max_nodes = 256;
};

// Random walk with restart from `start`. Each step jumps back to `start` with
// probability return_prob, otherwise moves to a uniformly chosen neighbor of
// the current node. Halts when the current node has no neighbors or when
// max_nodes distinct nodes have been collected. The result is the induced
// subgraph on visited nodes in ascending parent id order.
Subgraph random_walk_subgraph(const Graph& g, NodeId start, const WalkParams& params, Seed seed);

Graph path_graph(std::size_t n);
Graph cycle_graph(std::size_t n);
Graph complete_graph(std::size_t n);

/// Cartesian product; node (i, j) maps to i * |V_b| + j.
Graph product_graph(const Graph& a, const Graph& b);

/// Disjoint union, b's nodes shifted by |V_a|.
Graph disjoint_union(const Graph& a, const Graph& b);

/// Relabels node u as perm[u].
Graph permute_graph(const Graph& g, std::span<const NodeId> perm);

/// Component label per node, numbered 0..k-1 in order of first discovery by
/// scanning nodes in ascending id and running BFS from each unlabeled one.
std::vector<std::size_t> connected_components(const Graph& g);
std::size_t count_components(const Graph& g);

}  // namespace sgcl
