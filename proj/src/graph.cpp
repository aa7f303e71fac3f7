#include "sgcl/graph.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <string>

namespace sgcl {

Graph Graph::from_edge_pairs(std::span<const EdgePair> pairs, std::size_t num_nodes,
                             bool allow_self_loops) {
  std::vector<std::vector<NodeId>> rows(num_nodes);
  for (const auto& [u, v] : pairs) {
    if (u >= num_nodes || v >= num_nodes) {
      throw InvalidArgument("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    if (u == v) {
      if (allow_self_loops) rows[u].push_back(u);
      continue;
    }
    rows[u].push_back(v);
    rows[v].push_back(u);
  }

  Graph g;
  g.row_offsets_.assign(num_nodes + 1, 0);
  g.degrees_.assign(num_nodes, 0);
  for (std::size_t u = 0; u < num_nodes; ++u) {
    auto& row = rows[u];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    g.degrees_[u] = row.size();
    g.row_offsets_[u + 1] = g.row_offsets_[u] + row.size();
    if (std::binary_search(row.begin(), row.end(), static_cast<NodeId>(u))) ++g.self_loops_;
  }
  g.col_indices_.reserve(g.row_offsets_.back());
  for (const auto& row : rows) g.col_indices_.insert(g.col_indices_.end(), row.begin(), row.end());
  return g;
}

std::size_t Graph::num_edges() const { return (col_indices_.size() - self_loops_) / 2 + self_loops_; }

bool Graph::has_edge(NodeId u, NodeId v) const {
  const auto row = neighbors(u);
  return std::binary_search(row.begin(), row.end(), v);
}

std::vector<EdgePair> Graph::edge_list() const {
  std::vector<EdgePair> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u <= v) out.emplace_back(u, v);
    }
  }
  return out;
}

Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  constexpr NodeId kAbsent = std::numeric_limits<NodeId>::max();
  std::vector<NodeId> local(g.num_nodes(), kAbsent);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= g.num_nodes()) throw InvalidArgument("induced_subgraph: node id out of range");
    if (local[nodes[i]] != kAbsent) throw InvalidArgument("induced_subgraph: duplicate node id");
    local[nodes[i]] = static_cast<NodeId>(i);
  }
  std::vector<EdgePair> pairs;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (NodeId v : g.neighbors(nodes[i])) {
      if (local[v] != kAbsent && local[v] >= i) pairs.emplace_back(static_cast<NodeId>(i), local[v]);
    }
  }
  return {Graph::from_edge_pairs(pairs, nodes.size(), g.has_self_loops()),
          std::vector<NodeId>(nodes.begin(), nodes.end())};
}

std::vector<std::size_t> bfs_distances(const Graph& g, NodeId source) {
  if (source >= g.num_nodes()) throw InvalidArgument("bfs_distances: source out of range");
  constexpr auto kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.num_nodes(), kInf);
  std::queue<NodeId> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop();
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] == kInf) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

Subgraph ego_network(const Graph& g, NodeId center, std::size_t radius) {
  if (center >= g.num_nodes()) throw InvalidArgument("ego_network: center out of range");
  // Bounded BFS so large graphs only touch the neighborhood.
  std::vector<NodeId> members{center};
  std::vector<std::size_t> depth{0};
  std::vector<bool> seen(g.num_nodes(), false);
  seen[center] = true;
  for (std::size_t head = 0; head < members.size(); ++head) {
    if (depth[head] == radius) continue;
    for (NodeId v : g.neighbors(members[head])) {
      if (!seen[v]) {
        seen[v] = true;
        members.push_back(v);
        depth.push_back(depth[head] + 1);
      }
    }
  }
  std::sort(members.begin(), members.end());
  return induced_subgraph(g, members);
}

Subgraph random_walk_subgraph(const Graph& g, NodeId start, const WalkParams& params, Seed seed) {
  if (start >= g.num_nodes()) throw InvalidArgument("random_walk_subgraph: start out of range");
  if (!(params.return_prob >= 0.0 && params.return_prob <= 1.0)) {
    throw InvalidArgument("random_walk_subgraph: return_prob must lie in [0, 1]");
  }
  Rng rng(seed);
  std::vector<NodeId> visited{start};
  std::vector<bool> seen(g.num_nodes(), false);
  seen[start] = true;
  NodeId current = start;
  for (std::size_t step = 0; step < params.steps; ++step) {
    if (visited.size() >= params.max_nodes) break;
    if (uniform01(rng) < params.return_prob) {
      current = start;
      continue;
    }
    const auto row = g.neighbors(current);
    if (row.empty()) break;
    current = row[uniform_int(rng, 0, row.size() - 1)];
    if (!seen[current]) {
      seen[current] = true;
      visited.push_back(current);
    }
  }
  std::sort(visited.begin(), visited.end());
  return induced_subgraph(g, visited);
}

Graph path_graph(std::size_t n) {
  if (n == 0) throw InvalidArgument("path_graph: n must be >= 1");
  std::vector<EdgePair> pairs;
  for (std::size_t i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
  return Graph::from_edge_pairs(pairs, n);
}

Graph cycle_graph(std::size_t n) {
  if (n < 3) throw InvalidArgument("cycle_graph: n must be >= 3");
  std::vector<EdgePair> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(i, (i + 1) % n);
  return Graph::from_edge_pairs(pairs, n);
}

Graph complete_graph(std::size_t n) {
  std::vector<EdgePair> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  return Graph::from_edge_pairs(pairs, n);
}

Graph product_graph(const Graph& a, const Graph& b) {
  if (a.num_nodes() == 0 || b.num_nodes() == 0) throw InvalidArgument("product_graph: empty factor");
  const std::size_t nb = b.num_nodes();
  std::vector<EdgePair> pairs;
  for (std::size_t i = 0; i < a.num_nodes(); ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const auto here = static_cast<NodeId>(i * nb + j);
      for (NodeId jj : b.neighbors(j))
        if (jj > j) pairs.emplace_back(here, static_cast<NodeId>(i * nb + jj));
      for (NodeId ii : a.neighbors(i))
        if (ii > i) pairs.emplace_back(here, static_cast<NodeId>(ii * nb + j));
    }
  }
  return Graph::from_edge_pairs(pairs, a.num_nodes() * nb);
}

Graph disjoint_union(const Graph& a, const Graph& b) {
  auto pairs = a.edge_list();
  const auto shift = static_cast<NodeId>(a.num_nodes());
  for (auto [u, v] : b.edge_list()) pairs.emplace_back(u + shift, v + shift);
  return Graph::from_edge_pairs(pairs, a.num_nodes() + b.num_nodes(),
                                a.has_self_loops() || b.has_self_loops());
}

Graph permute_graph(const Graph& g, std::span<const NodeId> perm) {
  if (perm.size() != g.num_nodes()) throw InvalidArgument("permute_graph: permutation size mismatch");
  std::vector<EdgePair> pairs;
  for (auto [u, v] : g.edge_list()) pairs.emplace_back(perm[u], perm[v]);
  return Graph::from_edge_pairs(pairs, g.num_nodes(), g.has_self_loops());
}

std::vector<std::size_t> connected_components(const Graph& g) {
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> label(g.num_nodes(), kUnset);
  std::size_t next = 0;
  std::queue<NodeId> frontier;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (label[s] != kUnset) continue;
    label[s] = next;
    frontier.push(s);
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop();
      for (NodeId v : g.neighbors(u)) {
        if (label[v] == kUnset) {
          label[v] = next;
          frontier.push(v);
        }
      }
    }
    ++next;
  }
  return label;
}

std::size_t count_components(const Graph& g) {
  const auto labels = connected_components(g);
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

}  // namespace sgcl
