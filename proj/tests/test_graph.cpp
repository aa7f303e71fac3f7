#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "sgcl/graph.hpp"

using namespace sgcl;

namespace {

std::vector<NodeId> iota_nodes(std::size_t n) {
  std::vector<NodeId> out(n);
  std::iota(out.begin(), out.end(), 0);
  return out;
}

Graph random_graph(std::size_t n, double p, Seed seed) {
  Rng rng(seed);
  std::vector<EdgePair> pairs;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (uniform01(rng) < p) pairs.emplace_back(u, v);
  return Graph::from_edge_pairs(pairs, n);
}

void check_symmetric(const Graph& g) {
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    const auto row = g.neighbors(u);
    CHECK(std::is_sorted(row.begin(), row.end()));
    CHECK(std::adjacent_find(row.begin(), row.end()) == row.end());
    CHECK(row.size() == g.degree(u));
    for (NodeId v : row) CHECK(g.has_edge(v, u));
  }
}

}  // namespace

TEST_CASE("from_edge_pairs deduplicates and symmetrizes") {
  const std::vector<EdgePair> pairs{{0, 1}, {1, 0}, {1, 2}};
  const Graph g = Graph::from_edge_pairs(pairs, 3);
  CHECK(g.num_edges() == 2);
  CHECK(g.degrees() == std::vector<std::size_t>{1, 2, 1});
  CHECK(g == path_graph(3));
  check_symmetric(g);
}

TEST_CASE("from_edge_pairs keeps isolated nodes") {
  const Graph g = Graph::from_edge_pairs(std::vector<EdgePair>{}, 4);
  CHECK(g.num_nodes() == 4);
  CHECK(g.degrees() == std::vector<std::size_t>{0, 0, 0, 0});
}

TEST_CASE("from_edge_pairs drops self-loops unless allowed") {
  const std::vector<EdgePair> pairs{{0, 0}, {0, 1}};
  const Graph dropped = Graph::from_edge_pairs(pairs, 2, false);
  CHECK(dropped.num_edges() == 1);
  CHECK_FALSE(dropped.has_self_loops());
  CHECK(dropped == path_graph(2));
  const Graph kept = Graph::from_edge_pairs(pairs, 2, true);
  CHECK(kept.num_edges() == 2);
  CHECK(kept.has_self_loops());
  CHECK(kept.has_edge(0, 0));
}

TEST_CASE("from_edge_pairs rejects out-of-range ids") {
  const std::vector<EdgePair> pairs{{0, 3}};
  CHECK_THROWS_AS(Graph::from_edge_pairs(pairs, 3), InvalidArgument);
}

TEST_CASE("ego_network examples") {
  const Graph p5 = path_graph(5);
  CHECK(ego_network(p5, 2, 1).node_map == std::vector<NodeId>{1, 2, 3});
  CHECK(ego_network(p5, 2, 1).graph == path_graph(3));

  const auto single = ego_network(p5, 3, 0);
  CHECK(single.node_map == std::vector<NodeId>{3});
  CHECK(single.graph.num_edges() == 0);

  const auto ego = ego_network(cycle_graph(4), 0, 1);
  CHECK(ego.node_map == std::vector<NodeId>{0, 1, 3});
  CHECK(ego.graph.num_edges() == 2);
}

TEST_CASE("ego_network matches a brute-force distance filter") {
  for (Seed s = 0; s < 20; ++s) {
    const std::size_t n = 5 + s * 4;
    const Graph g = random_graph(n, 0.08, s);
    // Floyd-Warshall distances as the independent oracle.
    const std::size_t inf = n + 1;
    std::vector<std::vector<std::size_t>> d(n, std::vector<std::size_t>(n, inf));
    for (NodeId u = 0; u < n; ++u) {
      d[u][u] = 0;
      for (NodeId v : g.neighbors(u)) d[u][v] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    for (std::size_t r = 0; r < 4; ++r) {
      const NodeId c = static_cast<NodeId>(s % n);
      std::vector<NodeId> expected;
      for (NodeId v = 0; v < n; ++v)
        if (d[c][v] <= r) expected.push_back(v);
      const auto ego = ego_network(g, c, r);
      CHECK(ego.node_map == expected);
      check_symmetric(ego.graph);
      for (NodeId a = 0; a < expected.size(); ++a)
        for (NodeId b = 0; b < expected.size(); ++b)
          CHECK(ego.graph.has_edge(a, b) == g.has_edge(expected[a], expected[b]));
    }
  }
}

TEST_CASE("random walk edge cases") {
  const Graph single = path_graph(1);
  const auto view = random_walk_subgraph(single, 0, {}, 7);
  CHECK(view.node_map == std::vector<NodeId>{0});

  const Graph g = random_graph(30, 0.2, 3);
  WalkParams stay;
  stay.return_prob = 1.0;
  CHECK(random_walk_subgraph(g, 4, stay, 11).node_map == std::vector<NodeId>{4});
}

TEST_CASE("random walk on K5 with no return visits every node") {
  WalkParams params;
  params.steps = 512;
  params.return_prob = 0.0;
  params.max_nodes = 256;
  for (Seed s = 0; s < 20; ++s) {
    CHECK(random_walk_subgraph(complete_graph(5), 0, params, s).node_map.size() == 5);
  }
}

TEST_CASE("random walk stays inside the steps-ego network and is deterministic") {
  const Graph g = random_graph(80, 0.04, 9);
  WalkParams params;
  params.steps = 12;
  params.return_prob = 0.3;
  for (Seed s = 0; s < 30; ++s) {
    const NodeId start = static_cast<NodeId>(s % 80);
    const auto walk = random_walk_subgraph(g, start, params, s);
    const auto ego = ego_network(g, start, params.steps);
    std::set<NodeId> allowed(ego.node_map.begin(), ego.node_map.end());
    CHECK(std::find(walk.node_map.begin(), walk.node_map.end(), start) != walk.node_map.end());
    for (NodeId v : walk.node_map) CHECK(allowed.count(v) == 1);
    const auto again = random_walk_subgraph(g, start, params, s);
    CHECK(again.node_map == walk.node_map);
    CHECK(again.graph == walk.graph);
  }
}

TEST_CASE("random walk respects max_nodes") {
  WalkParams params;
  params.return_prob = 0.0;
  params.max_nodes = 7;
  params.steps = 1000;
  for (Seed s = 0; s < 10; ++s) CHECK(random_walk_subgraph(complete_graph(40), 0, params, s).node_map.size() == 7);
}

TEST_CASE("path graph constructor") {
  CHECK(path_graph(1).num_nodes() == 1);
  CHECK(path_graph(1).num_edges() == 0);
  CHECK(path_graph(4).degrees() == std::vector<std::size_t>{1, 2, 2, 1});
}

TEST_CASE("product graph examples") {
  CHECK(product_graph(path_graph(2), path_graph(2)) == permute_graph(cycle_graph(4), std::vector<NodeId>{0, 1, 3, 2}));
  const Graph grid = product_graph(path_graph(3), path_graph(2));
  CHECK(grid.num_nodes() == 6);
  CHECK(grid.num_edges() == 7);
  // (i, j) ~ (i, j') and (i, j) ~ (i', j) only.
  for (NodeId a = 0; a < 6; ++a)
    for (NodeId b = 0; b < 6; ++b) {
      const int ia = a / 2, ja = a % 2, ib = b / 2, jb = b % 2;
      const bool expected = (ia == ib && std::abs(ja - jb) == 1) || (ja == jb && std::abs(ia - ib) == 1);
      CHECK(grid.has_edge(a, b) == expected);
    }
  const Graph g = random_graph(12, 0.3, 5);
  CHECK(product_graph(path_graph(1), g) == g);
}

TEST_CASE("connected components") {
  CHECK(count_components(path_graph(6)) == 1);
  CHECK(count_components(Graph::from_edge_pairs(std::vector<EdgePair>{}, 4)) == 4);
  const Graph two = disjoint_union(complete_graph(3), complete_graph(3));
  const auto labels = connected_components(two);
  CHECK(labels == std::vector<std::size_t>{0, 0, 0, 1, 1, 1});
}

TEST_CASE("induced subgraph keeps the requested order") {
  const Graph p4 = path_graph(4);
  const std::vector<NodeId> nodes{3, 2, 0};
  const auto sub = induced_subgraph(p4, nodes);
  CHECK(sub.node_map == nodes);
  CHECK(sub.graph.has_edge(0, 1));
  CHECK_FALSE(sub.graph.has_edge(1, 2));
}

TEST_CASE("permute_graph preserves structure") {
  const Graph g = random_graph(15, 0.3, 2);
  std::vector<NodeId> perm = iota_nodes(15);
  std::reverse(perm.begin(), perm.end());
  const Graph h = permute_graph(g, perm);
  check_symmetric(h);
  for (NodeId u = 0; u < 15; ++u)
    for (NodeId v = 0; v < 15; ++v) CHECK(g.has_edge(u, v) == h.has_edge(perm[u], perm[v]));
}
