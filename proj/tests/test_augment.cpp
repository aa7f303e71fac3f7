#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "sgcl/augment.hpp"

using namespace sgcl;

namespace {

Graph random_graph(std::size_t n, double p, Seed seed) {
  Rng rng(seed);
  std::vector<EdgePair> pairs;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (uniform01(rng) < p) pairs.emplace_back(u, v);
  return Graph::from_edge_pairs(pairs, n);
}

View whole_view(const Graph& g, std::size_t dim) {
  Subgraph sub{g, std::vector<NodeId>(g.num_nodes())};
  std::iota(sub.node_map.begin(), sub.node_map.end(), 0);
  return make_view(std::move(sub), dim);
}

Matrix random_orthogonal(Eigen::Index d, Rng& rng) {
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = standard_normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(d, d);
}

}  // namespace

TEST_CASE("rank thresholds") {
  const std::vector<double> values{0.5, -1.0, 2.0, 0.0};
  CHECK(rank_threshold(values, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK(rank_threshold(values, 1.0) == std::numeric_limits<double>::infinity());
  CHECK(rank_threshold(values, 0.25) == -1.0);
  CHECK(rank_threshold(values, 0.3) == 0.0);
  CHECK(rank_threshold(values, 0.5) == 0.0);
  CHECK(rank_threshold(values, 0.8) == 2.0);
}

TEST_CASE("full-range crop is the identity") {
  const View v = whole_view(random_graph(20, 0.3, 1), 8);
  const View out = spectral_crop(v, {{0.0, 1.0, 0.0, 1.0}, 1.0});
  CHECK(out.node_map == v.node_map);
  CHECK(out.graph == v.graph);
}

TEST_CASE("crop of the 3x2 grid keeps one end column") {
  const View v = whole_view(product_graph(path_graph(3), path_graph(2)), 6);
  // x is the long-axis cosine (a, a, 0, 0, -a, -a); rank 5 of 6 keeps only x = a.
  const View out = spectral_crop(v, {{0.8, 1.0, 0.0, 1.0}, 1.0}, LaplacianKind::unnormalized);
  const bool left = out.node_map == std::vector<NodeId>{0, 1};
  const bool right = out.node_map == std::vector<NodeId>{4, 5};
  CHECK((left || right));
  CHECK(out.features.rows() == 2);
}

TEST_CASE("crop of G_{7,4} keeps whole contiguous columns") {
  const View v = whole_view(product_graph(path_graph(7), path_graph(4)), 8);
  const View out = spectral_crop(v, {{0.0, 0.5, 0.0, 1.0}, 1.0}, LaplacianKind::unnormalized);
  std::set<NodeId> kept(out.node_map.begin(), out.node_map.end());
  std::set<int> columns;
  for (NodeId id : kept) columns.insert(static_cast<int>(id / 4));
  for (int c : columns)
    for (NodeId j = 0; j < 4; ++j) CHECK(kept.count(static_cast<NodeId>(c * 4) + j) == 1);
  CHECK(*columns.rbegin() - *columns.begin() + 1 == static_cast<int>(columns.size()));
  CHECK(columns.size() < 7);
  CHECK((*columns.begin() == 0 || *columns.rbegin() == 6));
}

TEST_CASE("crop falls back on tiny or disconnected views") {
  const View tiny = whole_view(path_graph(2), 4);
  CHECK(spectral_crop(tiny, {{0.2, 0.8, 0.2, 0.8}, 1.0}).node_map == tiny.node_map);
  const View split = whole_view(disjoint_union(complete_graph(3), complete_graph(3)), 4);
  CHECK(spectral_crop(split, {{0.2, 0.8, 0.2, 0.8}, 1.0}).node_map == split.node_map);
}

TEST_CASE("crop output is a non-empty subset") {
  for (Seed s = 0; s < 30; ++s) {
    const View v = whole_view(random_graph(25, 0.25, s), 8);
    for (const auto& spec : AugmentationConfig::default_crop_specs()) {
      const View out = spectral_crop(v, spec);
      CHECK(!out.node_map.empty());
      CHECK(std::includes(v.node_map.begin(), v.node_map.end(), out.node_map.begin(), out.node_map.end()));
      CHECK(out.features.rows() == static_cast<Eigen::Index>(out.node_map.size()));
    }
  }
}

TEST_CASE("reorder examples") {
  const std::vector<double> lambdas{0.2, 1.4, 1.9};
  CHECK(reorder_permutation(lambdas, 3, 2) == std::vector<std::size_t>{0, 2, 1});
  CHECK(reorder_permutation(lambdas, 3, 1) == std::vector<std::size_t>{0, 1, 2});
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values(12);
    for (double& x : values) x = 2.0 * uniform01(rng);
    std::sort(values.begin(), values.end());
    for (std::size_t r : {1u, 3u, 5u, 7u}) {
      std::vector<std::size_t> identity(12);
      std::iota(identity.begin(), identity.end(), 0);
      CHECK(reorder_permutation(values, 12, r) == identity);
    }
  }
}

TEST_CASE("reorder and mask are column operations") {
  const View v = whole_view(random_graph(12, 0.4, 3), 16);
  const View r = apply_reorder(v, 4);
  auto columns = [](const Matrix& m) {
    std::vector<std::vector<double>> out;
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.emplace_back(m.col(j).data(), m.col(j).data() + m.rows());
    std::sort(out.begin(), out.end());
    return out;
  };
  CHECK(columns(r.features) == columns(v.features));
  CHECK(r.graph == v.graph);

  CHECK(apply_mask(v, 0, 5).features == v.features);
  CHECK(mask_top_columns(v, 16).features.norm() == 0.0);

  const View four = whole_view(path_graph(4), 4);
  const View masked = mask_top_columns(four, 2);
  CHECK(masked.features.leftCols(2) == four.features.leftCols(2));
  CHECK(masked.features.rightCols(2).norm() == 0.0);
}

TEST_CASE("procrustes examples") {
  Rng rng(4);
  Matrix x(10, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
  const auto same = procrustes_align(x, x);
  CHECK((same.rotation - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK((same.aligned - x).norm() < 1e-12);

  Matrix rot(2, 2);
  rot << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
  const Matrix bridge = x;
  const Matrix rotated = bridge * rot;
  const auto back = procrustes_align(rotated, bridge);
  CHECK((back.rotation - rot.transpose()).norm() < 1e-10);
  CHECK((rotated * back.rotation - bridge).norm() < 1e-8);

  Matrix flip = Matrix::Identity(2, 2);
  flip(1, 1) = -1.0;
  const auto reflected = procrustes_align(bridge * flip, bridge);
  CHECK((bridge * flip * reflected.rotation - bridge).norm() < 1e-8);
  CHECK(reflected.rotation.determinant() == doctest::Approx(-1.0));
}

TEST_CASE("procrustes optimality and geometry") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix x(10, 3), n(10, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
    for (Eigen::Index i = 0; i < n.size(); ++i) n.data()[i] = standard_normal(rng);
    const auto res = procrustes_align(x, n);
    CHECK((res.rotation.transpose() * res.rotation - Matrix::Identity(3, 3)).norm() < 1e-8);
    CHECK((res.aligned * res.aligned.transpose() - x * x.transpose()).cwiseAbs().maxCoeff() < 1e-8);
    const double best = (res.aligned - n).norm();
    for (int k = 0; k < 1000; ++k) CHECK(best <= (x * random_orthogonal(3, rng) - n).norm() + 1e-12);
  }
}

TEST_CASE("procrustes with mismatched widths aligns the leading columns") {
  Rng rng(2);
  Matrix x(6, 4), n(6, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
  for (Eigen::Index i = 0; i < n.size(); ++i) n.data()[i] = standard_normal(rng);
  const auto res = procrustes_align(x, n);
  CHECK(res.rotation.rows() == 2);
  CHECK(res.aligned.rightCols(2) == x.rightCols(2));
}

TEST_CASE("similarity filter examples") {
  Vector a(2), b(2), c(2);
  a << 1, 0;
  b << 0, 1;
  c << 0.8, 0.6;
  CHECK(similarity_accept(a, a, 0.3, FilterMode::similar));
  CHECK_FALSE(similarity_accept(a, b, 0.3, FilterMode::similar));
  CHECK(similarity_accept(a, b, 0.3, FilterMode::diverse));
  CHECK(similarity_accept(a, c, 0.3, FilterMode::similar));
  CHECK(similarity_accept(c, a, 0.3, FilterMode::similar));
  CHECK(similarity_accept(Vector::Zero(2), a, 0.3, FilterMode::similar));
  // c = 1 leaves the threshold at cos > 0.
  CHECK_FALSE(similarity_accept(a, -a, 1.0, FilterMode::similar));
  CHECK(similarity_accept(a, c, 1.0, FilterMode::similar));
}

TEST_CASE("disabled pipeline returns two raw walk views") {
  const Graph g = random_graph(60, 0.1, 5);
  const AugmentationConfig cfg = AugmentationConfig::disabled();
  const auto [a, b] = generate_view_pair(g, 7, cfg, nullptr, 99);
  const auto ego = ego_network(g, 7, cfg.ego_radius);
  for (const View* v : {&a, &b}) {
    CHECK(std::includes(ego.node_map.begin(), ego.node_map.end(), v->node_map.begin(), v->node_map.end()));
    CHECK(std::find(v->node_map.begin(), v->node_map.end(), NodeId{7}) != v->node_map.end());
    CHECK(v->features == make_view(induced_subgraph(g, v->node_map), cfg.embed_dim).features);
  }
}

TEST_CASE("full pipeline is deterministic and never empty") {
  const Graph g = random_graph(80, 0.08, 6);
  AugmentationConfig cfg;
  const auto global = compute_global_embedding(g, cfg.embed_dim);
  for (Seed s = 0; s < 25; ++s) {
    const NodeId center = static_cast<NodeId>(s * 3 % 80);
    const auto first = generate_view_pair(g, center, cfg, &global, s);
    const auto second = generate_view_pair(g, center, cfg, &global, s);
    CHECK(first.first.features == second.first.features);
    CHECK(first.second.features == second.second.features);
    CHECK(first.first.node_map == second.first.node_map);
    for (const View* v : {&first.first, &first.second}) {
      CHECK(!v->node_map.empty());
      CHECK(v->features.rows() == static_cast<Eigen::Index>(v->graph.num_nodes()));
      CHECK(v->features.cols() == static_cast<Eigen::Index>(cfg.embed_dim));
      CHECK(v->features.allFinite());
    }
  }
  AugmentationConfig strict = cfg;
  strict.p_filter = 1.0;
  strict.filter_c = 1.0;
  const auto pair = generate_view_pair(g, 3, strict, &global, 1);
  CHECK(!pair.first.node_map.empty());
  CHECK_THROWS_AS(generate_view_pair(g, 3, strict, nullptr, 1), InvalidArgument);
}

TEST_CASE("config validation") {
  AugmentationConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.resolved_mask_max() == 32);
  cfg.p_mask = 0.8;
  cfg.p_reorder = 0.3;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  AugmentationConfig crops;
  crops.crop_specs.push_back({{0.0, 1.0, 0.0, 1.0}, 0.8});
  CHECK_THROWS_AS(crops.validate(), InvalidArgument);
}
