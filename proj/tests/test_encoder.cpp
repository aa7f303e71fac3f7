#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgcl/encoder.hpp"

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

RowMatrix random_features(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  RowMatrix x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
  return x;
}

void randomize_biases(GinParams& params, Rng& rng) {
  const auto& off = params.offsets();
  const auto h = params.dims().hidden;
  auto fill = [&](std::size_t at) {
    for (std::size_t i = 0; i < h; ++i) params.values()[at + i] = 0.3 * standard_normal(rng);
  };
  fill(off.input_bias);
  for (std::size_t l = 0; l < params.dims().layers; ++l) {
    fill(off.b1[l]);
    fill(off.b2[l]);
  }
}

View view_of(const Graph& g, std::size_t dim) {
  Subgraph sub{g, std::vector<NodeId>(g.num_nodes())};
  std::iota(sub.node_map.begin(), sub.node_map.end(), 0);
  return make_view(std::move(sub), dim);
}

}  // namespace

TEST_CASE("node feature degree buckets") {
  const Graph g = Graph::from_edge_pairs(std::vector<EdgePair>{{0, 1}, {1, 2}}, 4);
  const RowMatrix x = node_features(view_of(g, 4), 4, 16);
  CHECK(x.cols() == 20);
  CHECK(x(3, 4 + 0) == 1.0);
  CHECK(x(1, 4 + 2) == 1.0);
  CHECK(x.rightCols(16).rowwise().sum() == Vector::Ones(4));

  const RowMatrix star = node_features(view_of(complete_graph(41), 2), 2, 16);
  CHECK(star(0, 2 + 15) == 1.0);

  const View p3 = view_of(path_graph(3), 3);
  const RowMatrix px = node_features(p3, 3, 16);
  CHECK(px(1, 3 + 2) == 1.0);
  CHECK(px.leftCols(3) == RowMatrix(p3.features));
}

TEST_CASE("initialization is deterministic and bounded") {
  EncoderDims dims;
  dims.pos_dim = 6;
  dims.degree_buckets = 4;
  dims.hidden = 8;
  const GinParams a = GinParams::init(dims, 5);
  const GinParams b = GinParams::init(dims, 5);
  const GinParams c = GinParams::init(dims, 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.size() == GinParams::parameter_count(dims));
  const double in_limit = std::sqrt(6.0 / (10.0 + 8.0));
  CHECK(a.input_weight().cwiseAbs().maxCoeff() <= in_limit);
  CHECK(a.input_bias().norm() == 0.0);
  for (std::size_t l = 0; l < dims.layers; ++l) {
    CHECK(a.weight1(l).cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 16.0));
    CHECK(a.bias1(l).norm() == 0.0);
    CHECK(a.bias2(l).norm() == 0.0);
  }

  EncoderDims tiny{1, 0, 1, 5, 0.0};
  const GinParams t = GinParams::init(tiny, 1);
  CHECK(t.size() == 1 + 1 + 5 * 4);
  const Vector r = gin_forward(t, path_graph(3), RowMatrix::Ones(3, 1));
  CHECK(r.size() == 1);
}

TEST_CASE("permutation invariance") {
  EncoderDims dims;
  dims.pos_dim = 8;
  dims.hidden = 16;
  Rng rng(21);
  GinParams params = GinParams::init(dims, 3);
  randomize_biases(params, rng);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 15;
    const Graph g = random_graph(n, 0.35, 100 + trial);
    const RowMatrix x = random_features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims.input_dim()), rng);
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[uniform_int(rng, 0, i)]);
    RowMatrix px(x.rows(), x.cols());
    for (std::size_t u = 0; u < n; ++u) px.row(perm[u]) = x.row(static_cast<Eigen::Index>(u));
    const Vector a = gin_forward(params, g, x);
    const Vector b = gin_forward(params, permute_graph(g, perm), px);
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("zero features and biases give a zero representation") {
  EncoderDims dims;
  dims.pos_dim = 4;
  dims.degree_buckets = 0;
  dims.hidden = 8;
  const GinParams params = GinParams::init(dims, 1);
  ForwardCache cache;
  const Vector r = gin_forward(params, path_graph(5), RowMatrix::Zero(5, 4), {}, &cache);
  CHECK(r.norm() == 0.0);
  CHECK(cache.readout.norm() == 0.0);
  std::vector<double> grad(params.size(), 0.0);
  gin_backward(params, path_graph(5), cache, Vector::Ones(8), grad);
  CHECK(std::all_of(grad.begin(), grad.end(), [](double g) { return g == 0.0; }));
}

TEST_CASE("sum readout doubles for duplicated isolated nodes") {
  EncoderDims dims;
  dims.pos_dim = 3;
  dims.degree_buckets = 2;
  dims.hidden = 6;
  Rng rng(2);
  GinParams params = GinParams::init(dims, 4);
  randomize_biases(params, rng);
  const RowMatrix row = random_features(1, 5, rng);
  RowMatrix two(2, 5);
  two << row, row;
  ForwardCache one_cache, two_cache;
  const Vector a = gin_forward(params, path_graph(1), row, {}, &one_cache);
  const Vector b = gin_forward(params, Graph::from_edge_pairs(std::vector<EdgePair>{}, 2), two, {}, &two_cache);
  CHECK((two_cache.readout - 2.0 * one_cache.readout).norm() < 1e-12);
  CHECK((a - b).norm() < 1e-12);
}

TEST_CASE("representation norm is zero or one") {
  EncoderDims dims;
  dims.pos_dim = 8;
  const GinParams params = GinParams::init(dims, 9);
  for (Seed s = 0; s < 20; ++s) {
    const Vector r = gin_forward(params, view_of(random_graph(4 + s, 0.3, s), 8));
    const double norm = r.norm();
    CHECK((std::abs(norm - 1.0) < 1e-10 || norm < 1e-10));
  }
}

TEST_CASE("analytic gradients match central differences") {
  EncoderDims dims;
  dims.pos_dim = 4;
  dims.degree_buckets = 3;
  dims.hidden = 5;
  Rng rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    GinParams params = GinParams::init(dims, 50 + trial);
    randomize_biases(params, rng);
    const std::size_t n = 3 + trial;
    const Graph g = random_graph(n, 0.5, 70 + trial);
    const RowMatrix x = random_features(static_cast<Eigen::Index>(n), 7, rng);
    Vector w(5);
    for (int i = 0; i < 5; ++i) w(i) = standard_normal(rng);
    ForwardOptions opts;
    opts.dropout = trial % 2 == 0 ? 0.0 : 0.3;
    opts.seed = 5;

    ForwardCache cache;
    gin_forward(params, g, x, opts, &cache);
    std::vector<double> grad(params.size(), 0.0);
    gin_backward(params, g, cache, w, grad);

    const double h = 1e-5;
    Vector analytic(static_cast<Eigen::Index>(params.size()));
    Vector numeric(static_cast<Eigen::Index>(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params.values()[i];
      params.values()[i] = saved + h;
      const double up = w.dot(gin_forward(params, g, x, opts));
      params.values()[i] = saved - h;
      const double down = w.dot(gin_forward(params, g, x, opts));
      params.values()[i] = saved;
      numeric(static_cast<Eigen::Index>(i)) = (up - down) / (2 * h);
      analytic(static_cast<Eigen::Index>(i)) = grad[i];
    }
    const double rel = (analytic - numeric).norm() / std::max(1e-12, std::max(analytic.norm(), numeric.norm()));
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("dimension mismatches throw") {
  EncoderDims dims;
  const GinParams params = GinParams::init(dims, 1);
  CHECK_THROWS_AS(gin_forward(params, path_graph(3), RowMatrix::Zero(3, 5)), InvalidArgument);
  CHECK_THROWS_AS(gin_forward(params, path_graph(3), RowMatrix::Zero(2, dims.input_dim())), InvalidArgument);
}
