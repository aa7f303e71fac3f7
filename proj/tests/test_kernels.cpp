#include <doctest.h>

#include "sgcl/kernels.hpp"

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

template <typename M>
M random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  M m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  return m;
}

}  // namespace

TEST_CASE("aggregate matches the dense definition") {
  Rng rng(1);
  const Graph g = random_graph(30, 0.2, 2);
  const RowMatrix h = random_matrix<RowMatrix>(30, 7, rng);
  Matrix a = Matrix::Zero(30, 30);
  for (NodeId u = 0; u < 30; ++u)
    for (NodeId v : g.neighbors(u)) a(u, v) = 1.0;
  RowMatrix out;
  kernels::aggregate_serial(g, h, 0.25, out);
  CHECK((out - (1.25 * h + a * h)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("parallel kernels equal their serial references bit for bit") {
  Rng rng(3);
  for (int workers : {1, 2, 4}) {
    kernels::set_worker_count(workers);
    CHECK(kernels::worker_count() == workers);
    for (Seed s = 0; s < 5; ++s) {
      const Graph g = random_graph(50 + 20 * s, 0.1, s);
      const RowMatrix h = random_matrix<RowMatrix>(static_cast<Eigen::Index>(g.num_nodes()), 16, rng);
      RowMatrix serial, parallel;
      kernels::aggregate_serial(g, h, 0.0, serial);
      kernels::aggregate_parallel(g, h, 0.0, parallel);
      CHECK(serial == parallel);

      const Matrix q = random_matrix<Matrix>(17, 8, rng);
      const Matrix k = random_matrix<Matrix>(33, 8, rng);
      CHECK(kernels::similarity_logits_serial(q, k, 0.07) == kernels::similarity_logits_parallel(q, k, 0.07));

      std::vector<std::vector<double>> parts(9, std::vector<double>(101));
      for (auto& p : parts)
        for (double& x : p) x = standard_normal(rng);
      std::vector<double> a, b;
      kernels::reduce_sum_serial(parts, a);
      kernels::reduce_sum_parallel(parts, b);
      CHECK(a == b);
    }
  }
  kernels::set_worker_count(0);
}

TEST_CASE("similarity logits definition") {
  Matrix q(1, 2), k(2, 2);
  q << 1, 0;
  k << 1, 0, 0.5, 0.5;
  const Matrix l = kernels::similarity_logits_serial(q, k, 0.5);
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(0, 1) == doctest::Approx(1.0));
}
