#include <benchmark/benchmark.h>

#include <vector>

#include "sgcl/common.hpp"
#include "sgcl/graph.hpp"
#include "sgcl/kernels.hpp"

using namespace sgcl;

namespace {

Graph random_graph(std::size_t n, std::size_t avg_degree, Seed seed) {
  Rng rng(seed);
  std::vector<EdgePair> pairs;
  for (std::size_t e = 0; e < n * avg_degree / 2; ++e) {
    pairs.emplace_back(static_cast<NodeId>(uniform_int(rng, 0, n - 1)), static_cast<NodeId>(uniform_int(rng, 0, n - 1)));
  }
  return Graph::from_edge_pairs(pairs, n);
}

template <typename M>
M random_matrix(Eigen::Index rows, Eigen::Index cols, Seed seed) {
  Rng rng(seed);
  M m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  return m;
}

void BM_AggregateSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = random_graph(n, 10, 1);
  const auto h = random_matrix<RowMatrix>(static_cast<Eigen::Index>(n), 64, 2);
  RowMatrix out;
  for (auto _ : state) {
    kernels::aggregate_serial(g, h, 0.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_AggregateParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = random_graph(n, 10, 1);
  const auto h = random_matrix<RowMatrix>(static_cast<Eigen::Index>(n), 64, 2);
  RowMatrix out;
  for (auto _ : state) {
    kernels::aggregate_parallel(g, h, 0.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_LogitsSerial(benchmark::State& state) {
  const auto q = random_matrix<Matrix>(state.range(0), 64, 3);
  const auto k = random_matrix<Matrix>(1024, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::similarity_logits_serial(q, k, 0.07));
}

void BM_LogitsParallel(benchmark::State& state) {
  const auto q = random_matrix<Matrix>(state.range(0), 64, 3);
  const auto k = random_matrix<Matrix>(1024, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::similarity_logits_parallel(q, k, 0.07));
}

std::vector<std::vector<double>> gradient_parts(std::size_t parts, std::size_t size) {
  Rng rng(5);
  std::vector<std::vector<double>> out(parts, std::vector<double>(size));
  for (auto& p : out)
    for (double& v : p) v = standard_normal(rng);
  return out;
}

void BM_ReduceSerial(benchmark::State& state) {
  const auto parts = gradient_parts(static_cast<std::size_t>(state.range(0)), 50000);
  std::vector<double> out;
  for (auto _ : state) {
    kernels::reduce_sum_serial(parts, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_ReduceParallel(benchmark::State& state) {
  const auto parts = gradient_parts(static_cast<std::size_t>(state.range(0)), 50000);
  std::vector<double> out;
  for (auto _ : state) {
    kernels::reduce_sum_parallel(parts, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_AggregateSerial)->Arg(256)->Arg(4096);
BENCHMARK(BM_AggregateParallel)->Arg(256)->Arg(4096);
BENCHMARK(BM_LogitsSerial)->Arg(32)->Arg(1024);
BENCHMARK(BM_LogitsParallel)->Arg(32)->Arg(1024);
BENCHMARK(BM_ReduceSerial)->Arg(32)->Arg(256);
BENCHMARK(BM_ReduceParallel)->Arg(32)->Arg(256);

BENCHMARK_MAIN();
