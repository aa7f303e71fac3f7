#include "sgcl/kernels.hpp"

#include <algorithm>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sgcl::kernels {

namespace {

inline void aggregate_row(const Graph& g, const RowMatrix& h, double eps, RowMatrix& out, Eigen::Index u) {
  out.row(u) = (1.0 + eps) * h.row(u);
  for (NodeId v : g.neighbors(static_cast<NodeId>(u))) out.row(u) += h.row(v);
}

void check_shapes(const Graph& g, const RowMatrix& h) {
  if (static_cast<std::size_t>(h.rows()) != g.num_nodes()) {
    throw InvalidArgument("aggregate: feature rows do not match node count");
  }
}

}  // namespace

void aggregate_serial(const Graph& g, const RowMatrix& h, double eps, RowMatrix& out) {
  check_shapes(g, h);
  out.resize(h.rows(), h.cols());
  for (Eigen::Index u = 0; u < h.rows(); ++u) aggregate_row(g, h, eps, out, u);
}

void aggregate_parallel(const Graph& g, const RowMatrix& h, double eps, RowMatrix& out) {
  check_shapes(g, h);
  out.resize(h.rows(), h.cols());
  const Eigen::Index n = h.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index u = 0; u < n; ++u) aggregate_row(g, h, eps, out, u);
}

Matrix similarity_logits_serial(const Matrix& q, const Matrix& k, double tau) {
  if (q.cols() != k.cols()) throw InvalidArgument("similarity_logits: dimension mismatch");
  Matrix out(q.rows(), k.rows());
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = 0; j < k.rows(); ++j) out(i, j) = q.row(i).dot(k.row(j)) / tau;
  return out;
}

Matrix similarity_logits_parallel(const Matrix& q, const Matrix& k, double tau) {
  if (q.cols() != k.cols()) throw InvalidArgument("similarity_logits: dimension mismatch");
  Matrix out(q.rows(), k.rows());
  const Eigen::Index rows = q.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < k.rows(); ++j) out(i, j) = q.row(i).dot(k.row(j)) / tau;
  return out;
}

void reduce_sum_serial(const std::vector<std::vector<double>>& parts, std::vector<double>& out) {
  const std::size_t n = parts.empty() ? out.size() : parts.front().size();
  out.assign(n, 0.0);
  for (const auto& part : parts)
    for (std::size_t i = 0; i < n; ++i) out[i] += part[i];
}

void reduce_sum_parallel(const std::vector<std::vector<double>>& parts, std::vector<double>& out) {
  const std::size_t n = parts.empty() ? out.size() : parts.front().size();
  out.assign(n, 0.0);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    double sum = 0.0;
    for (const auto& part : parts) sum += part[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = sum;
  }
}

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_count(int workers) {
#ifdef _OPENMP
  if (workers > 0) omp_set_num_threads(workers);
#else
  (void)workers;
#endif
}

}  // namespace sgcl::kernels
