#include "sgcl/global_embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgcl/spectral.hpp"

namespace sgcl {

Matrix netmf_matrix_dense(const Matrix& weights, const NetMfOptions& options) {
  if (weights.rows() != weights.cols()) throw InvalidArgument("netmf_matrix: matrix not square");
  if (options.window == 0) throw InvalidArgument("netmf_matrix: window must be >= 1");
  if (!(options.log_floor > 0.0)) throw InvalidArgument("netmf_matrix: log_floor must be positive");
  if (static_cast<std::size_t>(weights.rows()) > options.dense_cap) {
    throw InvalidArgument("netmf_matrix: graph too large for the dense path");
  }
  const Eigen::Index n = weights.rows();
  const Vector degree = weights.rowwise().sum();
  Vector inv_sqrt = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (degree(i) > 0.0) inv_sqrt(i) = 1.0 / std::sqrt(degree(i));
  }
  const Matrix p = inv_sqrt.asDiagonal() * weights * inv_sqrt.asDiagonal();
  Matrix power = p;
  Matrix sum = p;
  for (std::size_t j = 2; j <= options.window; ++j) {
    power = power * p;
    sum += power;
  }
  Matrix m = inv_sqrt.asDiagonal() * sum * inv_sqrt.asDiagonal();
  if (options.volume_scaling) m *= weights.sum();
  m = m.unaryExpr([floor = options.log_floor](double x) { return std::log(std::max(x, floor)); });
  return 0.5 * (m + m.transpose());
}

Matrix netmf_matrix(const Graph& g, const NetMfOptions& options) {
  if (g.num_nodes() > options.dense_cap) throw InvalidArgument("netmf_matrix: graph too large for the dense path");
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix w = Matrix::Zero(n, n);
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (NodeId v : g.neighbors(u)) w(u, v) = 1.0;
  return netmf_matrix_dense(w, options);
}

SpectralFactor spectral_factor(const Matrix& m, std::size_t dim) {
  if (m.rows() != m.cols()) throw InvalidArgument("factorize_global: matrix not square");
  if (dim > static_cast<std::size_t>(m.rows())) throw InvalidArgument("factorize_global: dim exceeds matrix size");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()));
  if (solver.info() != Eigen::Success) throw NumericalError("factorize_global: eigensolver failed");
  const Eigen::Index n = m.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Vector& values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(values(a)) > std::abs(values(b));
  });
  SpectralFactor out;
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix vectors(n, d);
  out.eigenvalues.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    vectors.col(j) = solver.eigenvectors().col(order[static_cast<std::size_t>(j)]);
    out.eigenvalues(j) = values(order[static_cast<std::size_t>(j)]);
  }
  canonicalize_signs(vectors);
  out.factor = vectors * out.eigenvalues.cwiseAbs().cwiseSqrt().asDiagonal();
  return out;
}

GlobalEmbedding factorize_global(const Matrix& m, std::size_t dim, std::size_t window) {
  GlobalEmbedding out;
  out.matrix = spectral_factor(m, dim).factor;
  out.window = window;
  out.dim = dim;
  for (Eigen::Index i = 0; i < out.matrix.rows(); ++i) {
    const double norm = out.matrix.row(i).norm();
    if (norm > 0.0) out.matrix.row(i) /= norm;
  }
  return out;
}

GlobalEmbedding compute_global_embedding(const Graph& g, std::size_t dim, const NetMfOptions& options) {
  const std::size_t used = std::min(dim, g.num_nodes());
  auto embedding = factorize_global(netmf_matrix(g, options), used, options.window);
  if (used < dim) {
    embedding.matrix.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(dim));
    embedding.matrix.rightCols(static_cast<Eigen::Index>(dim - used)).setZero();
    embedding.dim = dim;
  }
  return embedding;
}

Vector view_summary(const GlobalEmbedding& embedding, std::span<const NodeId> node_map) {
  Vector sum = Vector::Zero(embedding.matrix.cols());
  for (NodeId id : node_map) {
    if (id >= embedding.matrix.rows()) throw InvalidArgument("view_summary: node id out of range");
    sum += embedding.matrix.row(id).transpose();
  }
  return sum;
}

}  // namespace sgcl
