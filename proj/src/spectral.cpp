#include "sgcl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/SparseCholesky>

namespace sgcl {

SparseMatrix laplacian(const Graph& g, LaplacianKind kind) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(g.col_indices().size() + g.num_nodes());
  std::vector<double> inv_sqrt(g.num_nodes(), 0.0);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (g.degree(u) > 0) inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u)));
  }
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    double diag = kind == LaplacianKind::normalized ? 1.0 : static_cast<double>(g.degree(u));
    for (NodeId v : g.neighbors(u)) {
      const double w = kind == LaplacianKind::normalized ? inv_sqrt[u] * inv_sqrt[v] : 1.0;
      if (v == u) {
        diag -= w;
      } else {
        triplets.emplace_back(u, v, -w);
      }
    }
    triplets.emplace_back(u, u, diag);
  }
  SparseMatrix L(n, n);
  L.setFromTriplets(triplets.begin(), triplets.end());
  return L;
}

Matrix laplacian_dense(const Graph& g, LaplacianKind kind) { return Matrix(laplacian(g, kind)); }

void canonicalize_signs(Matrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    auto col = vectors.col(j);
    const double peak = col.cwiseAbs().maxCoeff();
    if (peak == 0.0) continue;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) >= peak * (1.0 - 1e-9)) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
  }
}

namespace {

SpectralEmbedding dense_smallest(const Matrix& dense, std::size_t k, LaplacianKind kind) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(dense);
  if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver failed to converge");
  SpectralEmbedding out;
  out.kind = kind;
  out.eigenvalues = solver.eigenvalues().head(static_cast<Eigen::Index>(k));
  out.eigenvectors = solver.eigenvectors().leftCols(static_cast<Eigen::Index>(k));
  canonicalize_signs(out.eigenvectors);
  return out;
}

Matrix orthonormalize(const Matrix& block) {
  Eigen::HouseholderQR<Matrix> qr(block);
  return qr.householderQ() * Matrix::Identity(block.rows(), block.cols());
}

// Shift-invert block subspace iteration with Rayleigh-Ritz extraction.
SpectralEmbedding iterative_smallest(const SparseMatrix& L, std::size_t k, LaplacianKind kind,
                                     const EigenSolverOptions& options) {
  const Eigen::Index n = L.rows();
  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::Index block = std::min<Eigen::Index>(n, kk + std::max<Eigen::Index>(kk, 8));

  // Gershgorin lower bound so the shifted operator is positive definite.
  double lower = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double radius = 0.0;
    double diag = 0.0;
    for (SparseMatrix::InnerIterator it(L, i); it; ++it) {
      if (it.row() == i) diag = it.value(); else radius += std::abs(it.value());
    }
    lower = std::min(lower, diag - radius);
  }
  const double scale = std::max(1.0, L.norm());
  const double shift = -lower + 1e-3;
  SparseMatrix shifted = L;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
  Eigen::SimplicialLDLT<SparseMatrix> factor(shifted);
  if (factor.info() != Eigen::Success) throw NumericalError("iterative eigensolver: factorization failed");

  Rng rng(0x5EC7A1u);
  Matrix x(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = standard_normal(rng);
  x = orthonormalize(x);

  const std::size_t max_iter = options.max_iterations ? options.max_iterations : 10 * static_cast<std::size_t>(n);
  double worst = 0.0;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    Matrix y = orthonormalize(factor.solve(x));
    Matrix ly = L * y;
    Matrix t = y.transpose() * ly;
    t = 0.5 * (t + t.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> ritz(t);
    x = y * ritz.eigenvectors();
    Matrix lx = ly * ritz.eigenvectors();
    worst = 0.0;
    for (Eigen::Index j = 0; j < kk; ++j) {
      worst = std::max(worst, (lx.col(j) - ritz.eigenvalues()(j) * x.col(j)).norm());
    }
    if (worst <= options.tolerance * scale) {
      SpectralEmbedding out;
      out.kind = kind;
      out.eigenvalues = ritz.eigenvalues().head(kk);
      out.eigenvectors = x.leftCols(kk);
      canonicalize_signs(out.eigenvectors);
      return out;
    }
  }
  throw NumericalError("iterative eigensolver did not converge; max residual " + std::to_string(worst));
}

}  // namespace

SpectralEmbedding smallest_k_eigs(const SparseMatrix& L, std::size_t k, LaplacianKind kind,
                                  const EigenSolverOptions& options) {
  if (L.rows() != L.cols()) throw InvalidArgument("smallest_k_eigs: matrix not square");
  const auto n = static_cast<std::size_t>(L.rows());
  if (k > n) throw InvalidArgument("smallest_k_eigs: k exceeds matrix size");
  if (k == 0) return {Vector(0), Matrix(n, 0), kind};
  if (n <= options.dense_cap) return dense_smallest(Matrix(L), k, kind);
  return iterative_smallest(L, k, kind, options);
}

SpectralEmbedding full_spectrum(const Graph& g, LaplacianKind kind) {
  if (g.num_nodes() == 0) return {Vector(0), Matrix(0, 0), kind};
  return dense_smallest(laplacian_dense(g, kind), g.num_nodes(), kind);
}

PositionalSpectrum positional_spectrum(const Graph& g, std::size_t dim, LaplacianKind kind) {
  if (dim == 0) throw InvalidArgument("positional_embedding: dim must be >= 1");
  const std::size_t n = g.num_nodes();
  const std::size_t used = std::min(n, dim);
  PositionalSpectrum out;
  out.features = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  if (used == 0) return out;
  const auto eigs = smallest_k_eigs(laplacian(g, kind), used, kind);
  out.features.leftCols(static_cast<Eigen::Index>(used)) = eigs.eigenvectors;
  out.eigenvalues.assign(eigs.eigenvalues.data(), eigs.eigenvalues.data() + used);
  return out;
}

Matrix positional_embedding(const Graph& g, std::size_t dim) {
  return positional_spectrum(g, dim, LaplacianKind::normalized).features;
}

std::pair<double, Vector> path_closed_form(std::size_t n, std::size_t k) {
  if (k >= n) throw InvalidArgument("path_closed_form: index out of range");
  const double nn = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double value = 2.0 - 2.0 * std::cos(std::numbers::pi * kd / nn);
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t u = 0; u < n; ++u) {
    v(static_cast<Eigen::Index>(u)) = std::cos(std::numbers::pi * kd * (static_cast<double>(u) + 0.5) / nn);
  }
  v.normalize();
  return {value, v};
}

std::vector<double> product_spectrum(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() * b.size());
  for (double x : a)
    for (double y : b) out.push_back(x + y);
  std::sort(out.begin(), out.end());
  return out;
}

double lambda2(const Graph& g) {
  if (g.num_nodes() < 2) return 0.0;
  return smallest_k_eigs(laplacian(g, LaplacianKind::normalized), 2).eigenvalues(1);
}

double max_residual(const SparseMatrix& L, const SpectralEmbedding& eigs) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < eigs.eigenvectors.cols(); ++j) {
    const Vector r = L * eigs.eigenvectors.col(j) - eigs.eigenvalues(j) * eigs.eigenvectors.col(j);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

}  // namespace sgcl
